"""The five scenario commands as functions returning rendered files.

Each ``run_*`` takes a validated Scenario and returns ``{filename: text}``;
nothing touches the disk here.
"""

from __future__ import annotations

import numpy as np

from . import bohm
from .gridevolve import GridEvolver, l2_distance, reference_grid
from .io import Table, banner_line, dumps_json, gnuplot_script
from .packets import ChannelPackets, gaussian_spectrum
from .potential import make_rectangular
from .stationary import (
    amplitude_identity_residual,
    clip_channels,
    current_density,
    decompose,
    phase_relation_residual,
)
from .times import TIMES_COLUMNS, group_delay, dwell_time, times_row

AMPLITUDE_COLUMNS = (
    "E", "re_r", "im_r", "re_t", "im_t", "T", "R",
    "re_A_tr_in", "im_A_tr_in", "re_A_ref_in", "im_A_ref_in",
    "unitarity_residual", "identity_residual", "phase_residual",
)

DECOMPOSITION_COLUMNS = (
    "x",
    "re_Psi_full", "im_Psi_full", "re_Psi_tr", "im_Psi_tr", "re_Psi_ref", "im_Psi_ref",
    "re_psi_tr", "im_psi_tr", "re_psi_ref", "im_psi_ref",
    "J_full", "J_tr", "J_ref",
)

SERIES_COLUMNS = (
    "t", "norm_full", "norm_tr", "norm_ref", "T_plus_R", "re_overlap", "im_overlap", "abs_overlap",
    "quadrature_error",
)

SNAPSHOT_COLUMNS = (
    "t", "x",
    "re_full", "im_full", "rho_full", "re_tr", "im_tr", "rho_tr", "re_ref", "im_ref", "rho_ref",
)


def _banner(command, banner):
    return banner_line(command) if banner else None


def _grid(block):
    return np.linspace(block["x_min"], block["x_max"], block["points"])


def amplitudes_table(spec, energies):
    dec = decompose(spec, energies)
    unit = np.abs(dec.r) ** 2 + np.abs(dec.t) ** 2 - 1
    ident = amplitude_identity_residual(spec, energies)
    phase = phase_relation_residual(spec, energies)
    table = Table(AMPLITUDE_COLUMNS)
    for i, E in enumerate(energies):
        table.add([
            E, dec.r[i].real, dec.r[i].imag, dec.t[i].real, dec.t[i].imag, dec.T[i], dec.R[i],
            dec.A_tr_in[i].real, dec.A_tr_in[i].imag, dec.A_ref_in[i].real, dec.A_ref_in[i].imag,
            unit[i], ident[i], phase[i],
        ])
    table.footer = [
        f"max_unitarity_residual={float(np.max(np.abs(unit)))!r}",
        f"max_identity_residual={float(np.max(np.abs(ident)))!r}",
        f"max_phase_residual={float(np.max(np.abs(phase)))!r}",
    ]
    return table


def run_amplitudes(scenario, banner=True):
    energies = np.atleast_1d(scenario.energies)
    table = amplitudes_table(scenario.spec, energies)
    plot = gnuplot_script("amplitudes.csv", 1, [(6, "T"), (7, "R")], "E", "probability", "transmission and reflection")
    return {"amplitudes.csv": table.render(_banner("amplitudes", banner)), "amplitudes.gp": plot}


def decomposition_table(spec, E, x):
    dec = decompose(spec, E)
    tr, ref = clip_channels(dec)
    full = dec.psi_full.field(x)
    Ptr = dec.psi_tr_solution.field(x)
    Pref = dec.psi_ref_solution.field(x)
    ptr = tr.field(x)
    pref = ref.field(x)
    j_full = current_density(*full)
    j_tr = current_density(*ptr)
    j_ref = current_density(*pref)
    table = Table(DECOMPOSITION_COLUMNS)
    for i, xi in enumerate(x):
        table.add([
            xi,
            full[0][i].real, full[0][i].imag, Ptr[0][i].real, Ptr[0][i].imag, Pref[0][i].real, Pref[0][i].imag,
            ptr[0][i].real, ptr[0][i].imag, pref[0][i].real, pref[0][i].imag,
            j_full[i], j_tr[i], j_ref[i],
        ])
    return table


def run_decompose(scenario, banner=True):
    block = scenario.section("decompose")
    x = _grid(block["grid"])
    files, manifest = {}, []
    for i, E in enumerate(block["energies"]):
        name = f"decomposition_{i:03d}.csv"
        files[name] = decomposition_table(scenario.spec, float(E), x).render(_banner("decompose", banner))
        manifest.append({"file": name, "E": float(E)})
    files["decomposition_manifest.json"] = dumps_json(
        {"scenario": scenario.name, "scenario_hash": scenario.digest(), "barrier": scenario.spec.to_dict(),
         "files": manifest}
    )
    files["decomposition.gp"] = gnuplot_script(
        "decomposition_000.csv", 1, [(2, "Re Psi_full"), (4, "Re Psi_tr"), (6, "Re Psi_ref")],
        "x", "amplitude", "channel split",
    )
    return files


def _packets(scenario):
    sp = scenario.section("spectrum")
    spectrum = gaussian_spectrum(sp["k0"], sp["sigma_k"], sp["n_k"], sp["cutoff"], sp["x0"])
    return ChannelPackets(scenario.spec, spectrum)


def evolve_results(scenario):
    """Norm/overlap series, snapshots and the grid-oracle comparison."""
    block = scenario.section("evolve")
    packets = _packets(scenario)
    domain = tuple(block["x_domain"])
    times = [float(t) for t in block["series_times"]]
    rows = packets.series(times, domain)
    qerr = packets.overlap_quadrature_errors(times, domain)
    series = Table(SERIES_COLUMNS)
    for row, q in zip(rows, qerr):
        ov = row["overlap"]
        series.add([row["t"], row["norm_full"], row["norm_tr"], row["norm_ref"],
                    row["norm_tr"] + row["norm_ref"], ov.real, ov.imag, abs(ov), q])
    norms = {ch: np.array([r[f"norm_{ch}"] for r in rows]) for ch in ("full", "tr", "ref")}
    drift = {ch: float(np.std(v) / np.mean(v)) if np.mean(v) > 0 else 0.0 for ch, v in norms.items()}
    t_plus_r = norms["tr"] + norms["ref"]

    oracle = block["oracle"]
    grid = reference_grid(scenario.spec, domain, oracle["element"], oracle["order"])
    steps = int(round(oracle["t_end"] / oracle["dt"]))
    k_max = packets.spectrum.k.max()
    ev = GridEvolver(scenario.spec, grid, oracle["dt"], k_max)
    psi0 = packets.field("full", grid.x, 0.0)[0]
    psi = ev.step(psi0, steps)
    t_end = steps * oracle["dt"]
    synth = packets.field("full", grid.x, t_end)[0]

    x = _grid(block["snapshot_grid"])
    snaps = Table(SNAPSHOT_COLUMNS)
    for t in block["snapshot_times"]:
        f = {ch: packets.field(ch, x, float(t))[0] for ch in ("full", "tr", "ref")}
        for i, xi in enumerate(x):
            snaps.add([float(t), xi] + [v for ch in ("full", "tr", "ref")
                                         for v in (f[ch][i].real, f[ch][i].imag, abs(f[ch][i]) ** 2)])
    T, R = packets.T_avg, packets.R_avg
    late = rows[-1]
    stats = dict(
        T_packet=T,
        R_packet=R,
        relative_norm_drift=drift,
        max_T_plus_R_defect=float(np.max(np.abs(t_plus_r - 1))),
        max_abs_re_overlap=float(max(abs(r["overlap"].real) for r in rows)),
        max_quadrature_error=float(np.max(qerr)),
        late_abs_overlap=float(abs(late["overlap"])),
        late_overlap_bound=float(1e-4 * np.sqrt(T * R)),
        oracle=dict(
            t=t_end, dt=oracle["dt"], nodes=len(grid.x),
            l2_distance=l2_distance(psi, synth, grid.mass),
            norm_drift=float(ev.norm(psi) - ev.norm(psi0)),
        ),
    )
    return dict(packets=packets, series=series, snapshots=snaps, stats=stats, times=times)


def run_evolve(scenario, banner=True):
    res = evolve_results(scenario)
    block = scenario.section("evolve")
    manifest = dict(
        scenario=scenario.name,
        scenario_hash=scenario.digest(),
        barrier=scenario.spec.to_dict(),
        spectrum=scenario.section("spectrum"),
        x_domain=block["x_domain"],
        snapshot_grid=block["snapshot_grid"],
        snapshot_times=block["snapshot_times"],
        series_times=block["series_times"],
        files=["series.csv", "snapshots.csv"],
        statistics=res["stats"],
    )
    b = _banner("evolve", banner)
    return {
        "series.csv": res["series"].render(b),
        "snapshots.csv": res["snapshots"].render(b),
        "evolve_manifest.json": dumps_json(manifest),
        "evolve.gp": gnuplot_script("series.csv", 1, [(3, "norm_tr"), (4, "norm_ref"), (7, "Im overlap")],
                                    "t", "norm", "channel norms"),
    }


def times_table(scenario):
    block = scenario.section("timing")
    omegas = block["omegas"]
    interval = tuple(block["interval"]) if block["interval"] else None
    table = Table(("barrier",) + TIMES_COLUMNS)
    for E in scenario.timing_energies:
        row = times_row(scenario.spec, float(E), omegas, interval)
        table.add(["scenario"] + [row[c] for c in TIMES_COLUMNS])
    free = scenario.spec.with_heights(np.zeros(len(scenario.spec.segments)))
    k0 = scenario.section("spectrum")["k0"]
    row = times_row(free, k0**2, omegas, interval)
    table.add(["free"] + [row[c] for c in TIMES_COLUMNS])
    return table


def hartman_table(scenario):
    h = scenario.section("timing")["hartman"]
    table = Table(("d", "group_delay", "dwell_full", "relative_change"))
    prev = None
    for d in h["widths"]:
        spec = make_rectangular(h["V0"], d)
        tau = group_delay(spec, h["E"])
        table.add([d, tau, dwell_time(spec, h["E"]), float("nan") if prev is None else abs(tau - prev) / abs(prev)])
        prev = tau
    return table


def run_times(scenario, banner=True):
    b = _banner("times", banner)
    table = times_table(scenario)
    gaps = [r for r in table.rows if r[0] == "scenario"]
    cols = table.columns
    g_tr = [r[cols.index("gap_tr")] for r in gaps]
    g_ref = [r[cols.index("gap_ref")] for r in gaps]
    table.footer = [
        f"max_gap_tr={float(np.nanmax(g_tr))!r}",
        f"max_gap_ref={float(np.nanmax(g_ref))!r}",
    ]
    return {
        "times.csv": table.render(b),
        "hartman.csv": hartman_table(scenario).render(b),
        "times.gp": gnuplot_script("times.csv", 2, [(5, "dwell_tr"), (9, "larmor_tr"), (6, "dwell_ref"), (10, "larmor_ref")],
                                   "E", "time", "channel dwell and Larmor times"),
    }


def bohm_results(scenario):
    block = scenario.section("bohm")
    packets = _packets(scenario)
    controls = dict(rtol=block["rtol"], atol=block["rtol"], margin=block["margin"])
    horizon = bohm.find_horizon(packets, 0.0, block["margin"])
    x0s = bohm.density_quantiles(packets, block["ensemble"])
    records = bohm.integrate_ensemble(packets, x0s, 0.0, horizon, **controls)
    crit = bohm.find_critical_point(packets, block["bracket"], block["tol_x"], t_end=horizon, **controls)
    gap = bohm.no_crossing_gap(records)
    fraction = float(np.mean([r.transmitted for r in records]))
    report = dict(
        scenario_hash=scenario.digest(),
        x_star=crit.x_star,
        tol_x=crit.tol_x,
        quantile_residual=crit.residual,
        combined_tolerance=crit.tolerance,
        quantile_identity_holds=crit.satisfied,
        T_packet=crit.transmission,
        tail_mass=crit.tail_mass,
        bracket=list(crit.bracket),
        horizon=horizon,
        ensemble=len(records),
        transmitted_fraction=fraction,
        fraction_resolution=1.0 / len(records),
        no_crossing_gap=gap,
        no_crossing_ok=gap > 0,
    )
    pair = None
    if block["shape_pair"]:
        p = block["partner"]
        pair = bohm.shape_pair(
            scenario.spec, packets.spectrum, p["outer_height"], p["outer_width"], p["inner_width"],
            average=p["match"] == "packet", tol_x=block["tol_x"], t_end=horizon, **controls,
        )
    return dict(packets=packets, records=records, critical=crit, report=report, pair=pair)


def run_bohm(scenario, banner=True):
    res = bohm_results(scenario)
    table = Table(("id", "x0", "classification", "t", "x"))
    for i, rec in enumerate(res["records"]):
        for t, x in zip(rec.t, rec.x):
            table.add([i, rec.x0, rec.classification, t, x])
    files = {
        "trajectories.csv": table.render(_banner("bohm", banner)),
        "critical_point.json": dumps_json(res["report"]),
        "bohm.gp": "set datafile separator ','\nset xlabel 't'\nset ylabel 'x'\n"
                   "plot 'trajectories.csv' using 4:5 every ::1 with dots notitle\n",
    }
    if res["pair"] is not None:
        pair = res["pair"].to_dict()
        pair["distinct"] = res["pair"].distinct()
        pair["threshold"] = 5 * res["pair"].first.tol_x
        files["shape_pair.json"] = dumps_json(pair)
    return files


COMMANDS = {
    "amplitudes": run_amplitudes,
    "decompose": run_decompose,
    "evolve": run_evolve,
    "times": run_times,
    "bohm": run_bohm,
}
