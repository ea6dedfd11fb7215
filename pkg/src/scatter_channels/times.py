"""Dwell, Larmor-clock and group-delay times, per channel.

Dwell time of a channel over an interval (default [a, b]):

    tau = (1 / J_in) * integral |psi_channel|**2 dx,

with J_in = 2k for the full state, 2k |A_tr_in|**2 and 2k |A_ref_in|**2 for
the transmission and reflection channels (the reflection channel carries
no net current, so its incident current is used).

Larmor clock: the barrier heights are shifted by -omega/2 (spin up) and
+omega/2 (spin down).  The clock reads the phase that each spin branch picks
up between entering and leaving the channel,

    theta(omega) = arg(A_up) - arg(A_down),  A = outgoing / incoming amplitude,

(t for the full state, t / A_tr_in and r / A_ref_in for the channels) and
the Larmor time is lim theta/omega, obtained by a polynomial fit in omega**2
over a short list of small frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DerivativeError, EmptyChannelError, ExtrapolationError
from .quadrature import panel_grid
from .stationary import clip_channels, decompose, scattering_amplitudes

DEFAULT_OMEGAS = (1e-3, 2e-3, 5e-3, 1e-2)
EXTRAPOLATION_TOL = 1e-6
EMPTY_CHANNEL = 1e-24


def _interval_integral(f, spec, interval, order=40):
    lo, hi = interval
    x, w = panel_grid(lo, hi, list(spec.boundaries()) + [spec.x_c], panel=0.5, order=order)
    return float(np.sum(w * f(x)))


def channel_density(dec, channel):
    """Callable x -> |psi_channel(x)|**2 for a scalar-energy decomposition."""
    if channel == "full":
        return lambda x: np.abs(dec.psi_full.evaluate(x)) ** 2
    tr, ref = clip_channels(dec)
    if channel == "tr":
        return lambda x: np.abs(tr.evaluate(x)) ** 2
    if channel == "ref":
        return lambda x: np.abs(ref.evaluate(x)) ** 2
    raise ValueError(f"unknown channel {channel!r}")


def incident_current(dec, channel):
    k = float(np.sqrt(dec.E))
    weight = {"full": 1.0, "tr": abs(dec.A_tr_in) ** 2, "ref": abs(dec.A_ref_in) ** 2}[channel]
    return 2 * k * weight


def dwell_time(spec, E, channel="full", interval=None, dec=None):
    """Time spent on average in ``interval`` by particles of ``channel``."""
    dec = dec if dec is not None else decompose(spec, E)
    j_in = incident_current(dec, channel)
    if j_in <= EMPTY_CHANNEL * 2 * np.sqrt(dec.E):
        raise EmptyChannelError(f"the {channel} channel carries no incident current at E={E}")
    interval = interval or (spec.a, spec.b)
    return _interval_integral(channel_density(dec, channel), spec, interval) / j_in


def interference_time(spec, E, interval=None, dec=None):
    """2 Re integral conj(psi_tr) psi_ref dx / 2k: the part of the full dwell time
    that neither channel accounts for."""
    dec = dec if dec is not None else decompose(spec, E)
    tr, ref = clip_channels(dec)
    interval = interval or (spec.a, spec.b)

    def cross(x):
        return 2 * np.real(np.conj(tr.evaluate(x)) * ref.evaluate(x))

    return _interval_integral(cross, spec, interval) / (2 * np.sqrt(dec.E))


def channel_amplitude(dec, channel):
    """Outgoing over incoming amplitude of a channel (its one-in/one-out S-matrix element)."""
    if channel == "full":
        return dec.t
    if channel == "tr":
        return dec.t / dec.A_tr_in
    if channel == "ref":
        return dec.r / dec.A_ref_in
    raise ValueError(f"unknown channel {channel!r}")


@dataclass
class LarmorReading:
    time: float
    residual: float
    omegas: np.ndarray
    theta: np.ndarray
    out_of_plane: float

    @property
    def table(self):
        return np.column_stack([self.omegas, self.theta])


def _fit_even(omegas, values):
    """Extrapolate values(omega) = c0 + c1 omega**2 + ... to omega = 0.

    Uses one degree of freedom fewer than points so a residual remains.
    """
    x = omegas**2
    deg = max(1, len(omegas) - 2)
    coef = np.polynomial.polynomial.polyfit(x, values, deg)
    resid = values - np.polynomial.polynomial.polyval(x, coef)
    scale = max(abs(coef[0]), 1e-300)
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)) / scale)


def larmor_time(spec, E, channel="tr", omegas=DEFAULT_OMEGAS, tol=EXTRAPOLATION_TOL):
    omegas = np.asarray(sorted(omegas), dtype=float)
    if len(omegas) < 3:
        raise ValueError("need at least three clock frequencies")
    for w in omegas:
        if np.any(np.isclose(spec.heights + w / 2, E, rtol=0, atol=1e-15)) or np.any(
            np.isclose(spec.heights - w / 2, E, rtol=0, atol=1e-15)
        ):
            raise ValueError(f"omega={w} puts a spin branch exactly at a segment threshold")
    theta = np.empty(len(omegas))
    log_ratio = np.empty(len(omegas))
    for i, w in enumerate(omegas):
        up = channel_amplitude(decompose(spec.shifted(-w / 2), E), channel)
        down = channel_amplitude(decompose(spec.shifted(+w / 2), E), channel)
        theta[i] = np.angle(up * np.conj(down))
        log_ratio[i] = np.log(abs(up) / abs(down))
    tau, resid = _fit_even(omegas, theta / omegas)
    tau_z, _ = _fit_even(omegas, log_ratio / omegas)
    if not resid < tol:
        raise ExtrapolationError(
            f"Larmor extrapolation residual {resid:.2e} exceeds {tol:.1e}",
            np.column_stack([omegas, theta]),
        )
    return LarmorReading(tau, resid, omegas, theta, tau_z)


def transmission_kink_time(spec, E, h=1e-5):
    """Re(conj(C) dF/dV - conj(F) dC/dV) / (2k T), F = Psi_full(x_c).

    Difference between the transmission-channel dwell time and its Larmor
    reading: the slope jump of psi_tr at x_c responds to the clock field but
    leaves no trace in the asymptotic amplitudes.
    """
    up, down = decompose(spec.shifted(+h / 2), E), decompose(spec.shifted(-h / 2), E)
    dec = decompose(spec, E)
    F = dec.psi_full.evaluate(spec.x_c)
    dF = (up.psi_full.evaluate(spec.x_c) - down.psi_full.evaluate(spec.x_c)) / h
    dC = (up.C - down.C) / h
    k = np.sqrt(E)
    return float(np.real(np.conj(dec.C) * dF - np.conj(F) * dC) / (2 * k * dec.T))


def group_delay(spec, E, h=None, rtol=1e-6, max_halvings=20):
    """Phase time d/dE [arg t + k (b - a)] by central differences with step control.

    The step is halved until two successive estimates agree to ``rtol``
    relative to the larger of the result and the free traversal time.
    """
    h = h or 1e-3 * E
    L = spec.length

    def phase_factor(energy):
        _, t = scattering_amplitudes(spec, energy)
        return t * np.exp(1j * np.sqrt(energy) * L)

    def d(step):
        if not E - step > 0:
            raise DerivativeError(f"step {step} reaches non-positive energy")
        return np.angle(phase_factor(E + step) * np.conj(phase_factor(E - step))) / (2 * step)

    scale = L / (2 * np.sqrt(E))
    coarse = d(h)
    for _ in range(max_halvings):
        fine = d(h / 2)
        if abs(fine - coarse) <= rtol * max(abs(fine), scale, 1e-12):
            return float((4 * fine - coarse) / 3)
        coarse, h = fine, h / 2
    raise DerivativeError(f"group delay derivative did not settle at E={E}")


@dataclass
class ChannelTimes:
    E: float
    channel: str
    dwell_time: float
    larmor_time: float
    larmor_residual: float
    larmor_omegas: np.ndarray = field(repr=False)
    larmor_out_of_plane: float = float("nan")

    @property
    def relative_gap(self):
        return abs(self.larmor_time - self.dwell_time) / abs(self.dwell_time)


def channel_times(spec, E, channel, omegas=DEFAULT_OMEGAS, interval=None):
    reading = larmor_time(spec, E, channel, omegas)
    tau = dwell_time(spec, E, channel, interval)
    return ChannelTimes(E, channel, tau, reading.time, reading.residual, reading.omegas, reading.out_of_plane)


TIMES_COLUMNS = (
    "E", "T", "R", "dwell_full", "dwell_tr", "dwell_ref", "larmor_full", "larmor_tr", "larmor_ref",
    "group_delay", "interference", "kink", "residual_full", "residual_tr", "residual_ref",
    "gap_tr", "gap_ref",
)


def times_row(spec, E, omegas=DEFAULT_OMEGAS, interval=None):
    """One row of the timing table; empty or failing entries become NaN.

    ``gap_*`` is |larmor - dwell| / dwell for that channel.
    """
    nan = float("nan")
    dec = decompose(spec, E)
    row = dict(E=float(E), T=float(dec.T), R=float(dec.R))
    for ch in ("full", "tr", "ref"):
        try:
            row[f"dwell_{ch}"] = dwell_time(spec, E, ch, interval, dec=dec)
        except EmptyChannelError:
            row[f"dwell_{ch}"] = nan
        try:
            rd = larmor_time(spec, E, ch, omegas)
            row[f"larmor_{ch}"], row[f"residual_{ch}"] = rd.time, rd.residual
        except (ExtrapolationError, ZeroDivisionError, FloatingPointError):
            row[f"larmor_{ch}"] = row[f"residual_{ch}"] = nan
    try:
        row["group_delay"] = group_delay(spec, E)
    except DerivativeError:
        row["group_delay"] = nan
    row["interference"] = interference_time(spec, E, interval, dec=dec)
    row["kink"] = transmission_kink_time(spec, E) if dec.T > EMPTY_CHANNEL else nan
    for ch in ("tr", "ref"):
        d = row[f"dwell_{ch}"]
        row[f"gap_{ch}"] = abs(row[f"larmor_{ch}"] - d) / abs(d) if d == d and d != 0 else nan
    return {key: row[key] for key in TIMES_COLUMNS}
