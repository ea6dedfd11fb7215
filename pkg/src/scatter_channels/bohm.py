"""Bohmian trajectories of the full packet and the transmit/reflect divide.

Guidance law in these units: v = J / rho = 2 Im(psi' / psi).  Trajectories
of one wavefunction never cross in 1D, so the initial positions that end up
transmitted form a half-line [x*, inf).  The probability above x* is carried
along with the trajectories, which gives the oracle

    integral_{x*}^{inf} rho(x, t0) dx = packet transmission probability.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import brentq

from .errors import BracketError, IntegrationError, NodeProximityError
from .packets import ChannelPackets, gaussian_spectrum
from .potential import PotentialSpec, make_symmetric_composite
from .quadrature import panel_grid

NODE_FLOOR = 1e-12
MAX_HALVINGS = 60
HORIZON_MASS = 1e-4


def _peak_density(packets):
    # initial Gaussian peak; the floor is relative to it
    return 1.0 / (np.sqrt(2 * np.pi) * packets.spectrum.sigma_x)


def guidance_velocity(psi, dpsi, floor=0.0):
    """J / rho for sampled psi, psi'; raises where rho < floor."""
    rho = np.abs(psi) ** 2
    if np.any(rho < floor) or np.any(rho == 0):
        raise NodeProximityError(f"density {np.min(rho):.3e} below node floor {floor:.3e}")
    return 2 * np.imag(np.conj(psi) * dpsi) / rho


def velocity_field(packets: ChannelPackets, x, t, floor=NODE_FLOOR):
    """Bohmian velocity of the full packet at positions x and time t."""
    psi, dpsi = packets.field("full", np.asarray(x, dtype=float), t)
    try:
        return guidance_velocity(psi, dpsi, floor * _peak_density(packets))
    except NodeProximityError as exc:
        raise NodeProximityError(f"{exc} at t={t:g}") from None


def transport_velocity(packets: ChannelPackets, x, t, lo, dt=1e-3):
    """(-d/dt integral_lo^x rho) / rho: velocity implied by probability transport alone."""

    def mass(tt):
        xs, w = panel_grid(lo, x, list(packets.spec.boundaries()), panel=1.0, order=30)
        return np.sum(w * np.abs(packets.field("full", xs, tt)[0]) ** 2)

    rate = (mass(t + dt) - mass(t - dt)) / (2 * dt)
    rho = abs(packets.field("full", np.array([x]), t)[0][0]) ** 2
    return float(-rate / rho)


def barrier_mass(packets: ChannelPackets, t, margin):
    spec = packets.spec
    xs, w = panel_grid(spec.a - margin, spec.b + margin, list(spec.boundaries()), panel=0.5, order=30)
    return float(np.sum(w * np.abs(packets.field("full", xs, t)[0]) ** 2))


def find_horizon(packets: ChannelPackets, t0=0.0, margin=2.0, threshold=HORIZON_MASS, dt_check=1.0, t_max=1e4):
    """First check time after the packet centre reaches the barrier at which
    all but ``threshold`` of the norm is outside [a - margin, b + margin]."""
    s = packets.spectrum
    t = max(t0, t0 + (packets.spec.a - s.x0) / (2 * s.k0))
    while t < t_max:
        if barrier_mass(packets, t, margin) < threshold:
            return float(t)
        t += dt_check
    raise IntegrationError(f"packet still near the barrier at t={t_max}")


@dataclass
class TrajectoryRecord:
    x0: float
    t: np.ndarray
    x: np.ndarray
    classification: str
    stats: dict = field(default_factory=dict)

    @property
    def final(self):
        return float(self.x[-1])

    @property
    def transmitted(self):
        """Side of the barrier midpoint at the horizon; decides undecided paths too."""
        return bool(self.stats.get("beyond_midpoint", self.classification == "transmitted"))


def _classify(spec, x):
    if x > spec.b:
        return "transmitted"
    if x < spec.a:
        return "reflected"
    return "undecided"


def integrate_ensemble(
    packets: ChannelPackets,
    x0s,
    t0=0.0,
    t_end=None,
    rtol=1e-7,
    atol=1e-7,
    max_step=0.5,
    floor=NODE_FLOOR,
    margin=2.0,
):
    """Integrate all starting points as one vector ODE (shared sample times).

    On a node encounter the step limit is halved and the integration is
    restarted from the last accepted state; after MAX_HALVINGS consecutive
    halvings an IntegrationError carries the partial paths.
    """
    x0s = np.atleast_1d(np.asarray(x0s, dtype=float))
    if t_end is None:
        t_end = find_horizon(packets, t0, margin)

    def rhs(t, y):
        return velocity_field(packets, y, t, floor)

    ts, ys = [t0], [x0s.copy()]
    velocity_field(packets, x0s, t0, floor)  # starting points must sit on the packet
    h = max_step
    halvings = total_halvings = 0
    nfev = 0
    solver = RK45(rhs, t0, x0s, t_end, max_step=h, rtol=rtol, atol=atol)
    while ts[-1] < t_end:
        try:
            msg = solver.step()
        except NodeProximityError:
            nfev += solver.nfev
            halvings += 1
            total_halvings += 1
            if halvings > MAX_HALVINGS:
                partial = [
                    TrajectoryRecord(float(x), np.array(ts), np.array(ys)[:, i], "undecided")
                    for i, x in enumerate(x0s)
                ]
                raise IntegrationError(f"step underflow near a node at t={ts[-1]:g}", partial)
            h /= 2
            solver = RK45(rhs, ts[-1], ys[-1], t_end, max_step=h, first_step=h, rtol=rtol, atol=atol)
            continue
        if solver.status == "failed":
            raise IntegrationError(f"integrator failed: {msg}")
        halvings = 0
        ts.append(solver.t)
        ys.append(solver.y.copy())
        if h < max_step and len(ts) % 20 == 0:
            nfev += solver.nfev
            h = min(max_step, 2 * h)
            solver = RK45(rhs, ts[-1], ys[-1], t_end, max_step=h, rtol=rtol, atol=atol)
    nfev += solver.nfev
    T, Y = np.array(ts), np.array(ys)
    spec = packets.spec
    v_end = rhs(T[-1], Y[-1])
    out = []
    for i, x in enumerate(x0s):
        stats = dict(
            steps=len(T) - 1,
            halvings=total_halvings,
            nfev=nfev,
            final_velocity=float(v_end[i]),
            beyond_midpoint=bool(Y[-1, i] > spec.x_c),
        )
        out.append(TrajectoryRecord(float(x), T, Y[:, i], _classify(spec, Y[-1, i]), stats))
    return out


def integrate_trajectory(packets: ChannelPackets, x0, t0=0.0, t_end=None, **controls) -> TrajectoryRecord:
    return integrate_ensemble(packets, [x0], t0, t_end, **controls)[0]


def no_crossing_gap(records):
    """Smallest gap between neighbours (sorted by x0) over the shared sample times.

    Positive means no two paths ever crossed.
    """
    recs = sorted(records, key=lambda r: r.x0)
    X = np.array([r.x for r in recs])
    return float(np.min(np.diff(X, axis=0)))


class InitialDistribution:
    """Tail masses of rho(x, t0) over the initial packet, one panel pass plus a
    short partial integral per query."""

    def __init__(self, packets: ChannelPackets, t0=0.0, width=12.0, panel=1.0, order=30):
        s = packets.spectrum
        self.packets, self.t0, self.order = packets, t0, order
        self.lo, self.hi = s.x0 - width * s.sigma_x, s.x0 + width * s.sigma_x
        m = int(np.ceil((self.hi - self.lo) / panel))
        self.edges = np.linspace(self.lo, self.hi, m + 1)
        xs, w = panel_grid(self.lo, self.hi, self.edges[1:-1], panel, order)
        per_panel = (w * self.density(xs)).reshape(m, order).sum(axis=1)
        # tails[i] = mass above edges[i]
        self.tails = np.concatenate([np.cumsum(per_panel[::-1])[::-1], [0.0]])

    def density(self, x):
        return np.abs(self.packets.field("full", np.asarray(x, dtype=float), self.t0)[0]) ** 2

    @property
    def total(self):
        return float(self.tails[0])

    def tail(self, x):
        """integral_x^hi rho(., t0)."""
        if x <= self.lo:
            return self.total
        if x >= self.hi:
            return 0.0
        i = min(int(np.searchsorted(self.edges, x, side="right")), len(self.edges) - 1)
        right = self.edges[i]
        if right <= x:
            return float(self.tails[i])
        xs, w = panel_grid(x, right, (), right - x, self.order)
        return float(self.tails[i] + np.sum(w * self.density(xs)))

    def quantile_point(self, upper_mass):
        """x with tail(x) = upper_mass."""
        return brentq(lambda x: self.tail(x) - upper_mass, self.lo, self.hi, xtol=1e-12)


def tail_mass(packets: ChannelPackets, x, t0=0.0):
    """integral_x^inf rho(., t0) over the initial packet's support."""
    return InitialDistribution(packets, t0).tail(x)


def density_quantiles(packets: ChannelPackets, n, t0=0.0):
    """Starting points at equal-probability quantiles (i + 1/2)/n of rho(x, t0)."""
    dist = InitialDistribution(packets, t0)
    return np.array([dist.quantile_point(dist.total * (1 - (i + 0.5) / n)) for i in range(n)])


@dataclass
class CriticalPoint:
    x_star: float
    tol_x: float
    bracket: tuple
    transmission: float
    tail_mass: float
    residual: float
    tolerance: float
    rounds: int

    @property
    def satisfied(self):
        return self.residual <= self.tolerance

    def to_dict(self):
        return dict(
            x_star=self.x_star, tol_x=self.tol_x, bracket=list(self.bracket),
            transmission=self.transmission, tail_mass=self.tail_mass,
            quantile_residual=self.residual, combined_tolerance=self.tolerance, rounds=self.rounds,
        )


def find_critical_point(packets: ChannelPackets, bracket=None, tol_x=None, fan=8, t0=0.0, **controls):
    """Locate x* by multisection on the starting point: ``fan`` trajectories per round.

    Returns the midpoint of the final bracket, of width <= tol_x, together
    with the quantile-oracle residual and its combined tolerance.
    """
    s = packets.spectrum
    tol_x = tol_x if tol_x is not None else 1e-3 * s.sigma_x
    if bracket is None:
        bracket = (s.x0 - 6 * s.sigma_x, s.x0 + 6 * s.sigma_x)
    lo, hi = map(float, bracket)
    t_end = controls.pop("t_end", None)
    if t_end is None:
        t_end = find_horizon(packets, t0, controls.get("margin", 2.0))
    ends = integrate_ensemble(packets, [lo, hi], t0, t_end, **controls)
    if ends[0].transmitted == ends[1].transmitted:
        raise BracketError(f"both ends of [{lo:g}, {hi:g}] are {ends[0].classification}")
    if ends[0].transmitted:
        raise BracketError("transmitted paths must start ahead of reflected ones")
    rounds = 0
    while hi - lo > tol_x:
        xs = np.linspace(lo, hi, fan + 2)[1:-1]
        recs = integrate_ensemble(packets, xs, t0, t_end, **controls)
        fates = np.array([r.transmitted for r in recs])
        # no-crossing: fates are monotone in x0, take the first transmitted
        j = int(np.argmax(fates)) if fates.any() else len(xs)
        new_lo = xs[j - 1] if j > 0 else lo
        new_hi = xs[j] if j < len(xs) else hi
        lo, hi = new_lo, new_hi
        rounds += 1
    x_star = 0.5 * (lo + hi)
    T = packets.T_avg
    tail = tail_mass(packets, x_star, t0)
    rho_star = abs(packets.field("full", np.array([x_star]), t0)[0][0]) ** 2
    tol = rho_star * (hi - lo) + HORIZON_MASS + 1e-10
    return CriticalPoint(float(x_star), float(tol_x), (float(lo), float(hi)), float(T), tail, abs(tail - T), float(tol), rounds)


def quantile_prediction(packets: ChannelPackets, t0=0.0):
    """Starting point whose tail mass equals the packet transmission probability."""
    return InitialDistribution(packets, t0).quantile_point(packets.T_avg)


def two_step_barrier(outer_height, inner_height, outer_width, inner_width, a=0.0):
    """Symmetric barrier: outer step, inner step, inner step, outer step."""
    return make_symmetric_composite([(outer_width, outer_height), (inner_width / 2, inner_height)], a)


def equal_transmission_partner(
    reference: PotentialSpec, spectrum, outer_height, outer_width, inner_width, bracket=(0.0, 50.0), average=True
):
    """Two-step barrier whose inner height is tuned so its transmission equals the reference's.

    ``average`` matches the packet-averaged T; otherwise T at the centre
    energy k0**2.
    """
    from .stationary import scattering_amplitudes

    a = reference.x_c - outer_width - inner_width / 2

    def trans(spec):
        if average:
            return ChannelPackets(spec, spectrum).T_avg
        _, t = scattering_amplitudes(spec, spectrum.k0**2)
        return float(abs(t) ** 2)

    target = trans(reference)
    V = brentq(
        lambda v: trans(two_step_barrier(outer_height, v, outer_width, inner_width, a)) - target,
        *bracket, xtol=1e-13,
    )
    return two_step_barrier(outer_height, V, outer_width, inner_width, a)


@dataclass
class ShapePairReport:
    first: CriticalPoint
    second: CriticalPoint
    partner: PotentialSpec
    transmission_gap: float

    @property
    def separation(self):
        return abs(self.first.x_star - self.second.x_star)

    def distinct(self, factor=5.0):
        return self.separation > factor * self.first.tol_x

    def to_dict(self):
        return dict(
            first=self.first.to_dict(), second=self.second.to_dict(), partner=self.partner.to_dict(),
            transmission_gap=self.transmission_gap, separation=self.separation,
        )


def shape_pair(reference: PotentialSpec, spectrum, outer_height=1.0, outer_width=0.25, inner_width=0.5,
               average=True, tol_x=None, **controls):
    partner = equal_transmission_partner(reference, spectrum, outer_height, outer_width, inner_width, average=average)
    p1, p2 = ChannelPackets(reference, spectrum), ChannelPackets(partner, spectrum)
    c1 = find_critical_point(p1, tol_x=tol_x, **controls)
    c2 = find_critical_point(p2, tol_x=tol_x, **controls)
    return ShapePairReport(c1, c2, partner, abs(p1.T_avg - p2.T_avg))


def reference_packets(spec, k0=1.0, sigma_k=0.05, x0=-30.0, n_k=512):
    return ChannelPackets(spec, gaussian_spectrum(k0, sigma_k, n_k, x0=x0))
