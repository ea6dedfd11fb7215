"""Stationary scattering states and the transmission/reflection channel split.

Inside a segment of height V the solution is propagated in (psi, psi')
form with the real 2x2 matrix

    [[cos(q s),      sin(q s)/q],
     [-q sin(q s),   cos(q s)  ]],      q**2 = E - V,

which is analytic in q**2, so the threshold case E == V (basis {1, x})
needs no special treatment beyond q**2 == 0, and evanescent segments
(q**2 < 0) become cosh/sinh.  In the asymptotic regions a state is
c_plus*exp(ikx) + c_minus*exp(-ikx) in absolute coordinates.

Every routine accepts a scalar energy or a 1-D array of energies.

Channel construction (symmetric barriers only): ``u`` is the real odd
solution with u(x_c) = 0, u'(x_c) = 1, whose left asymptote is
alpha*exp(ikx) + conj(alpha)*exp(-ikx).  With C = r / conj(alpha),

    Psi_ref = C * u,   Psi_tr = Psi_full - Psi_ref,

so Psi_ref reflects exactly r and Psi_tr has no left-moving wave on the left.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetricPotentialError,
    DegenerateOddSolutionError,
    OpacityOverflowError,
    UnsupportedEnergyError,
)
from .potential import PotentialSpec

OPACITY_LIMIT = 300.0


def _prop(q2, s):
    """(cos(qs), sin(qs)/q, q sin(qs)) for q**2 = q2, broadcasting q2 against s."""
    q2, s = np.broadcast_arrays(np.asarray(q2, dtype=float), np.asarray(s, dtype=float))
    c = np.ones(q2.shape)
    sk = np.array(s, dtype=float)
    ks = np.zeros(q2.shape)
    osc = q2 > 0
    if np.any(osc):
        q = np.sqrt(q2[osc])
        qs = q * s[osc]
        c[osc] = np.cos(qs)
        sk[osc] = np.sin(qs) / q
        ks[osc] = q * np.sin(qs)
    ev = q2 < 0
    if np.any(ev):
        p = np.sqrt(-q2[ev])
        ps = p * s[ev]
        c[ev] = np.cosh(ps)
        sk[ev] = np.sinh(ps) / p
        ks[ev] = -p * np.sinh(ps)
    return c, sk, ks


def _step(q2, s, W):
    """Carry (psi, psi') stacked on the last axis of W across a distance s."""
    c, sk, ks = _prop(q2, s)
    psi, dpsi = W[..., 0], W[..., 1]
    return np.stack([c * psi + sk * dpsi, -ks * psi + c * dpsi], axis=-1)


def _check_energy(spec, E):
    E = np.atleast_1d(np.asarray(E, dtype=float))
    if E.ndim != 1:
        raise UnsupportedEnergyError("energies must be a scalar or a 1-D array")
    if not np.all(E > 0) or not np.all(np.isfinite(E)):
        raise UnsupportedEnergyError(f"energy must be positive and finite, got min {E.min()}")
    depth = np.clip(spec.heights[None, :] - E[:, None], 0.0, None)
    opacity = float(np.max(np.sqrt(depth) @ spec.widths))
    if opacity > OPACITY_LIMIT:
        raise OpacityOverflowError(opacity, OPACITY_LIMIT)
    return E


def _sweep(spec, E, x0, W0):
    """Edge values (psi, psi') at every segment boundary, starting from x0.

    Returns an array of shape (n_E, n_edges, 2).
    """
    X = spec.boundaries()
    n = len(X) - 1
    q2seg = E[:, None] - spec.heights[None, :]
    out = np.empty((len(E), n + 1, 2), dtype=complex)
    i0 = int(np.searchsorted(X, x0, side="left"))

    def q2_of(seg):
        return q2seg[:, seg] if 0 <= seg < n else E

    W, x = W0, x0
    for i in range(i0, n + 1):
        W = _step(q2_of(i - 1), X[i] - x, W)
        x = X[i]
        out[:, i] = W
    W, x = W0, x0
    for i in range(i0 - 1, -1, -1):
        W = _step(q2_of(i), X[i] - x, W)
        x = X[i]
        out[:, i] = W
    return out


def _to_plane(W, k, x):
    """Absolute-coordinate plane-wave coefficients (c_plus, c_minus) from (psi, psi') at x."""
    psi, dpsi = W[..., 0], W[..., 1]
    d = dpsi / (1j * k)
    return 0.5 * (psi + d) * np.exp(-1j * k * x), 0.5 * (psi - d) * np.exp(1j * k * x)


class StationaryState:
    """A solution at one energy (or a batch of energies) on a fixed barrier.

    Stored as (psi, psi') at each segment boundary; ``edges`` has shape
    (n_E, n_edges, 2).  Scalar-energy states return scalar-shaped results.
    """

    def __init__(self, spec, E, edges, scalar=None):
        self.spec = spec
        self.E = np.atleast_1d(np.asarray(E, dtype=float))
        self.k = np.sqrt(self.E)
        self.edges = np.asarray(edges, dtype=complex)
        self.scalar = self.E.shape == (1,) if scalar is None else scalar

    def _out(self, arr):
        return arr[0] if self.scalar else arr

    # linear combinations share the geometry and energy grid
    def _compatible(self, other):
        if other.spec != self.spec or not np.array_equal(other.E, self.E):
            raise ValueError("states live on different barriers or energy grids")

    def __add__(self, other):
        self._compatible(other)
        return StationaryState(self.spec, self.E, self.edges + other.edges, self.scalar)

    def __sub__(self, other):
        self._compatible(other)
        return StationaryState(self.spec, self.E, self.edges - other.edges, self.scalar)

    def scaled(self, factor):
        factor = np.atleast_1d(np.asarray(factor, dtype=complex))
        return StationaryState(self.spec, self.E, self.edges * factor[:, None, None], self.scalar)

    @property
    def left_coefficients(self):
        """(c_plus, c_minus) of the left asymptote, absolute coordinates."""
        cp, cm = _to_plane(self.edges[:, 0], self.k, self.spec.a)
        return self._out(cp), self._out(cm)

    @property
    def right_coefficients(self):
        cp, cm = _to_plane(self.edges[:, -1], self.k, self.spec.b)
        return self._out(cp), self._out(cm)

    def coefficients(self):
        """Per-region (c_plus, c_minus, kappa) triples, left asymptote first.

        Asymptotic regions use absolute coordinates.  Segment j uses the local
        coordinate s = x - x_j with kappa = sqrt(E - V_j) (imaginary below the
        top); exactly at threshold kappa = 0 and the pair is (psi, psi') of
        the linear solution psi + psi' * s.
        """
        X = self.spec.boundaries()
        regions = [(*self.left_coefficients, self._out(self.k.astype(complex)))]
        for j, V in enumerate(self.spec.heights):
            kappa = np.sqrt((self.E - V).astype(complex))
            W = self.edges[:, j]
            with np.errstate(divide="ignore", invalid="ignore"):
                d = np.where(kappa != 0, W[:, 1] / (1j * kappa), 0)
            cp = np.where(kappa != 0, 0.5 * (W[:, 0] + d), W[:, 0])
            cm = np.where(kappa != 0, 0.5 * (W[:, 0] - d), W[:, 1])
            regions.append((self._out(cp), self._out(cm), self._out(kappa)))
        regions.append((*self.right_coefficients, self._out(self.k.astype(complex))))
        return regions

    def _locate(self, x):
        X = self.spec.boundaries()
        n = len(X) - 1
        # region r: 0 = left asymptote, 1..n = segments, n+1 = right asymptote
        reg = np.searchsorted(X, x, side="left")
        base = np.clip(reg - 1, 0, n)
        base = np.where(reg == 0, 0, base)
        V = np.concatenate([[0.0], self.spec.heights, [0.0]])[reg]
        return base, V, x - X[base]

    def field(self, x):
        """psi and psi' at positions x; shape (n_E, *x.shape) for batches."""
        x = np.asarray(x, dtype=float)
        base, V, s = self._locate(x.ravel())
        q2 = self.E[:, None] - V[None, :]
        c, sk, ks = _prop(q2, s[None, :])
        W = self.edges[:, base]
        psi = c * W[..., 0] + sk * W[..., 1]
        dpsi = -ks * W[..., 0] + c * W[..., 1]
        shape = (len(self.E),) + x.shape
        return self._out(psi.reshape(shape)), self._out(dpsi.reshape(shape))

    def evaluate(self, x):
        return self.field(x)[0]

    def derivative(self, x):
        return self.field(x)[1]

    def current(self, x):
        psi, dpsi = self.field(x)
        return current_density(psi, dpsi)


def current_density(psi, dpsi):
    """J = 2 Im(conj(psi) psi') (hbar = 1, m = 1/2): a unit exp(ikx) carries 2k."""
    return 2.0 * np.imag(np.conj(psi) * dpsi)


def transfer_matrix(spec: PotentialSpec, E):
    """Map left-asymptote (c_plus, c_minus) to right-asymptote coefficients.

    Shape (2, 2) for a scalar energy, (n_E, 2, 2) for an array.  The matrix
    is unimodular because both asymptotes share the wavenumber k.
    """
    scalar = np.ndim(E) == 0
    E = _check_energy(spec, E)
    k = np.sqrt(E)
    X = spec.boundaries()
    S = np.broadcast_to(np.eye(2), (len(E), 2, 2)).copy()
    for j, (w, V) in enumerate(spec.segments):
        c, sk, ks = _prop(E - V, w)
        seg = np.stack([np.stack([c, sk], -1), np.stack([-ks, c], -1)], -2)
        S = seg @ S

    def P(x):
        e = np.exp(1j * k * x)
        return np.stack([np.stack([e, 1 / e], -1), np.stack([1j * k * e, -1j * k / e], -1)], -2)

    M = np.linalg.solve(P(spec.b), S @ P(spec.a))
    return M[0] if scalar else M


def full_state(spec: PotentialSpec, E) -> StationaryState:
    """Left-incident scattering state: exp(ikx) + r exp(-ikx) on the left, t exp(ikx) on the right."""
    scalar = np.ndim(E) == 0
    E = _check_energy(spec, E)
    k = np.sqrt(E)
    e = np.exp(1j * k * spec.b)
    W0 = np.stack([e, 1j * k * e], axis=-1)
    edges = _sweep(spec, E, spec.b, W0)
    A, _ = _to_plane(edges[:, 0], k, spec.a)
    return StationaryState(spec, E, edges / A[:, None, None], scalar)


def scattering_amplitudes(spec: PotentialSpec, E):
    """(r, t) for unit-amplitude incidence from the left."""
    psi = full_state(spec, E)
    _, r = psi.left_coefficients
    t, _ = psi.right_coefficients
    return r, t


def centered_amplitudes(spec: PotentialSpec, E):
    """(r, t) with the phase origin moved to the midpoint x_c.

    Incidence exp(ik(x - x_c)) instead of exp(ikx); only r changes, by
    exp(-2ik x_c).  In this convention a symmetric barrier gives
    Re(r conj(t)) = 0.
    """
    r, t = scattering_amplitudes(spec, E)
    return r * np.exp(-2j * np.sqrt(E) * spec.x_c), t


def phase_relation_residual(spec: PotentialSpec, E):
    """Re(r conj(t)) for midpoint-referenced amplitudes."""
    r, t = centered_amplitudes(spec, E)
    return np.real(r * np.conj(t))


def odd_basis_solution(spec: PotentialSpec, E, *, mirror=True) -> StationaryState:
    """Real solution with u(x_c) = 0 and u'(x_c) = 1.

    For symmetric barriers the left half is the exact mirror image
    u(x_c - d) = -u(x_c + d) of the right half.  ``mirror=False`` instead
    integrates through the actual left segments, which is the only option
    for asymmetric barriers (used by the identity diagnostics).
    """
    scalar = np.ndim(E) == 0
    E = _check_energy(spec, E)
    W0 = np.tile(np.array([0.0, 1.0], dtype=complex), (len(E), 1))
    if not mirror:
        edges = _sweep(spec, E, spec.x_c, W0)
        return StationaryState(spec, E, edges.real.astype(complex), scalar)
    if not spec.is_symmetric:
        raise AsymmetricPotentialError()
    half = spec.half_segments()
    n = len(spec.segments)
    right = [W0]
    W = W0
    for w, V in half:
        W = _step(E - V, w, W)
        right.append(W)
    right = np.stack(right, axis=1).real
    mirrored = np.stack([-right[..., 0], right[..., 1]], axis=-1)[:, ::-1]
    if n % 2:
        # x_c sits inside the middle segment and is not an edge
        edges = np.concatenate([mirrored[:, :-1], right[:, 1:]], axis=1)
    else:
        edges = np.concatenate([mirrored[:, :-1], right], axis=1)
    return StationaryState(spec, E, edges.astype(complex), scalar)


def odd_alpha(u: StationaryState):
    """alpha in u = alpha exp(ikx) + conj(alpha) exp(-ikx) on the left."""
    cp, _ = _to_plane(u.edges[:, 0].real.astype(complex), u.k, u.spec.a)
    return u._out(cp)


@dataclass
class ChannelDecomposition:
    """Psi_full = Psi_tr + Psi_ref at one energy (or a batch of energies)."""

    spec: PotentialSpec
    E: np.ndarray
    r: np.ndarray
    t: np.ndarray
    alpha: np.ndarray
    C: np.ndarray
    psi_full: StationaryState
    psi_tr_solution: StationaryState
    psi_ref_solution: StationaryState
    odd: StationaryState

    @property
    def k(self):
        return np.sqrt(self.E)

    @property
    def T(self):
        return np.abs(self.t) ** 2

    @property
    def R(self):
        return np.abs(self.r) ** 2

    @property
    def A_ref_in(self):
        return self.C * self.alpha

    @property
    def A_tr_in(self):
        return 1.0 - self.C * self.alpha

    def clip(self):
        return clip_channels(self)


def decompose(spec: PotentialSpec, E) -> ChannelDecomposition:
    if not spec.is_symmetric:
        raise AsymmetricPotentialError()
    psi = full_state(spec, E)
    u = odd_basis_solution(spec, E)
    alpha = np.atleast_1d(odd_alpha(u))
    # |alpha| = 0 would force u = u' = 0 at a, i.e. u == 0; guard anyway
    scale = np.abs(u.edges[:, 0]).max(axis=-1)
    if np.any(np.abs(alpha) <= 1e-300 + 1e-14 * scale):
        raise DegenerateOddSolutionError("odd solution has no asymptotic amplitude")
    r = np.atleast_1d(psi.left_coefficients[1])
    t = np.atleast_1d(psi.right_coefficients[0])
    C = r / np.conj(alpha)
    ref = u.scaled(C)
    tr = psi - ref
    out = psi._out
    return ChannelDecomposition(spec, out(psi.E), out(r), out(t), out(alpha), out(C), psi, tr, ref, u)


class ClippedState:
    """Channel function glued at x_c: ``left`` for x <= x_c, ``right`` beyond (None = 0)."""

    def __init__(self, left: StationaryState, right: StationaryState | None):
        self.left = left
        self.right = right
        self.spec = left.spec
        self.E = left.E
        self.k = left.k
        self.scalar = left.scalar

    def field(self, x, side=None):
        """psi, psi'; ``side`` ('left'/'right') forces one branch, for one-sided limits."""
        x = np.asarray(x, dtype=float)
        pl, dl = self.left.field(x)
        if self.right is None:
            pr = dr = np.zeros_like(pl)
        else:
            pr, dr = self.right.field(x)
        if side == "left":
            return pl, dl
        if side == "right":
            return pr, dr
        mask = x <= self.spec.x_c
        return np.where(mask, pl, pr), np.where(mask, dl, dr)

    def evaluate(self, x, side=None):
        return self.field(x, side)[0]

    def current(self, x, side=None):
        return current_density(*self.field(x, side))


def clip_channels(dec: ChannelDecomposition):
    """(psi_tr, psi_ref): psi_ref vanishes beyond x_c, psi_tr equals Psi_full there."""
    psi_tr = ClippedState(dec.psi_tr_solution, dec.psi_full)
    psi_ref = ClippedState(dec.psi_ref_solution, None)
    return psi_tr, psi_ref


def amplitude_identity_residual(spec: PotentialSpec, E):
    """|1 - r alpha/conj(alpha)|**2 - (1 - |r|**2).

    Zero for symmetric barriers; ``alpha`` is taken from the odd-at-midpoint
    solution integrated through the actual segments, so the same quantity is
    defined (and generally nonzero) for asymmetric barriers too.
    """
    r, _ = scattering_amplitudes(spec, E)
    u = odd_basis_solution(spec, E, mirror=False)
    alpha = odd_alpha(u)
    return np.abs(1 - r * alpha / np.conj(alpha)) ** 2 - (1 - np.abs(r) ** 2)
