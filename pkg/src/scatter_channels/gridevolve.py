"""Independent grid evolver for Psi_full, used only to cross-check synthesis.

Space: continuous Galerkin spectral elements on Gauss-Lobatto-Legendre
nodes, with element edges placed on every potential jump so that each
element sees a constant V.  The semi-discrete problem is

    i M dpsi/dt = (K + M V) psi,   psi = 0 at the two domain ends,

with M the (diagonal, GLL-lumped) mass matrix and K the stiffness matrix
of -d2/dx2.  Finite differences lose their order at a step in V; element
edges on the jumps keep the discretization spectrally accurate.

Time: the (2,2) Pade approximant of exp(-i dt M^-1 H), unitary in the
M-weighted norm and fourth order.  Its rational form factors into two
shifted solves,

    (Z - d_j M) y = (Z - n_j M) psi,   Z = -i dt H,
    d_j = 3 +- i sqrt(3),  n_j = -conj(d_j),

each of which preserves the discrete norm on its own.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import legendre
from scipy.sparse import coo_matrix, diags
from scipy.sparse.linalg import splu

from .errors import DiscretizationError
from .packets import WavePacketField

# accuracy budget: points per wavelength and E*dt
MIN_POINTS_PER_WAVELENGTH = 6.0
MAX_E_DT = 0.6


def free_gaussian(x, t, k0, sigma_x, x0):
    """Closed-form free Gaussian, i psi_t = -psi_xx, centred at x0 at t = 0."""
    x = np.asarray(x, dtype=float)
    s = 1 + 1j * t / sigma_x**2
    env = np.exp(-((x - x0 - 2 * k0 * t) ** 2) / (4 * sigma_x**2 * s))
    return (2 * np.pi * sigma_x**2) ** -0.25 * s**-0.5 * env * np.exp(1j * k0 * (x - x0) - 1j * k0**2 * t)


def gll(order):
    """GLL nodes, weights and differentiation matrix on [-1, 1] (order+1 points)."""
    n = order
    PN = legendre.Legendre.basis(n)
    z = np.concatenate([[-1.0], np.sort(PN.deriv().roots().real), [1.0]])
    pz = PN(z)
    w = 2.0 / (n * (n + 1) * pz**2)
    D = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        for j in range(n + 1):
            if i != j:
                D[i, j] = pz[i] / (pz[j] * (z[i] - z[j]))
    D[0, 0] = -n * (n + 1) / 4
    D[n, n] = n * (n + 1) / 4
    return z, w, D


class SpectralElementGrid:
    """Node positions, lumped weights and operators on [lo, hi]."""

    def __init__(self, lo, hi, breakpoints=(), h=1.0, order=12):
        cuts = sorted({float(lo), float(hi), *(float(b) for b in breakpoints if lo < b < hi)})
        edges = [cuts[0]]
        for left, right in zip(cuts[:-1], cuts[1:]):
            m = max(1, int(np.ceil((right - left) / h)))
            edges.extend(np.linspace(left, right, m + 1)[1:])
        self.edges = np.asarray(edges)
        self.order = order
        z, w, D = gll(order)
        n_el = len(self.edges) - 1
        n_nodes = n_el * order + 1
        x = np.empty(n_nodes)
        mass = np.zeros(n_nodes)
        self._w = w
        rows, cols, vals = [], [], []
        for e in range(n_el):
            a, b = self.edges[e], self.edges[e + 1]
            J = 0.5 * (b - a)
            idx = e * order + np.arange(order + 1)
            x[idx] = a + J * (z + 1)
            mass[idx] += J * w
            Ke = (D.T * w) @ D / J
            rows.append(np.repeat(idx, order + 1))
            cols.append(np.tile(idx, order + 1))
            vals.append(Ke.ravel())
        self.x = x
        self.mass = mass
        self.K = coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n_nodes, n_nodes)
        ).tocsc()

    def lumped(self, per_element):
        """Diagonal of the lumped matrix of a function constant on each element."""
        out = np.zeros_like(self.x)
        order = self.order
        for e, v in enumerate(per_element):
            J = 0.5 * (self.edges[e + 1] - self.edges[e])
            out[e * order: (e + 1) * order + 1] += v * J * self._w
        return out

    @property
    def max_spacing(self):
        return float(np.max(np.diff(self.x)))

    def interior(self):
        return slice(1, len(self.x) - 1)

    def integrate(self, f):
        return np.sum(self.mass * f)


class GridEvolver:
    def __init__(self, spec, grid: SpectralElementGrid, dt, k_max=None):
        self.grid, self.dt = grid, float(dt)
        v_el = np.zeros(len(grid.edges) - 1) if spec is None else _element_heights(spec, grid)
        self.mass_v = grid.lumped(v_el)
        if k_max is not None:
            per_wavelength = 2 * np.pi / (k_max * grid.max_spacing)
            if per_wavelength < MIN_POINTS_PER_WAVELENGTH:
                raise DiscretizationError(
                    f"{per_wavelength:.3g} nodes per wavelength, need {MIN_POINTS_PER_WAVELENGTH}"
                )
            e_max = k_max**2 + max(0.0, float(v_el.max()))
            if e_max * self.dt > MAX_E_DT:
                raise DiscretizationError(f"E_max*dt = {e_max * self.dt:.3g} exceeds {MAX_E_DT}")
        inner = grid.interior()
        M = diags(grid.mass[inner])
        H = grid.K[inner][:, inner] + diags(self.mass_v[inner])
        Z = (-1j * self.dt) * H
        self._factors = []
        for d in (3 + 1j * np.sqrt(3), 3 - 1j * np.sqrt(3)):
            n = -np.conj(d)
            self._factors.append((splu((Z - d * M).tocsc()), (Z - n * M).tocsr()))

    def step(self, psi, steps=1):
        psi = np.array(psi, dtype=complex)
        inner = self.grid.interior()
        u = psi[inner]
        for _ in range(steps):
            for lu, rhs in self._factors:
                u = lu.solve(rhs @ u)
        psi[inner] = u
        psi[0] = psi[-1] = 0.0
        return psi

    def norm(self, psi):
        return float(self.grid.integrate(np.abs(psi) ** 2))


def _element_heights(spec, grid):
    mids = 0.5 * (grid.edges[:-1] + grid.edges[1:])
    return spec.potential_at(mids)


def reference_grid(spec, x_domain, h=1.0, order=12):
    lo, hi = x_domain
    breaks = [] if spec is None else list(spec.boundaries())
    return SpectralElementGrid(lo, hi, breaks, h, order)


def grid_evolve_oracle(initial: WavePacketField, spec, dt, steps, grid=None, k_max=None) -> WavePacketField:
    """Evolve a field sampled on the nodes of ``grid`` by ``steps`` steps of ``dt``.

    Without ``grid`` the field's own x must be the nodes of a default
    reference grid over its range.
    """
    grid = grid or reference_grid(spec, (initial.x[0], initial.x[-1]))
    if grid.x.shape != initial.x.shape or not np.allclose(grid.x, initial.x):
        raise DiscretizationError("initial field is not sampled on the evolver's nodes")
    ev = GridEvolver(spec, grid, dt, k_max)
    psi = ev.step(initial.values, steps)
    return WavePacketField(initial.x, initial.t + steps * dt, psi, initial.channel)


def l2_distance(f, g, weights):
    """sqrt(sum w |f - g|**2): the discrete L2 norm of a difference."""
    return float(np.sqrt(np.sum(weights * np.abs(np.asarray(f) - np.asarray(g)) ** 2)))
