"""Composite Gauss-Legendre rules in x with panels aligned to kinks."""

import numpy as np


def panel_grid(lo, hi, breakpoints=(), panel=2.0, order=20):
    """Nodes and weights of a composite Gauss-Legendre rule on [lo, hi].

    Every breakpoint inside (lo, hi) is a panel edge, so integrands that are
    only piecewise smooth (segment edges, the clipping point x_c) are still
    integrated to spectral accuracy.
    """
    if not hi > lo:
        raise ValueError("empty integration interval")
    cuts = sorted({lo, hi, *(float(b) for b in breakpoints if lo < b < hi)})
    t, w = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for left, right in zip(cuts[:-1], cuts[1:]):
        m = max(1, int(np.ceil((right - left) / panel)))
        edges = np.linspace(left, right, m + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        xs.append((mid[:, None] + half[:, None] * t[None, :]).ravel())
        ws.append((half[:, None] * w[None, :]).ravel())
    return np.concatenate(xs), np.concatenate(ws)


def gauss_legendre(lo, hi, n):
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (t + 1.0), half * w
