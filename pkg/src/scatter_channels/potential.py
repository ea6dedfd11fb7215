"""Piecewise-constant barrier geometries.

Units throughout the package: hbar = 1 and m = 1/2, so a free particle of
wavenumber k has energy E = k**2 and group velocity 2k.

A barrier is a list of (width, height) segments starting at ``a``; the
potential vanishes outside [a, b].  Constructors build mirror-symmetric
lists by construction.  A ``PotentialSpec`` can still be made asymmetric by
hand (used for negative controls); ``is_symmetric`` reports it and the
channel decomposition refuses such specs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGeometryError


@dataclass(frozen=True)
class PotentialSpec:
    a: float
    segments: tuple[tuple[float, float], ...]
    # cumulative offsets of the right-half boundaries from x_c, filled in __post_init__
    _half_edges: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segs = tuple((float(w), float(v)) for w, v in self.segments)
        if not segs:
            raise InvalidGeometryError("at least one segment is required")
        for w, v in segs:
            if not (w > 0) or not math.isfinite(w):
                raise InvalidGeometryError(f"segment width must be positive, got {w}")
            if not math.isfinite(v):
                raise InvalidGeometryError(f"segment height must be finite, got {v}")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "_half_edges", _half_offsets(self.half_segments()))

    @property
    def widths(self):
        return np.array([w for w, _ in self.segments])

    @property
    def heights(self):
        return np.array([v for _, v in self.segments])

    @property
    def b(self):
        return self.a + math.fsum(w for w, _ in self.segments)

    @property
    def x_c(self):
        return (self.a + self.b) / 2

    @property
    def length(self):
        return self.b - self.a

    @property
    def is_symmetric(self):
        return self.segments == self.segments[::-1]

    @property
    def is_free(self):
        """True when every segment has zero height (a nominal region, no barrier)."""
        return all(v == 0.0 for _, v in self.segments)

    def boundaries(self):
        """Positions a = x_0 < x_1 < ... < x_n = b of the segment edges."""
        return self.a + np.concatenate([[0.0], np.cumsum(self.widths)])

    def half_segments(self):
        """Segments of the right half [x_c, b]; an odd middle segment is halved.

        Only meaningful for symmetric specs.
        """
        n = len(self.segments)
        right = list(self.segments[(n + 1) // 2:])
        if n % 2:
            w, v = self.segments[n // 2]
            right.insert(0, (w / 2, v))
        return right

    def height_at_offset(self, s):
        """Potential at x_c + s, looked up through |s| so mirror points agree exactly."""
        s = np.abs(np.asarray(s, dtype=float))
        heights = np.array([v for _, v in self.half_segments()] + [0.0])
        idx = np.searchsorted(self._half_edges, s, side="right") - 1
        out = np.array(heights[np.minimum(idx, len(heights) - 1)], dtype=float)
        # an exact boundary hit gets the mean of the two sides
        on_edge = np.isin(s, self._half_edges[1:])
        if np.any(on_edge):
            j = np.searchsorted(self._half_edges, s[on_edge], side="left")
            out[on_edge] = 0.5 * (heights[j - 1] + heights[j])
        return out

    def potential_at(self, x):
        """V(x) from the segment list (boundary points take the two-sided mean)."""
        x = np.asarray(x, dtype=float)
        edges = self.boundaries()
        vals = np.concatenate([[0.0], self.heights, [0.0]])
        right = np.searchsorted(edges, x, side="right")
        left = np.searchsorted(edges, x, side="left")
        return 0.5 * (vals[left] + vals[right])

    def with_heights(self, heights):
        return PotentialSpec(self.a, tuple(zip(self.widths, heights)))

    def shifted(self, dv):
        """Copy with ``dv`` added to every segment height (the barrier region only)."""
        return PotentialSpec(self.a, tuple((w, v + dv) for w, v in self.segments))

    def to_dict(self):
        return {"a": self.a, "segments": [[w, v] for w, v in self.segments]}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj):
        try:
            a = obj["a"]
            segs = [(w, v) for w, v in obj["segments"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidGeometryError(f"malformed barrier object: {exc}") from exc
        return cls(a, tuple(segs))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _half_offsets(half):
    return np.concatenate([[0.0], np.cumsum([w for w, _ in half])])


def make_rectangular(V0, d, a=0.0):
    """Single rectangular barrier of height V0 on [a, a + d]."""
    if not d > 0:
        raise InvalidGeometryError(f"barrier width must be positive, got {d}")
    return PotentialSpec(a, ((d, V0),))


def make_symmetric_composite(half_segments, a=0.0):
    """Mirror a left-half segment list into a symmetric barrier starting at ``a``."""
    half = [(float(w), float(v)) for w, v in half_segments]
    if not half:
        raise InvalidGeometryError("half segment list is empty")
    return PotentialSpec(a, tuple(half + half[::-1]))


def sample_symmetric_function(f, d, n, a=0.0):
    """Staircase approximation of a barrier profile on [a, a + d] with ``n`` steps.

    ``f`` is either a callable evaluated at the step midpoints or the ``n``
    midpoint values themselves.  Mirror pairs are averaged so the result is
    exactly symmetric even if ``f`` is only approximately even.
    """
    if n < 2 or n % 2:
        raise InvalidGeometryError(f"step count must be even and >= 2, got {n}")
    if not d > 0:
        raise InvalidGeometryError(f"barrier width must be positive, got {d}")
    w = d / n
    if callable(f):
        mids = a + (np.arange(n) + 0.5) * w
        vals = np.asarray([f(x) for x in mids], dtype=float)
    else:
        vals = np.asarray(f, dtype=float)
        if vals.shape != (n,):
            raise InvalidGeometryError(f"expected {n} midpoint values, got shape {vals.shape}")
    sym = 0.5 * (vals + vals[::-1])
    # average is commutative, but make mirror entries bitwise identical anyway
    sym[n // 2:] = sym[: n // 2][::-1]
    return PotentialSpec(a, tuple((w, float(v)) for v in sym))
