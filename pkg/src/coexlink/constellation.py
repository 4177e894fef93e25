"""Square-QAM constellation geometry.

Unit-average-power point sets, nearest-neighbor search, axis-aligned decision
regions, and the boundary/interior split of points with respect to the convex
hull. These feed both the blind amplitude heuristic and its analytic
distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InputError

SUPPORTED_ORDERS = (4, 16, 64)


@dataclass(frozen=True)
class DecisionRegion:
    """Signed offsets of a point's decision-region edges, unbounded sides are +-inf.

    d_lr/d_ur bound the in-phase axis, d_li/d_ui the quadrature axis; the
    owning point sits strictly inside (d_lr < 0 < d_ur, d_li < 0 < d_ui).
    """

    d_lr: float
    d_ur: float
    d_li: float
    d_ui: float

    def contains(self, offset: complex) -> bool:
        """Whether a point at complex `offset` from the owner lies in the region.

        Closed regions: exact shared boundaries are inside both adjacent
        regions, and lowest-index precedence matches the nearest-neighbor
        tie rule.
        """
        return (
            self.d_lr <= offset.real <= self.d_ur
            and self.d_li <= offset.imag <= self.d_ui
        )


@dataclass(frozen=True)
class Constellation:
    """Immutable square-QAM constellation normalized to unit average power.

    Point ordering is row-major over the I/Q lattice, most negative first,
    so indices are stable across runs. `boundary` marks points on the convex
    hull (the outer ring); everything else is interior.
    """

    order: int
    points: np.ndarray          # complex, shape (order,)
    d_c: float                  # minimum pairwise distance
    boundary: np.ndarray        # bool, shape (order,)
    regions: tuple[DecisionRegion, ...]
    # per-axis lattice levels, ascending; used by the O(1) nearest-point path
    levels: np.ndarray = field(repr=False, default=None)

    @property
    def boundary_set(self) -> frozenset:
        return frozenset(np.flatnonzero(self.boundary).tolist())

    @property
    def interior_set(self) -> frozenset:
        return frozenset(np.flatnonzero(~self.boundary).tolist())

    @property
    def side(self) -> int:
        return int(round(math.sqrt(self.order)))

    def scaled(self, alpha: float) -> "Constellation":
        """Copy with all geometry scaled by alpha > 0 (for covariance tests)."""
        if alpha <= 0:
            raise InputError("scale factor must be positive")
        regions = tuple(
            DecisionRegion(r.d_lr * alpha, r.d_ur * alpha, r.d_li * alpha, r.d_ui * alpha)
            for r in self.regions
        )
        return Constellation(self.order, self.points * alpha, self.d_c * alpha,
                             self.boundary, regions, self.levels * alpha)


def build_qam(order: int) -> Constellation:
    """Build a unit-power square QAM constellation (order 4, 16 or 64)."""
    if order not in SUPPORTED_ORDERS:
        raise ConfigurationError(f"unsupported QAM order {order}; expected one of {SUPPORTED_ORDERS}")
    m = int(round(math.sqrt(order)))
    raw_levels = np.arange(-(m - 1), m, 2, dtype=float)
    norm = math.sqrt(np.mean((raw_levels[:, None] ** 2 + raw_levels[None, :] ** 2)))
    levels = raw_levels / norm
    re, im = np.meshgrid(levels, levels, indexing="xy")
    points = (re + 1j * im).ravel()  # row-major: imag rows ascending, real within row

    # exact lattice step; equals the brute-force pairwise minimum to the ulp
    d_c = float(levels[1] - levels[0]) if m > 1 else math.inf

    col = np.arange(order) % m
    row = np.arange(order) // m
    boundary = (col == 0) | (col == m - 1) | (row == 0) | (row == m - 1)

    half = d_c / 2.0
    regions = []
    for i in range(order):
        regions.append(DecisionRegion(
            d_lr=-half if col[i] > 0 else -math.inf,
            d_ur=half if col[i] < m - 1 else math.inf,
            d_li=-half if row[i] > 0 else -math.inf,
            d_ui=half if row[i] < m - 1 else math.inf,
        ))
    return Constellation(order, points, d_c, boundary, tuple(regions), levels)


def nearest_neighbor(y: complex, c: Constellation) -> tuple[int, float]:
    """Nearest constellation point to y; ties broken toward the lowest index."""
    y = complex(y)
    if not (math.isfinite(y.real) and math.isfinite(y.imag)):
        raise InputError("received symbol must be finite")
    d = np.abs(y - c.points)
    idx = int(np.argmin(d))  # argmin returns the first (lowest) index on ties
    return idx, float(d[idx])


def nearest_distances(y: np.ndarray, c: Constellation) -> np.ndarray:
    """Exact brute-force nearest-neighbor distances for an array of symbols."""
    y = np.asarray(y)
    d = np.abs(y[..., None] - c.points)
    return d.min(axis=-1)


def nearest_lattice(y: np.ndarray, c: Constellation) -> tuple[np.ndarray, np.ndarray]:
    """O(1)-per-symbol nearest point via per-axis lattice rounding.

    Equivalent to brute force for square QAM (up to measure-zero midpoint
    ties); used on large grids where the brute-force scan is the bottleneck.
    Returns (indices, distances).
    """
    y = np.asarray(y)
    m = c.side
    step = float(c.levels[1] - c.levels[0]) if m > 1 else 1.0
    lo = float(c.levels[0])
    ci = np.clip(np.rint((y.real - lo) / step), 0, m - 1).astype(np.intp)
    cq = np.clip(np.rint((y.imag - lo) / step), 0, m - 1).astype(np.intp)
    idx = cq * m + ci
    dist = np.abs(y - c.points[idx])
    return idx, dist


def decision_region(index: int, c: Constellation) -> DecisionRegion:
    """Decision region of the point at `index`."""
    return c.regions[index]


def region_index_of(y: complex, c: Constellation) -> int:
    """Lowest point index whose (closed) decision region contains y."""
    for i, p in enumerate(c.points):
        if c.regions[i].contains(complex(y) - p):
            return i
    # the uniform-step regions can miss y by an ulp where the float lattice
    # spacing is not exactly uniform; resolve those slivers like the search
    return nearest_neighbor(y, c)[0]
