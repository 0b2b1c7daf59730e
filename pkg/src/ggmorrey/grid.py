"""Bounded domains, cell grids, balls and midpoint quadrature.

Every norm and operator in the package is evaluated on a :class:`Grid`: a
finite list of cells, each represented by its center and its measure.
Integrals are midpoint sums and a cell belongs to a ball exactly when its
center does.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Domain",
    "Grading",
    "Grid",
    "GridFunction",
    "Ball",
    "BallFamily",
    "make_grid",
    "integrate",
    "ball_measure",
    "intersected_measure",
    "ball_mask",
    "default_ball_family",
]

UNIT_BALL_VOLUME = {1: 2.0, 2: math.pi}


def _freeze(arr):
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Domain:
    """A bounded open set given as a finite union of disjoint open boxes.

    ``boxes`` holds one tuple of per-axis ``(a, b)`` intervals per box.
    """

    boxes: tuple

    def __post_init__(self):
        if not self.boxes:
            raise ValueError("domain needs at least one box")
        boxes = tuple(tuple((float(a), float(b)) for a, b in box) for box in self.boxes)
        dims = {len(box) for box in boxes}
        if len(dims) != 1:
            raise ValueError("all boxes must have the same dimension")
        dim = dims.pop()
        if dim not in UNIT_BALL_VOLUME:
            raise ValueError(f"dimension must be 1 or 2, got {dim}")
        for box in boxes:
            for a, b in box:
                if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
                    raise ValueError(f"degenerate axis interval ({a}, {b})")
        for b1, b2 in itertools.combinations(boxes, 2):
            if all(max(a1, a2) < min(c1, c2) for (a1, c1), (a2, c2) in zip(b1, b2)):
                raise ValueError("boxes must be disjoint")
        object.__setattr__(self, "boxes", boxes)

    @classmethod
    def interval(cls, a, b):
        return cls((((a, b),),))

    @classmethod
    def box(cls, bounds):
        return cls((tuple(bounds),))

    @property
    def dim(self):
        return len(self.boxes[0])

    @property
    def measure(self):
        return float(sum(math.prod(b - a for a, b in box) for box in self.boxes))

    @property
    def diameter(self):
        # the diameter of a union of boxes is attained between two corners
        corners = np.array(
            [c for box in self.boxes for c in itertools.product(*box)], dtype=float
        )
        diff = corners[:, None, :] - corners[None, :, :]
        return float(np.sqrt((diff**2).sum(axis=-1)).max())

    def contains(self, points, closed=False):
        """Boolean mask of points lying in the open set (or its closure)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[-1] != self.dim:
            pts = pts.reshape(-1, self.dim)
        inside = np.zeros(len(pts), dtype=bool)
        for box in self.boxes:
            lo = np.array([a for a, _ in box])
            hi = np.array([b for _, b in box])
            if closed:
                inside |= np.all((pts >= lo) & (pts <= hi), axis=1)
            else:
                inside |= np.all((pts > lo) & (pts < hi), axis=1)
        return inside


@dataclass(frozen=True)
class Grading:
    """Geometric refinement of the cells touching ``point``.

    The cell adjacent to the point is cut at distances ``w * ratio**k``
    (k = 1..levels) from it, so the nearest cell width shrinks by ``ratio``
    per level. Each resulting shell, and the innermost piece, is split into
    ``subdivisions`` equal cells.
    """

    point: tuple
    levels: int = 12
    ratio: float = 0.5
    subdivisions: int = 4

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(c) for c in np.atleast_1d(self.point)))
        if self.levels < 0:
            raise ValueError("grading levels must be nonnegative")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("grading ratio must lie in (0, 1)")
        if self.subdivisions < 1:
            raise ValueError("grading subdivisions must be positive")


class Grid:
    """Cells of a domain: centers ``(N, n)``, measures ``(N,)``, nominal width ``h``.

    In one dimension cells are stored sorted by center.
    """

    def __init__(self, domain, centers, measures, h, uniform):
        self.domain = domain
        self.centers = _freeze(np.asarray(centers, dtype=float).reshape(-1, domain.dim))
        self.measures = _freeze(np.asarray(measures, dtype=float))
        self.h = float(h)
        self.uniform = bool(uniform)

    @property
    def dim(self):
        return self.domain.dim

    @property
    def size(self):
        return len(self.measures)

    @property
    def total_measure(self):
        return float(self.measures.sum())

    def __repr__(self):
        kind = "uniform" if self.uniform else "graded"
        return f"Grid(dim={self.dim}, cells={self.size}, h={self.h:.3g}, {kind})"


def _axis_nodes(a, b, n, points, grading):
    nodes = np.linspace(a, b, n + 1)
    for g, c in zip(grading, points):
        if not a <= c <= b:
            continue
        # make c a node so the refinement sits on both sides of it
        nodes = np.union1d(nodes, [c])
        extra = []
        k = int(np.searchsorted(nodes, c))
        for neighbour in (k - 1, k + 1):
            if not 0 <= neighbour < len(nodes):
                continue
            w = nodes[neighbour] - c
            cuts = c + w * g.ratio ** np.arange(g.levels + 1)
            # shells between consecutive cuts and the innermost piece, each split evenly
            for outer, inner in zip(cuts, np.append(cuts[1:], c)):
                extra.append(np.linspace(inner, outer, g.subdivisions + 1)[1:-1])
            extra.append(cuts[1:])
        if extra:
            nodes = np.union1d(nodes, np.concatenate(extra))
    return nodes


def make_grid(domain, resolution, grading=None):
    """Midpoint cell decomposition of ``domain``.

    Parameters
    ----------
    domain : Domain
    resolution : int or sequence of int
        Uniform cells per axis of every box (at least 2).
    grading : sequence of Grading, optional
        Points (in the closure of the domain) toward which cells are
        refined geometrically, axis by axis.
    """
    res = np.broadcast_to(np.atleast_1d(np.asarray(resolution)), (domain.dim,))
    if np.any(res < 2):
        raise ValueError(f"resolution must be at least 2 per axis, got {resolution}")
    res = [int(r) for r in res]
    grading = list(grading or [])
    for g in grading:
        if len(g.point) != domain.dim:
            raise ValueError(f"grading point {g.point} has wrong dimension")
        if not domain.contains(np.array(g.point), closed=True)[0]:
            raise ValueError(f"grading point {g.point} lies outside the closure of the domain")

    centers, measures = [], []
    h = 0.0
    for box in domain.boxes:
        axes_c, axes_w = [], []
        for axis, ((a, b), n) in enumerate(zip(box, res)):
            h = max(h, (b - a) / n)
            nodes = _axis_nodes(a, b, n, [g.point[axis] for g in grading], grading)
            axes_c.append(0.5 * (nodes[1:] + nodes[:-1]))
            axes_w.append(np.diff(nodes))
        mesh_c = np.meshgrid(*axes_c, indexing="ij")
        mesh_w = np.meshgrid(*axes_w, indexing="ij")
        centers.append(np.stack([m.ravel() for m in mesh_c], axis=1))
        measures.append(np.prod([m.ravel() for m in mesh_w], axis=0))
    centers = np.concatenate(centers)
    measures = np.concatenate(measures)
    if domain.dim == 1:
        order = np.argsort(centers[:, 0], kind="stable")
        centers, measures = centers[order], measures[order]
    uniform = not grading and len(set(res)) == 1 and all(
        math.isclose((b - a) / n, h) for box in domain.boxes for (a, b), n in zip(box, res)
    )
    return Grid(domain, centers, measures, h, uniform)


class GridFunction:
    """Cell-center samples of a function on a grid."""

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=float).reshape(-1)
        if values.shape != (grid.size,):
            raise ValueError(f"expected {grid.size} values, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function samples must be finite")
        self.grid = grid
        self.values = _freeze(values)

    @classmethod
    def from_callable(cls, grid, func):
        """Sample ``func`` (vectorized over an ``(N, n)`` array) at cell centers."""
        return cls(grid, func(grid.centers))

    def __abs__(self):
        return GridFunction(self.grid, np.abs(self.values))

    def __mul__(self, c):
        return GridFunction(self.grid, self.values * c)

    __rmul__ = __mul__

    def __add__(self, other):
        if other.grid is not self.grid:
            raise ValueError("grid functions live on different grids")
        return GridFunction(self.grid, self.values + other.values)

    def __repr__(self):
        return f"GridFunction({self.grid!r})"


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")


def ball_measure(n, r):
    """Lebesgue measure of the full ball ``B(x, r)`` in R^n."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("ball radius must be positive")
    out = UNIT_BALL_VOLUME[n] * r**n
    return float(out) if out.ndim == 0 else out


def ball_mask(grid, ball):
    """Cells whose centers lie in the open ball."""
    x = np.asarray(ball.center, dtype=float)
    if x.shape != (grid.dim,):
        raise ValueError("ball center has wrong dimension")
    c = grid.centers
    if grid.dim == 1:
        # same comparisons as the sorted-range lookup in BallFamily
        return (c[:, 0] > x[0] - ball.radius) & (c[:, 0] < x[0] + ball.radius)
    return ((c - x) ** 2).sum(axis=1) < ball.radius**2


def _check_radius(grid, ball):
    if ball.radius > grid.domain.diameter * (1 + 1e-12):
        raise ValueError(f"ball radius {ball.radius} exceeds the domain diameter")


def integrate(f, region=None):
    """Midpoint integral of ``f`` over the domain or over ``B(x,r) ∩ Ω``."""
    w = f.values * f.grid.measures
    if region is None:
        return float(w.sum())
    _check_radius(f.grid, region)
    return float(w[ball_mask(f.grid, region)].sum())


def intersected_measure(grid, ball):
    """Measure of the cells with centers in ``ball``; tends to |B(x,r) ∩ Ω|."""
    return float(grid.measures[ball_mask(grid, ball)].sum())


class BallFamily:
    """A finite set of balls (centers x radii) with precomputed cell membership.

    :meth:`sums` returns, for a weight per cell, the array of sums over each
    ball, shape ``(n_centers, n_radii)``. Sums come from prefix sums along
    the cells sorted by distance, so one call costs O(cells) per center in
    2D and O(cells + balls) in 1D.
    """

    def __init__(self, grid, centers, radii):
        self.grid = grid
        self.centers = _freeze(np.asarray(centers, dtype=float).reshape(-1, grid.dim))
        radii = np.asarray(radii, dtype=float)
        if radii.size == 0 or len(self.centers) == 0:
            raise ValueError("ball family must be nonempty")
        if np.any(radii <= 0) or np.any(radii > grid.domain.diameter * (1 + 1e-12)):
            raise ValueError("radii must lie in (0, d]")
        self.radii = _freeze(radii)
        self.full_measure = _freeze(ball_measure(grid.dim, radii))
        c = grid.centers
        if grid.dim == 1:
            xc = c[:, 0]
            x = self.centers[:, :1]
            self._lo = np.searchsorted(xc, x - radii[None, :], side="right")
            self._hi = np.searchsorted(xc, x + radii[None, :], side="left")
        else:
            d2 = ((c[None, :, :] - self.centers[:, None, :]) ** 2).sum(axis=-1)
            self._order = np.argsort(d2, axis=1, kind="stable").astype(np.int32)
            d2_sorted = np.take_along_axis(d2, self._order, axis=1)
            r2 = radii**2
            self._count = np.stack(
                [np.searchsorted(row, r2, side="left") for row in d2_sorted]
            )
        self.intersected = _freeze(self.sums(grid.measures))

    @property
    def shape(self):
        return (len(self.centers), len(self.radii))

    def sums(self, weights):
        """Ball sums of ``weights`` of shape ``(N,)`` or a batch ``(K, N)``."""
        w = np.asarray(weights, dtype=float)
        if w.ndim == 2:
            return np.stack([self.sums(row) for row in w]) if self.grid.dim == 2 else self._sums_1d(w)
        if self.grid.dim == 1:
            return self._sums_1d(w)
        cs = np.concatenate(
            [np.zeros((len(self.centers), 1)), np.cumsum(w[self._order], axis=1)], axis=1
        )
        return np.take_along_axis(cs, self._count, axis=1)

    def _sums_1d(self, w):
        pad = np.zeros(w.shape[:-1] + (1,))
        cs = np.concatenate([pad, np.cumsum(w, axis=-1)], axis=-1)
        return cs[..., self._hi] - cs[..., self._lo]

    def covers_domain(self):
        """True if some ball contains every cell center."""
        return bool(np.any(np.isclose(self.intersected, self.grid.total_measure, rtol=1e-12)))


def default_ball_family(grid, stride=None, per_octave=8, min_radius_cells=2.0, centers="auto"):
    """Centers on cell centers, radii ``d * 2**(-j/per_octave)`` down to about
    ``min_radius_cells * h``.

    ``stride`` keeps every stride-th center coordinate per axis (default 1 in
    1D, 4 in 2D). ``centers="all"`` forces every cell center, as the maximal
    operator needs.
    """
    d = grid.domain.diameter
    r_min = min_radius_cells * grid.h
    n_radii = max(1, int(math.floor(per_octave * math.log2(d / r_min))) + 1) if r_min < d else 1
    radii = d * 2.0 ** (-np.arange(n_radii) / per_octave)
    if centers == "all":
        stride = 1
    if stride is None:
        stride = 1 if grid.dim == 1 else 4
    c = grid.centers
    if stride == 1:
        chosen = c
    else:
        keep = np.ones(len(c), dtype=bool)
        for axis in range(grid.dim):
            coords = np.unique(c[:, axis])
            keep &= np.isin(c[:, axis], coords[::stride])
        chosen = c[keep]
    return BallFamily(grid, chosen, radii)
