"""Window-certified geometry of discrete point configurations.

Every quantity here is certified only on the finite window the point list
faithfully samples, at the point-identity tolerance the set carries.  The
asymptotic conditions they probe (uniform discreteness, finite type, bounded
density, relative denseness) can never be decided from finite data, so each
report records the (windowRadius, R, tolerance) triple it was computed at.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import CertificationError, ContractError, DimensionMismatch


def sort_points(points: np.ndarray) -> np.ndarray:
    """Deterministic order: by norm, then lexicographic on coordinates."""
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return pts
    keys = [pts[:, i] for i in range(pts.shape[1] - 1, -1, -1)]
    keys.append(np.linalg.norm(pts, axis=1))
    order = np.lexsort(keys)
    return pts[order]


def merge_close_points(points: np.ndarray, tol: float) -> np.ndarray:
    """Single-linkage clustering at `tol`; returns cluster centroids, sorted."""
    pts = sort_points(np.asarray(points, dtype=float))
    n = len(pts)
    if n == 0:
        return pts
    tree = cKDTree(pts)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in tree.query_pairs(tol):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    clusters: dict[int, list[int]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)
    reps = np.array([pts[idx].mean(axis=0) for idx in clusters.values()])
    return sort_points(reps)


@dataclass(frozen=True)
class PointSet:
    """A finite point list certified inside the closed ball of window_radius."""

    dim: int
    points: tuple[tuple[float, ...], ...]
    window_radius: float
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.window_radius <= 0:
            raise ValueError("window radius must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")

    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(len(self.points), self.dim)

    def __len__(self) -> int:
        return len(self.points)


def point_set(
    points,
    window_radius: float,
    tolerance: float = 1e-9,
    dim: int | None = None,
) -> PointSet:
    """Build a PointSet: near-duplicates are merged, the window is validated."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        if dim is None:
            raise ValueError("dimension required for an empty point set")
        return PointSet(dim, (), float(window_radius), float(tolerance))
    if pts.ndim == 1:
        pts = pts[:, None]
    if dim is not None and pts.shape[1] != dim:
        raise DimensionMismatch(f"points have dimension {pts.shape[1]}, expected {dim}")
    merged = merge_close_points(pts, tolerance)
    norms = np.linalg.norm(merged, axis=1)
    if np.any(norms > window_radius * (1 + 1e-12) + tolerance):
        raise ContractError(
            "points outside the certified window",
            window_radius=float(window_radius),
            max_norm=float(norms.max()),
        )
    return PointSet(
        merged.shape[1],
        tuple(tuple(float(v) for v in row) for row in merged),
        float(window_radius),
        float(tolerance),
    )


def translate(a: PointSet, t: Sequence[float]) -> PointSet:
    t = np.asarray(t, dtype=float)
    pts = a.array() + t
    return point_set(
        pts, a.window_radius + float(np.linalg.norm(t)), a.tolerance, dim=a.dim
    )


def union(a: PointSet, b: PointSet) -> PointSet:
    if a.dim != b.dim:
        raise DimensionMismatch("point sets of different dimension")
    radius = min(a.window_radius, b.window_radius)
    pts = np.concatenate([a.array(), b.array()])
    norms = np.linalg.norm(pts, axis=1)
    pts = pts[norms <= radius + max(a.tolerance, b.tolerance)]
    return point_set(pts, radius, max(a.tolerance, b.tolerance), dim=a.dim)


# -- operations --------------------------------------------------------------


def separating_constant(a: PointSet) -> float:
    """Minimum pairwise distance over the window (the uniform-discreteness witness)."""
    if len(a) < 2:
        raise ContractError("separating constant needs at least 2 points", count=len(a))
    pts = a.array()
    tree = cKDTree(pts)
    dists, _ = tree.query(pts, k=2)
    return float(dists[:, 1].min())


def counting(a: PointSet, r: float) -> int:
    """Number of points with |x| < r (strict), certified for r <= window_radius."""
    if r > a.window_radius * (1 + 1e-12):
        raise ContractError(
            "counting radius exceeds the certified window",
            radius=float(r),
            window_radius=a.window_radius,
        )
    if len(a) == 0:
        return 0
    return int(np.count_nonzero(np.linalg.norm(a.array(), axis=1) < r))


def difference_set(a: PointSet, r: float) -> PointSet:
    """All pairwise differences with norm < r, deduplicated at tolerance; contains 0."""
    if r > a.window_radius * (1 + 1e-12):
        raise ContractError(
            "difference radius exceeds the certified window",
            radius=float(r),
            window_radius=a.window_radius,
        )
    pts = a.array()
    diffs = [np.zeros((1, a.dim))]
    if len(a) >= 2:
        tree = cKDTree(pts)
        pairs = tree.query_pairs(r * (1 + 1e-12), output_type="ndarray")
        if len(pairs):
            d = pts[pairs[:, 0]] - pts[pairs[:, 1]]
            norms = np.linalg.norm(d, axis=1)
            d = d[norms < r]
            diffs.extend([d, -d])
    merged = merge_close_points(np.concatenate(diffs), a.tolerance)
    return PointSet(
        a.dim,
        tuple(tuple(float(v) for v in row) for row in merged),
        a.window_radius,
        a.tolerance,
    )


@dataclass(frozen=True)
class FiniteTypeCertificate:
    certified: bool
    min_gap: float
    cluster_count: int
    window_radius: float
    diff_radius: float
    tolerance: float


def finite_type_certificate(a: PointSet, r: float) -> FiniteTypeCertificate:
    """Cluster the difference set at tolerance; certify if clusters stay separated.

    Certified means the minimum gap between distinct difference clusters
    exceeds 10x the tolerance -- a window-scale witness that A - A is discrete.
    """
    diffs = difference_set(a, r)
    if len(diffs) < 2:
        gap = math.inf
    else:
        gap = separating_constant(diffs)
    return FiniteTypeCertificate(
        certified=bool(gap > 10.0 * a.tolerance),
        min_gap=float(gap),
        cluster_count=len(diffs),
        window_radius=a.window_radius,
        diff_radius=float(r),
        tolerance=a.tolerance,
    )


def bounded_density(a: PointSet, radius: float = 0.5) -> int:
    """Max point count in an open ball of the given radius centered at a point of A.

    Centers are restricted to |x| <= window_radius - radius so rim balls are
    fully sampled.  A window-certified lower bound for the density supremum.
    """
    if len(a) == 0:
        return 0
    pts = a.array()
    norms = np.linalg.norm(pts, axis=1)
    centers = pts[norms <= a.window_radius - radius]
    if len(centers) == 0:
        return 0
    tree = cKDTree(pts)
    best = 0
    for c, neighbors in zip(centers, tree.query_ball_point(centers, radius)):
        if len(neighbors) <= best:
            continue
        d = np.linalg.norm(pts[neighbors] - c, axis=1)
        best = max(best, int(np.count_nonzero(d < radius)))
    return best


@dataclass(frozen=True)
class CoveringRadiusEstimate:
    value: float
    grid_step: float
    interior_radius: float

    def __float__(self) -> float:
        return self.value


_COVERING_NODES = {1: 257, 2: 65, 3: 25}


def covering_radius_estimate(a: PointSet) -> CoveringRadiusEstimate:
    """Largest distance from interior window points to A (relative denseness witness).

    The interior shrinks by the current estimate and the scan repeats to a
    fixed point, so rim artifacts cannot inflate the result.  Errors out when
    no interior remains to certify.
    """
    if len(a) < 1:
        raise ContractError("covering radius needs at least one point")
    tree = cKDTree(a.array())
    nodes_per_axis = _COVERING_NODES[a.dim]
    estimate = 0.0
    step = math.inf
    for _ in range(8):
        interior = a.window_radius - estimate
        if interior <= 10 * a.tolerance:
            raise CertificationError(
                "window too small to certify any interior for the covering radius",
                window_radius=a.window_radius,
                estimate=estimate,
            )
        axes = [np.linspace(-interior, interior, nodes_per_axis)] * a.dim
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, a.dim)
        grid = grid[np.linalg.norm(grid, axis=1) <= interior]
        dists, _ = tree.query(grid)
        new_estimate = float(dists.max())
        step = 2.0 * interior / (nodes_per_axis - 1)
        if abs(new_estimate - estimate) <= step:
            estimate = max(estimate, new_estimate)
            break
        estimate = new_estimate
    return CoveringRadiusEstimate(value=estimate, grid_step=step, interior_radius=a.window_radius - estimate)
