"""Full-rank lattices, conjugate lattices, and crystal detection from point sets.

A lattice is stored as a row-major basis matrix T with L = T Z^d.  Bases are
non-unique, so every constructor funnels through a canonical greedy reduction
(pairwise size reduction, shortest-first ordering, sign normalization); lattice
equality is decided by mutual membership of basis vectors, never by comparing
matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import _intlinalg
from .errors import (
    ContractError,
    DimensionMismatch,
    IllConditioned,
    IncommensurableLattices,
    RankDeficient,
)
from .geometry import PointSet, merge_close_points, sort_points

CONDITION_CAP = 1e8


@dataclass(frozen=True)
class Lattice:
    basis: tuple[tuple[float, ...], ...]  # row-major T, columns are basis vectors
    tolerance: float = 1e-9

    def __post_init__(self):
        d = len(self.basis)
        if any(len(row) != d for row in self.basis):
            raise DimensionMismatch("lattice basis must be square")
        if d < 1 or d > 3:
            raise DimensionMismatch(f"dimension {d} outside 1..3")
        det = abs(np.linalg.det(np.array(self.basis)))
        if det <= 10.0 * self.tolerance:
            raise RankDeficient(f"lattice basis is numerically singular (|det| = {det:g})")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matrix(self) -> np.ndarray:
        return np.array(self.basis, dtype=float)

    def det(self) -> float:
        return float(abs(np.linalg.det(self.matrix())))


def _sign_normalize(col: np.ndarray, tol: float) -> np.ndarray:
    for v in col:
        if abs(v) > tol:
            return -col if v < 0 else col
    return col


def _canonical_basis(t: np.ndarray, tol: float) -> np.ndarray:
    """Greedy pairwise reduction, then shortest-first sign-normalized ordering."""
    cols = [t[:, j].astype(float).copy() for j in range(t.shape[1])]
    d = len(cols)
    for _ in range(64):
        changed = False
        cols.sort(key=lambda c: float(np.dot(c, c)))
        for j in range(d):
            for i in range(d):
                if i == j:
                    continue
                denom = float(np.dot(cols[i], cols[i]))
                if denom == 0.0:
                    continue
                q = round(float(np.dot(cols[j], cols[i])) / denom)
                if q != 0:
                    cand = cols[j] - q * cols[i]
                    if np.dot(cand, cand) < np.dot(cols[j], cols[j]) * (1 - 1e-12):
                        cols[j] = cand
                        changed = True
        if not changed:
            break
    cols = [_sign_normalize(c, tol) for c in cols]
    cols.sort(key=lambda c: (float(np.linalg.norm(c)), tuple(c)))
    return np.column_stack(cols)


def make_lattice(basis, tolerance: float = 1e-9) -> Lattice:
    t = np.asarray(basis, dtype=float)
    if t.ndim == 0:
        t = t.reshape(1, 1)
    if t.ndim == 1:
        t = np.diag(t)
    canon = _canonical_basis(t, tolerance)
    return Lattice(tuple(tuple(float(v) for v in row) for row in canon), float(tolerance))


def integer_lattice(dim: int, scale: float = 1.0, tolerance: float = 1e-9) -> Lattice:
    return make_lattice(np.eye(dim) * scale, tolerance)


# -- basic operations --------------------------------------------------------


def dual_lattice(l: Lattice) -> Lattice:
    """Conjugate lattice with basis (T^t)^(-1)."""
    t = l.matrix()
    cond = np.linalg.cond(t)
    if cond > CONDITION_CAP:
        raise IllConditioned(f"condition number {cond:.3g} exceeds {CONDITION_CAP:g}")
    return make_lattice(np.linalg.inv(t.T), l.tolerance)


@dataclass(frozen=True)
class MemberReport:
    is_member: bool
    nearest: tuple[float, ...]
    residual: float


def member(l: Lattice, x: Sequence[float]) -> MemberReport:
    x = np.asarray(x, dtype=float)
    t = l.matrix()
    nearest = t @ np.round(np.linalg.solve(t, x))
    residual = float(np.linalg.norm(x - nearest))
    return MemberReport(residual < l.tolerance, tuple(float(v) for v in nearest), residual)


def reduce_to_fundamental(l: Lattice, x: Sequence[float]) -> np.ndarray:
    """Representative of x mod L with lattice coordinates in [0, 1)."""
    t = l.matrix()
    coords = np.linalg.solve(t, np.asarray(x, dtype=float))
    return t @ (coords - np.floor(coords))

def reduce_nearest(l: Lattice, x) -> np.ndarray:
    """Representative of x mod L nearest to 0 in lattice coordinates (torus metric)."""
    t = l.matrix()
    x = np.asarray(x, dtype=float)
    coords = np.linalg.solve(t, x.T).T
    return x - (t @ np.round(coords).T).T


def torus_distance(l: Lattice, x, y) -> float:
    return float(np.linalg.norm(reduce_nearest(l, np.asarray(x, float) - np.asarray(y, float))))


def lattices_equal(l1: Lattice, l2: Lattice) -> bool:
    """True iff each basis vector of either lattice belongs to the other."""
    if l1.dim != l2.dim:
        return False
    tol = max(l1.tolerance, l2.tolerance)
    for a, b in ((l1, l2), (l2, l1)):
        for col in a.matrix().T:
            rep = member(Lattice(b.basis, tol), col)
            if not rep.is_member:
                return False
    return True


def enumerate_ball(
    l: Lattice,
    center: Sequence[float],
    radius: float,
    coset: Sequence[float] | None = None,
    closed: bool = False,
) -> np.ndarray:
    """Points of coset + L inside the ball around center, deterministically sorted."""
    t = l.matrix()
    tinv = np.linalg.inv(t)
    center = np.asarray(center, dtype=float)
    shift = np.zeros(l.dim) if coset is None else np.asarray(coset, dtype=float)
    mid = tinv @ (center - shift)
    half = radius * np.linalg.norm(tinv, axis=1) + 1e-9
    ranges = [
        np.arange(math.floor(m - h), math.ceil(m + h) + 1) for m, h in zip(mid, half)
    ]
    mesh = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, l.dim)
    pts = mesh @ t.T + shift
    dist = np.linalg.norm(pts - center, axis=1)
    keep = dist <= radius if closed else dist < radius
    return sort_points(pts[keep])


def covering_radius(l: Lattice, grid: int = 33) -> float:
    """Estimate of the deep-hole distance, by a grid over the fundamental cell."""
    t = l.matrix()
    fracs = [np.linspace(0.0, 1.0, grid, endpoint=False)] * l.dim
    mesh = np.stack(np.meshgrid(*fracs, indexing="ij"), axis=-1).reshape(-1, l.dim)
    pts = mesh @ t.T
    offsets = np.stack(
        np.meshgrid(*([np.arange(-1, 3)] * l.dim), indexing="ij"), axis=-1
    ).reshape(-1, l.dim)
    lattice_pts = offsets @ t.T
    tree = cKDTree(lattice_pts)
    dists, _ = tree.query(pts)
    return float(dists.max())


# -- crystals ----------------------------------------------------------------


@dataclass(frozen=True)
class Crystal:
    lattice: Lattice
    cosets: tuple[tuple[float, ...], ...]

    @property
    def dim(self) -> int:
        return self.lattice.dim


@dataclass(frozen=True)
class NotCrystal:
    reason: str
    window_radius: float
    r_max: float
    tolerance: float


def make_crystal(lattice: Lattice, cosets) -> Crystal:
    """Normalize coset representatives into the fundamental domain, deduplicated."""
    reduced = [reduce_to_fundamental(lattice, c) for c in np.atleast_2d(np.asarray(cosets, float))]
    reps: list[np.ndarray] = []
    for c in sort_points(np.array(reduced)):
        if all(torus_distance(lattice, c, r) > lattice.tolerance for r in reps):
            reps.append(c)
    if not reps:
        raise ContractError("crystal needs at least one coset")
    return Crystal(lattice, tuple(tuple(float(v) for v in r) for r in reps))


def crystal_points(c: Crystal, radius: float, closed: bool = True) -> np.ndarray:
    pts = [
        enumerate_ball(c.lattice, np.zeros(c.dim), radius, coset=np.asarray(a), closed=closed)
        for a in c.cosets
    ]
    return sort_points(np.concatenate([p for p in pts if len(p)]))


# -- period detection --------------------------------------------------------


def detect_periods(a: PointSet, r_max: float | None = None) -> list[tuple[float, ...]]:
    """Translations that map the windowed set into itself, up to norm r_max.

    A candidate tau (drawn from the difference set) is accepted only if every
    point in the trimmed window |x| <= windowRadius - |tau| has a partner
    within tolerance at x + tau.  Exact over the window: no fractional-match
    voting, so near-periods of aperiodic sets are rejected.
    """
    if len(a) < 2:
        raise ContractError("period detection needs at least 2 points", count=len(a))
    if r_max is None:
        r_max = a.window_radius / 4.0
    pts = a.array()
    tree = cKDTree(pts)
    pairs = tree.query_pairs(r_max * (1 + 1e-9), output_type="ndarray")
    if len(pairs) == 0:
        return []
    diffs = pts[pairs[:, 0]] - pts[pairs[:, 1]]
    diffs = np.concatenate([diffs, -diffs])
    norms = np.linalg.norm(diffs, axis=1)
    diffs = diffs[(norms <= r_max * (1 + 1e-9)) & (norms > a.tolerance)]
    if len(diffs) == 0:
        return []
    # coarse dedupe: candidates only need tolerance-level accuracy to pass the
    # exact acceptance test below
    quantized = np.round(diffs / max(a.tolerance * 10, 1e-7))
    _, first = np.unique(quantized, axis=0, return_index=True)
    candidates = sort_points(diffs[np.sort(first)])

    accepted: list[tuple[float, ...]] = []
    norms_pts = np.linalg.norm(pts, axis=1)
    for tau in candidates:
        limit = a.window_radius - float(np.linalg.norm(tau))
        trimmed = pts[norms_pts <= limit + a.tolerance]
        if len(trimmed) == 0:
            continue
        # cheap pre-check on a spread of sample points before the full scan
        sample = trimmed[:: max(1, len(trimmed) // 16)]
        d_sample, _ = tree.query(sample + tau)
        if d_sample.max() > a.tolerance:
            continue
        d_all, _ = tree.query(trimmed + tau)
        if d_all.max() <= a.tolerance:
            accepted.append(tuple(float(v) for v in tau))
    return accepted


def lattice_from_periods(
    periods: Sequence[Sequence[float]], dim: int, tolerance: float = 1e-9
) -> Lattice:
    """Smallest lattice containing every period (a real-vector gcd).

    Greedy shortest-independent selection followed by Euclidean refinement:
    any period with a nonzero residue against the current basis contributes
    its (shorter) residue as a new candidate, until every residue vanishes.
    """
    cands = merge_close_points(np.asarray(periods, dtype=float).reshape(-1, dim), tolerance)
    cands = cands[np.linalg.norm(cands, axis=1) > tolerance]
    if len(cands) == 0 or np.linalg.matrix_rank(cands, tol=tolerance) < dim:
        raise RankDeficient("periods do not span the ambient space")
    for _ in range(64):
        basis: list[np.ndarray] = []
        for p in cands:
            trial = basis + [p]
            if np.linalg.matrix_rank(np.array(trial), tol=tolerance) > len(basis):
                basis.append(p)
            if len(basis) == dim:
                break
        t = np.column_stack(basis)
        coords = np.linalg.solve(t, cands.T).T
        residues = cands - np.round(coords) @ t.T
        res_norms = np.linalg.norm(residues, axis=1)
        new = residues[res_norms > 10 * tolerance]
        if len(new) == 0:
            lat = make_lattice(t, tolerance)
            # every accepted period must reduce to a member
            for p in cands:
                if not member(lat, p).is_member:
                    break
            else:
                return lat
        cands = merge_close_points(np.concatenate([cands, new]), tolerance)
        cands = cands[np.linalg.norm(cands, axis=1) > tolerance]
    raise ContractError("period refinement did not converge")


def detect_crystal(a: PointSet, r_max: float | None = None) -> Crystal | NotCrystal:
    """Recover the maximal period lattice and coset structure, or say why not."""
    if len(a) < 1:
        raise ContractError("crystal detection needs at least one point")
    if r_max is None:
        r_max = a.window_radius / 4.0
    try:
        periods = detect_periods(a, r_max)
    except ContractError:
        periods = []
    not_crystal = NotCrystal(
        reason="no-full-rank-periods",
        window_radius=a.window_radius,
        r_max=float(r_max),
        tolerance=a.tolerance,
    )
    if not periods:
        return not_crystal
    arr = np.array(periods)
    if np.linalg.matrix_rank(arr, tol=a.tolerance) < a.dim:
        return not_crystal
    lat = lattice_from_periods(arr, a.dim, a.tolerance)

    pts = a.array()
    reps: list[np.ndarray] = []
    for x in pts:
        r = reduce_to_fundamental(lat, x)
        if all(torus_distance(lat, r, s) > a.tolerance for s in reps):
            reps.append(r)
    crystal = make_crystal(lat, np.array(reps))

    # completeness: every predicted coset point inside the trimmed window must
    # be present in the data
    basis_reach = float(np.linalg.norm(lat.matrix(), axis=0).max())
    trimmed = a.window_radius - basis_reach
    if trimmed > 0:
        tree = cKDTree(pts)
        predicted = crystal_points(crystal, trimmed - 10 * a.tolerance, closed=False)
        if len(predicted):
            dists, _ = tree.query(predicted)
            if dists.max() > a.tolerance:
                return NotCrystal(
                    reason="coset-mismatch",
                    window_radius=a.window_radius,
                    r_max=float(r_max),
                    tolerance=a.tolerance,
                )
    return crystal


# -- commensurability --------------------------------------------------------

MAX_DENOMINATOR = 64


def _rationalize(x: float, max_den: int, tol: float) -> Fraction:
    frac = Fraction(x).limit_denominator(max_den)
    if abs(float(frac) - x) > tol * max(1.0, abs(x)):
        raise IncommensurableLattices(
            f"entry {x!r} is not rational with denominator <= {max_den}"
        )
    return frac


def common_sublattice(lattices: Sequence[Lattice], max_den: int = MAX_DENOMINATOR) -> Lattice:
    """Intersection of pairwise commensurable lattices.

    Each lattice must be rational in the running intersection with entrywise
    denominators <= max_den; otherwise the inputs are treated as genuinely
    incommensurable and the operation fails loudly.
    """
    if not lattices:
        raise ContractError("no lattices given")
    current = lattices[0]
    tol = max(l.tolerance for l in lattices)
    for other in lattices[1:]:
        if other.dim != current.dim:
            raise DimensionMismatch("lattice dimensions differ")
        d = current.dim
        t_cur = current.matrix()
        rel = np.linalg.solve(t_cur, other.matrix())  # columns of other in current coords
        fracs = [[_rationalize(float(rel[i, j]), max_den, 1e-9) for j in range(d)] for i in range(d)]
        q = 1
        for row in fracs:
            for f in row:
                q = q * f.denominator // math.gcd(q, f.denominator)
        p_int = [[int(fracs[i][j] * q) for j in range(d)] for i in range(d)]
        q_eye = [[q if i == j else 0 for j in range(d)] for i in range(d)]
        inter = _intlinalg.lattice_intersect_int(q_eye, p_int)
        t_new = t_cur @ (np.array(inter, dtype=float) / q)
        current = make_lattice(t_new, tol)
        # sanity: the intersection embeds in both inputs
        for col in current.matrix().T:
            if not (member(current, col).is_member and member(other, col).is_member):
                raise IncommensurableLattices("intersection verification failed")
    return current


def coset_representatives(sub: Lattice, big: Lattice) -> list[np.ndarray]:
    """Representatives of big modulo sub (big must contain sub); includes 0."""
    index = sub.det() / big.det()
    n = int(round(index))
    if abs(index - n) > 1e-6 or n < 1:
        raise IncommensurableLattices(f"non-integer subgroup index {index:g}")
    gens = [col for col in big.matrix().T]
    reps: list[np.ndarray] = [np.zeros(sub.dim)]
    frontier = [np.zeros(sub.dim)]
    while frontier and len(reps) < n:
        nxt: list[np.ndarray] = []
        for base in frontier:
            for g in gens:
                for sign in (1.0, -1.0):
                    cand = reduce_to_fundamental(sub, base + sign * g)
                    if all(torus_distance(sub, cand, r) > sub.tolerance for r in reps):
                        reps.append(cand)
                        nxt.append(cand)
        frontier = nxt
    if len(reps) != n:
        raise IncommensurableLattices(
            f"coset enumeration found {len(reps)} of {n} representatives"
        )
    return [np.asarray(r) for r in sort_points(np.array(reps))]
