"""Gauss-Hermite test functions closed under differentiation and Fourier transform.

The building block is the normalized Hermite function family h_n with the
2*pi Fourier convention  F[phi](y) = integral phi(x) exp(-2*pi*i*<x,y>) dx,
scaled so that F[h_n] = (-i)^n h_n and integral h_n^2 = 1:

    h_n(x) = 2^(1/4) (2^n n!)^(-1/2) H_n(sqrt(2*pi) x) exp(-pi x^2).

With that normalization every operation used here (derivative, transform,
shift, modulation) maps a finite atom sum to a finite atom sum with exact
rational/phase coefficient factors, so no quadrature appears on the core
evaluation path.  Supremum-type quantities (the N_{n,m} seminorms) are the
only estimated ones; they are certified by branch-and-bound with analytic
Gaussian tail bounds.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import multiindex as mi
from .errors import (
    CertificationError,
    DegenerateTestFunction,
    DerivativeCapExceeded,
    DimensionMismatch,
)

SQRT_2PI = math.sqrt(2.0 * math.pi)

# Cramer-type uniform bound: sup_x |h_n(x)| <= 2^(1/4) * 1.086435 for all n.
HERMITE_SUP = 1.2921

# Derivative-order cap for seminorm estimation (recurrence coefficients grow
# factorially beyond this).
DERIVATIVE_CAP = 8

_TAIL_GRID_MAX = 40.0
_TAIL_GRID_POINTS = 8001


def hermite_function(n: int, u) -> np.ndarray:
    """Evaluate h_n on an array, by the stable three-term recurrence."""
    u = np.asarray(u, dtype=float)
    h_prev = 2.0 ** 0.25 * np.exp(-np.pi * u * u)
    if n == 0:
        return h_prev
    h_cur = SQRT_2PI * math.sqrt(2.0) * u * h_prev
    for m in range(1, n):
        h_next = (
            math.sqrt(2.0 / (m + 1)) * SQRT_2PI * u * h_cur
            - math.sqrt(m / (m + 1)) * h_prev
        )
        h_prev, h_cur = h_cur, h_next
    return h_cur


@dataclass(frozen=True)
class GaussHermiteAtom:
    """One tensor-product atom  c * prod_i h_{n_i}((x_i-a_i)/s_i) * e^{2 pi i <b,x>}."""

    scale: tuple[float, ...]
    shift: tuple[float, ...]
    modulation: tuple[float, ...]
    hermite: tuple[int, ...]
    coeff: complex

    def __post_init__(self):
        d = len(self.scale)
        if not (len(self.shift) == len(self.modulation) == len(self.hermite) == d):
            raise DimensionMismatch("atom fields have inconsistent dimensions")
        if any(s <= 0 for s in self.scale):
            raise ValueError("atom scales must be strictly positive")
        if any(n < 0 for n in self.hermite):
            raise ValueError("hermite degrees must be non-negative")

    @property
    def dim(self) -> int:
        return len(self.scale)

    def values(self, points: np.ndarray) -> np.ndarray:
        """Atom values at an (N, d) array of points."""
        out = np.full(points.shape[0], self.coeff, dtype=complex)
        for i in range(self.dim):
            u = (points[:, i] - self.shift[i]) / self.scale[i]
            out *= hermite_function(self.hermite[i], u)
        phase = points @ np.asarray(self.modulation, dtype=float)
        if np.any(phase):
            out *= np.exp(2j * np.pi * phase)
        return out


def _normalized(atoms: Iterable[GaussHermiteAtom]) -> tuple[GaussHermiteAtom, ...]:
    """Merge atoms with identical parameters; drop exact zeros; sort."""
    table: dict[tuple, complex] = {}
    for a in atoms:
        key = (a.hermite, a.scale, a.shift, a.modulation)
        table[key] = table.get(key, 0j) + complex(a.coeff)
    merged = [
        GaussHermiteAtom(scale=k[1], shift=k[2], modulation=k[3], hermite=k[0], coeff=c)
        for k, c in table.items()
        if c != 0
    ]
    merged.sort(key=lambda a: (a.hermite, a.scale, a.shift, a.modulation))
    return tuple(merged)


@dataclass(frozen=True)
class TestFunction:
    """A finite Gauss-Hermite atom sum on R^d."""

    dim: int
    atoms: tuple[GaussHermiteAtom, ...]

    def __post_init__(self):
        if self.dim < 1 or self.dim > 3:
            raise DimensionMismatch(f"dimension {self.dim} outside 1..3")
        for a in self.atoms:
            if a.dim != self.dim:
                raise DimensionMismatch("atom dimension differs from test function")

    def __call__(self, x) -> complex | np.ndarray:
        pts = np.asarray(x, dtype=float)
        scalar = pts.ndim == 1
        if scalar:
            pts = pts[None, :]
        if pts.shape[1] != self.dim:
            raise DimensionMismatch(
                f"points of dimension {pts.shape[1]} fed to {self.dim}-d test function"
            )
        out = np.zeros(pts.shape[0], dtype=complex)
        for a in self.atoms:
            out += a.values(pts)
        return out[0] if scalar else out

    # -- algebra ---------------------------------------------------------

    def __add__(self, other: "TestFunction") -> "TestFunction":
        if other.dim != self.dim:
            raise DimensionMismatch("cannot add test functions of different dimension")
        return TestFunction(self.dim, _normalized(self.atoms + other.atoms))

    def __mul__(self, scalar: complex) -> "TestFunction":
        scaled = [
            GaussHermiteAtom(a.scale, a.shift, a.modulation, a.hermite, a.coeff * scalar)
            for a in self.atoms
        ]
        return TestFunction(self.dim, _normalized(scaled))

    __rmul__ = __mul__

    def __sub__(self, other: "TestFunction") -> "TestFunction":
        return self + (other * (-1.0))

    # -- closure operations ----------------------------------------------

    def differentiate(self, k: Sequence[int]) -> "TestFunction":
        """Exact mixed partial derivative D^k, again a finite atom sum."""
        k = mi.as_multi_index(k, self.dim)
        atoms = list(self.atoms)
        for axis, count in enumerate(k):
            for _ in range(count):
                atoms = _axis_derivative(atoms, axis)
        return TestFunction(self.dim, _normalized(atoms))

    def fourier(self) -> "TestFunction":
        """Exact Fourier transform; atom count is preserved."""
        out = []
        for a in self.atoms:
            factor = complex(1.0)
            for s, shift, b, n in zip(a.scale, a.shift, a.modulation, a.hermite):
                factor *= s * (-1j) ** n * np.exp(2j * np.pi * shift * b)
            out.append(
                GaussHermiteAtom(
                    scale=tuple(1.0 / s for s in a.scale),
                    shift=a.modulation,
                    modulation=tuple(-v for v in a.shift),
                    hermite=a.hermite,
                    coeff=a.coeff * factor,
                )
            )
        return TestFunction(self.dim, _normalized(out))

    def translate(self, t: Sequence[float]) -> "TestFunction":
        """x -> phi(x - t)."""
        t = tuple(float(v) for v in t)
        if len(t) != self.dim:
            raise DimensionMismatch("translation vector dimension mismatch")
        out = []
        for a in self.atoms:
            phase = np.exp(-2j * np.pi * sum(b * v for b, v in zip(a.modulation, t)))
            out.append(
                GaussHermiteAtom(
                    scale=a.scale,
                    shift=tuple(x + v for x, v in zip(a.shift, t)),
                    modulation=a.modulation,
                    hermite=a.hermite,
                    coeff=a.coeff * phase,
                )
            )
        return TestFunction(self.dim, _normalized(out))

    def reflect(self) -> "TestFunction":
        """x -> phi(-x)."""
        out = [
            GaussHermiteAtom(
                scale=a.scale,
                shift=tuple(-v for v in a.shift),
                modulation=tuple(-v for v in a.modulation),
                hermite=a.hermite,
                coeff=a.coeff * (-1.0) ** sum(a.hermite),
            )
            for a in self.atoms
        ]
        return TestFunction(self.dim, _normalized(out))


def _axis_derivative(atoms: list[GaussHermiteAtom], axis: int) -> list[GaussHermiteAtom]:
    # h_n' = sqrt(2 pi) (sqrt(n/2) h_{n-1} - sqrt((n+1)/2) h_{n+1}), plus the
    # modulation product-rule term.
    out = []
    for a in atoms:
        n = a.hermite[axis]
        s = a.scale[axis]
        b = a.modulation[axis]
        if b != 0.0:
            out.append(
                GaussHermiteAtom(a.scale, a.shift, a.modulation, a.hermite, a.coeff * 2j * np.pi * b)
            )
        ladder = SQRT_2PI / s
        if n >= 1:
            down = tuple(v - 1 if i == axis else v for i, v in enumerate(a.hermite))
            out.append(
                GaussHermiteAtom(
                    a.scale, a.shift, a.modulation, down, a.coeff * ladder * math.sqrt(n / 2.0)
                )
            )
        up = tuple(v + 1 if i == axis else v for i, v in enumerate(a.hermite))
        out.append(
            GaussHermiteAtom(
                a.scale, a.shift, a.modulation, up, -a.coeff * ladder * math.sqrt((n + 1) / 2.0)
            )
        )
    return out


@lru_cache(maxsize=4096)
def derivative(phi: TestFunction, k: tuple[int, ...]) -> TestFunction:
    """Cached D^k phi (test functions are immutable and hashable)."""
    return phi.differentiate(k)


# -- convenience constructors ----------------------------------------------


def hermite_atom(
    dim: int = 1,
    scale: Sequence[float] | float = 1.0,
    shift: Sequence[float] | float = 0.0,
    modulation: Sequence[float] | float = 0.0,
    degree: Sequence[int] | int = 0,
    coeff: complex = 1.0,
) -> TestFunction:
    def vec(v, cast):
        if np.isscalar(v):
            return (cast(v),) * dim
        return tuple(cast(x) for x in v)

    atom = GaussHermiteAtom(
        scale=vec(scale, float),
        shift=vec(shift, float),
        modulation=vec(modulation, float),
        hermite=vec(degree, int),
        coeff=complex(coeff),
    )
    return TestFunction(dim, (atom,))


def gaussian(
    dim: int = 1,
    scale: Sequence[float] | float = 1.0,
    shift: Sequence[float] | float = 0.0,
    modulation: Sequence[float] | float = 0.0,
    coeff: complex = 1.0,
) -> TestFunction:
    """c * exp(-pi * sum ((x_i - a_i)/s_i)^2) * e^{2 pi i <b, x>}.

    Normalized so the peak value (without modulation) equals `coeff`.
    """
    base = hermite_atom(dim, scale, shift, modulation, 0, coeff)
    # h_0 peaks at 2^(1/4); rescale so the Gaussian peaks at coeff
    return base * (2.0 ** (-0.25 * dim))


# -- certified suprema ------------------------------------------------------


@lru_cache(maxsize=512)
def _weighted_tail_table(n_deg: int, power: int) -> tuple[np.ndarray, np.ndarray]:
    """Monotone table of t -> sup over grid {|v| >= t} of |v|^power * |h_n(v)|."""
    v = np.linspace(0.0, _TAIL_GRID_MAX, _TAIL_GRID_POINTS)
    f = np.abs(hermite_function(n_deg, v))
    if power:
        f = f * v**power
    sup_from_right = np.maximum.accumulate(f[::-1])[::-1]
    return v, sup_from_right


def _axis_tail(n_deg: int, power: int, t: float) -> float:
    """Conservative sup_{|v| >= t} |v|^power |h_n(v)| (symmetric in v)."""
    if t >= _TAIL_GRID_MAX:
        return 0.0  # double underflow: 40^8 exp(-1600 pi) == 0.0
    grid, table = _weighted_tail_table(n_deg, power)
    idx = int(np.searchsorted(grid, max(t, 0.0), side="right")) - 1
    return 1.05 * float(table[max(idx, 0)])


def _atom_box_bound(atom: GaussHermiteAtom, center: np.ndarray, half: np.ndarray) -> float:
    """Upper bound of |atom| over the axis-aligned box center +- half."""
    out = abs(atom.coeff)
    for i in range(atom.dim):
        rel = max(0.0, abs(center[i] - atom.shift[i]) - half[i]) / atom.scale[i]
        out *= _axis_tail(atom.hermite[i], 0, rel)
        if out == 0.0:
            return 0.0
    return out


def _sum_box_bound(phi: TestFunction, center: np.ndarray, half: np.ndarray) -> float:
    return sum(_atom_box_bound(a, center, half) for a in phi.atoms)


def _exterior_bound(phi: TestFunction, n: int, cube_half: float) -> float:
    """Upper bound of max(1,|x|^n)|phi(x)| outside the cube [-R, R]^d."""
    d = phi.dim
    total = 0.0
    for region_axis in range(d):
        for a in phi.atoms:
            tails = []
            for l in range(d):
                if l == region_axis:
                    t = max(0.0, cube_half - abs(a.shift[l])) / a.scale[l]
                else:
                    t = 0.0
                tails.append(t)
            free = [_axis_tail(a.hermite[l], 0, tails[l]) for l in range(d)]
            unweighted = abs(a.coeff) * math.prod(free)
            if n == 0:
                total += unweighted
                continue
            weighted = 0.0
            for j in range(d):
                # |x_j|^n <= sum_q C(n,q) |a_j|^(n-q) s_j^q |u|^q
                axis_w = 0.0
                for q in range(n + 1):
                    axis_w += (
                        math.comb(n, q)
                        * abs(a.shift[j]) ** (n - q)
                        * a.scale[j] ** q
                        * _axis_tail(a.hermite[j], q, tails[j])
                    )
                rest = math.prod(free[l] for l in range(d) if l != j)
                weighted += axis_w * rest
            total += abs(a.coeff) * (unweighted + d ** max(n - 1, 0) * weighted)
    return total


def _gradient_bound_functions(phi: TestFunction) -> list[TestFunction]:
    return [
        derivative(phi, tuple(1 if j == i else 0 for j in range(phi.dim)))
        for i in range(phi.dim)
    ]


def certified_weighted_sup(phi: TestFunction, n: int, rel_err: float = 0.01) -> float:
    """Certified estimate of sup_x max(1, |x|^n) |phi(x)|.

    Branch-and-bound over a cube that provably contains the supremum up to a
    Gaussian tail; the returned value is a true lower bound within rel_err of
    the supremum.
    """
    if not phi.atoms:
        return 0.0
    d = phi.dim
    grads = _gradient_bound_functions(phi)

    def weight_max(center: np.ndarray, half: np.ndarray) -> float:
        if n == 0:
            return 1.0
        r = float(np.linalg.norm(np.abs(center) + half))
        return max(1.0, r**n)

    def value(points: np.ndarray) -> np.ndarray:
        if n == 0:
            w = 1.0
        else:
            w = np.maximum(1.0, np.linalg.norm(points, axis=1) ** n)
        return w * np.abs(phi(points))

    reach = max(
        abs(x) + 4.5 * s * math.sqrt(deg + 1.0)
        for a in phi.atoms
        for x, s, deg in zip(a.shift, a.scale, a.hermite)
    )
    cube_half = reach + 1.0 + 0.5 * n
    for _ in range(14):
        best = _branch_and_bound(phi, grads, n, cube_half, rel_err / 2.0, weight_max, value)
        exterior = _exterior_bound(phi, n, cube_half)
        if exterior <= max(rel_err / 2.0 * best, 1e-280):
            return best
        cube_half *= 1.4
    raise CertificationError("could not certify the supremum tail", rel_err=rel_err)


def _branch_and_bound(phi, grads, n, cube_half, rel, weight_max, value) -> float:
    d = phi.dim
    root_center = np.zeros(d)
    root_half = np.full(d, cube_half)

    probes = [root_center] + [
        np.clip(np.asarray(a.shift, dtype=float), -cube_half, cube_half) for a in phi.atoms
    ]
    best = float(np.max(value(np.asarray(probes))))

    def upper(center: np.ndarray, half: np.ndarray, center_val: float) -> float:
        wmax = weight_max(center, half)
        envelope = wmax * _sum_box_bound(phi, center, half)
        lip = sum(_sum_box_bound(g, center, half) * h for g, h in zip(grads, half))
        lipschitz = wmax * (center_val + lip)
        return min(envelope, lipschitz)

    counter = itertools.count()
    c0 = float(np.abs(phi(root_center[None, :]))[0])
    heap = [(-upper(root_center, root_half, c0), next(counter), root_center, root_half)]
    for _ in range(200000):
        if not heap:
            return best
        neg_ub, _, center, half = heapq.heappop(heap)
        if -neg_ub <= best * (1.0 + rel):
            return best
        axis = int(np.argmax(half))
        for sign in (-1.0, 1.0):
            child_center = center.copy()
            child_half = half.copy()
            child_half[axis] *= 0.5
            child_center[axis] += sign * child_half[axis]
            cval = float(value(child_center[None, :])[0])
            best = max(best, cval)
            raw = float(np.abs(phi(child_center[None, :]))[0])
            ub = upper(child_center, child_half, raw)
            if ub > best * (1.0 + rel):
                heapq.heappush(heap, (-ub, next(counter), child_center, child_half))
    raise CertificationError("branch-and-bound iteration cap exceeded")


def schwartz_norm(phi: TestFunction, n: int, m: int, rel_err: float = 0.01) -> float:
    """Seminorm sup_x max(1,|x|^n) max_{|k| <= m} |D^k phi(x)|, certified to rel_err."""
    if n < 0 or m < 0:
        raise ValueError("seminorm indices must be non-negative")
    if m > DERIVATIVE_CAP:
        raise DerivativeCapExceeded(f"derivative order {m} exceeds cap {DERIVATIVE_CAP}")
    if not phi.atoms:
        raise DegenerateTestFunction("zero test function has zero seminorm")
    out = 0.0
    for k in mi.indices_up_to(phi.dim, m):
        out = max(out, certified_weighted_sup(derivative(phi, k), n, rel_err))
    return out


def sup_abs(phi: TestFunction, rel_err: float = 0.01) -> float:
    """Certified sup |phi|."""
    return certified_weighted_sup(phi, 0, rel_err)


def radial_tail_bound(phi: TestFunction, radius: float) -> float:
    """Upper bound of sup_{|x| >= radius} |phi(x)| (euclidean ball complement)."""
    if radius <= 0:
        return sum(abs(a.coeff) * HERMITE_SUP**phi.dim for a in phi.atoms)
    d = phi.dim
    floor = radius / math.sqrt(d)
    total = 0.0
    for a in phi.atoms:
        best = 0.0
        for i in range(d):
            piece = abs(a.coeff)
            for l in range(d):
                t = max(0.0, floor - abs(a.shift[l])) / a.scale[l] if l == i else 0.0
                piece *= _axis_tail(a.hermite[l], 0, t)
            best = max(best, piece)
        total += best
    return total


# -- compactly supported polynomial probes ----------------------------------


@dataclass(frozen=True)
class BumpProbe:
    """((x-center)^index / index!) times a fixed plateau bump of the given radius.

    The plateau profile equals 1 for |x-center| < radius/3 and vanishes for
    |x-center| > radius/2, so near its center the probe is exactly the
    normalized monomial.  Probes are evaluated only through probe_derivative
    (at the center) or at points outside the support; callers enforce
    radius < local separation / 2.
    """

    center: tuple[float, ...]
    index: tuple[int, ...]
    radius: float

    def __post_init__(self):
        if not 0.0 < self.radius < 1.0:
            raise ValueError("probe radius must lie in (0, 1)")
        if len(self.center) != len(self.index):
            raise DimensionMismatch("probe center and index dimensions differ")

    @property
    def dim(self) -> int:
        return len(self.center)

    def __call__(self, x) -> float | np.ndarray:
        pts = np.asarray(x, dtype=float)
        scalar = pts.ndim == 1
        if scalar:
            pts = pts[None, :]
        rel = pts - np.asarray(self.center)
        t = np.linalg.norm(rel, axis=1) / self.radius
        mono = np.ones(pts.shape[0])
        for axis, power in enumerate(self.index):
            if power:
                mono *= rel[:, axis] ** power
        mono /= mi.factorial(self.index)
        out = mono * _plateau(t)
        return float(out[0]) if scalar else out


def _plateau(t: np.ndarray) -> np.ndarray:
    """Smoothed step: 1 for t < 1/3, 0 for t > 1/2, exp(-1/u) blend between."""
    t = np.asarray(t, dtype=float)
    u = np.clip((0.5 - t) * 6.0, 0.0, 1.0)  # rescale [1/3, 1/2] to [0, 1]
    with np.errstate(divide="ignore", over="ignore"):
        ramp_up = np.where(u > 0.0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        ramp_dn = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return ramp_up / (ramp_up + ramp_dn)


def probe_derivative(probe: BumpProbe, k: Sequence[int]) -> float:
    """Value of D^k of the probe at its own center: 1 if k equals the probe index."""
    k = mi.as_multi_index(k, probe.dim)
    return 1.0 if k == probe.index else 0.0
