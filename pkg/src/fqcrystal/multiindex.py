"""Multi-index arithmetic shared by the distribution and test-function modules.

A multi-index is a tuple of non-negative integers, one entry per axis.  It
indexes mixed partial derivatives and monomials at the same time.
"""

from __future__ import annotations

import math
from itertools import product
from typing import Iterable, Iterator, Sequence

MultiIndex = tuple[int, ...]


def as_multi_index(k: Sequence[int], dim: int | None = None) -> MultiIndex:
    idx = tuple(int(v) for v in k)
    if any(v != w for v, w in zip(idx, k)):
        raise ValueError(f"multi-index entries must be integers, got {k!r}")
    if any(v < 0 for v in idx):
        raise ValueError(f"multi-index entries must be non-negative, got {k!r}")
    if dim is not None and len(idx) != dim:
        raise ValueError(f"multi-index {k!r} does not match dimension {dim}")
    return idx


def total_order(k: MultiIndex) -> int:
    """Sum of the entries (the total derivative/monomial order)."""
    return sum(k)


def zero(dim: int) -> MultiIndex:
    return (0,) * dim


def leq(a: MultiIndex, b: MultiIndex) -> bool:
    """Componentwise a <= b."""
    return all(x <= y for x, y in zip(a, b))


def sub(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x - y for x, y in zip(a, b))


def add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def binomial(a: MultiIndex, b: MultiIndex) -> int:
    """Product of componentwise binomial coefficients C(a_i, b_i)."""
    return math.prod(math.comb(x, y) for x, y in zip(a, b))


def factorial(k: MultiIndex) -> int:
    return math.prod(math.factorial(v) for v in k)


def falling_factorial(k: MultiIndex, b: MultiIndex) -> int:
    """Product over axes of k_i! / (k_i - b_i)!  (requires b <= k)."""
    return math.prod(
        math.factorial(x) // math.factorial(x - y) for x, y in zip(k, b)
    )


def indices_up_to(dim: int, max_total: int) -> list[MultiIndex]:
    """All multi-indices of the given dimension with total order <= max_total.

    Ordered by (total order, lexicographic) so iteration is deterministic.
    """
    out = [
        k
        for k in product(range(max_total + 1), repeat=dim)
        if sum(k) <= max_total
    ]
    out.sort(key=lambda k: (sum(k), k))
    return out


def indices_below(k: MultiIndex) -> Iterator[MultiIndex]:
    """All multi-indices b with b <= k componentwise, same deterministic order."""
    ranges = [range(v + 1) for v in k]
    combos = sorted(product(*ranges), key=lambda b: (sum(b), b))
    return iter(combos)


def monomial(points, k: MultiIndex):
    """Evaluate x^k = prod_i x_i^{k_i} for an (N, d) array of points."""
    import numpy as np

    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    out = np.ones(pts.shape[0])
    for axis, power in enumerate(k):
        if power:
            out = out * pts[:, axis] ** power
    return out
