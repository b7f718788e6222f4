"""Exact integer lattice arithmetic for dimensions up to 3.

Everything here runs on Python ints, so sums and intersections of integer
lattices are computed without rounding.  Floating-point lattices are scaled
to this representation by the caller (see lattice.refine_common_lattice).
"""

from __future__ import annotations

from .errors import RankDeficient

IntMatrix = list[list[int]]  # row-major, columns are generators


def det_int(m: IntMatrix) -> int:
    d = len(m)
    if d == 1:
        return m[0][0]
    if d == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if d == 3:
        return (
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        )
    raise ValueError("only dimensions 1..3 supported")


def adjugate(m: IntMatrix) -> IntMatrix:
    d = len(m)
    if d == 1:
        return [[1]]
    if d == 2:
        return [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]
    if d == 3:
        def cof(i: int, j: int) -> int:
            rows = [r for r in range(3) if r != i]
            cols = [c for c in range(3) if c != j]
            minor = (
                m[rows[0]][cols[0]] * m[rows[1]][cols[1]]
                - m[rows[0]][cols[1]] * m[rows[1]][cols[0]]
            )
            return (-1) ** (i + j) * minor

        # adj(M) = cofactor matrix transposed
        return [[cof(j, i) for j in range(3)] for i in range(3)]
    raise ValueError("only dimensions 1..3 supported")


def transpose(m: IntMatrix) -> IntMatrix:
    return [list(row) for row in zip(*m)]


def matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    return [
        [sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))]
        for i in range(len(a))
    ]


def hnf_basis(columns: list[list[int]], dim: int) -> IntMatrix:
    """Basis of the integer lattice generated by the given columns.

    Gaussian elimination over Z with gcd pivoting; returns a d x d row-major
    matrix whose columns generate the same lattice.  Raises RankDeficient if
    the columns do not span R^dim.
    """
    cols = [list(c) for c in columns if any(c)]
    basis: list[list[int]] = []
    for row in range(dim):
        # Euclid on the row entries until a single column carries the pivot.
        # Integer column operations preserve the generated lattice.
        while True:
            active = [i for i, c in enumerate(cols) if c[row] != 0]
            if len(active) <= 1:
                break
            active.sort(key=lambda i: abs(cols[i][row]))
            piv = cols[active[0]]
            for i in active[1:]:
                q = cols[i][row] // piv[row]
                cols[i] = [cols[i][k] - q * piv[k] for k in range(dim)]
            cols = [c for c in cols if any(c)]
        active = [i for i, c in enumerate(cols) if c[row] != 0]
        if not active:
            raise RankDeficient(f"generators do not span axis {row}")
        piv = cols.pop(active[0])
        if piv[row] < 0:
            piv = [-v for v in piv]
        basis.append(piv)
    # row-major with basis vectors as columns
    return [[basis[j][i] for j in range(dim)] for i in range(dim)]


def lattice_sum_int(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    dim = len(a)
    cols = [[a[i][j] for i in range(dim)] for j in range(dim)]
    cols += [[b[i][j] for i in range(dim)] for j in range(dim)]
    return hnf_basis(cols, dim)


def lattice_intersect_int(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    """Basis of (a Z^d) intersect (b Z^d) for nonsingular integer matrices."""
    dim = len(a)
    da, db = det_int(a), det_int(b)
    if da == 0 or db == 0:
        raise RankDeficient("singular lattice matrix")
    # dual bases over the common denominator D = da*db:
    #   a^{-t} = adj(a)^t / da,   b^{-t} = adj(b)^t / db
    adj_at = transpose(adjugate(a))
    adj_bt = transpose(adjugate(b))
    cols = [[db * adj_at[i][j] for i in range(dim)] for j in range(dim)]
    cols += [[da * adj_bt[i][j] for i in range(dim)] for j in range(dim)]
    h = hnf_basis(cols, dim)  # sum of duals, scaled by D
    dh = det_int(h)
    if dh == 0:
        raise RankDeficient("degenerate dual sum")
    adj_ht = transpose(adjugate(h))
    d_common = da * db
    out = [[0] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(dim):
            num = d_common * adj_ht[i][j]
            q, r = divmod(num, dh)
            if r != 0:
                raise RankDeficient("intersection basis is not integral")
            out[i][j] = q
    return out
