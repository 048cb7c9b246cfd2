"""Exact rational linear algebra: vectors and matrices as tuples of Fractions,
Gauss-Jordan kernels and inverses, and a small Bland-rule simplex for
feasibility/optimization of {Ax = b, x >= 0}.  Internal support module."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vec = tuple[Fraction, ...]
Mat = tuple[Vec, ...]


def vec(xs: Iterable) -> Vec:
    return tuple(Fraction(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Mat:
    return tuple(vec(r) for r in rows)


def zeros(n: int) -> Vec:
    return (Fraction(0),) * n


def identity(n: int) -> Mat:
    return tuple(tuple(Fraction(1) if i == j else Fraction(0) for j in range(n))
                 for i in range(n))


def add(x: Vec, y: Vec) -> Vec:
    return tuple(a + b for a, b in zip(x, y, strict=True))


def sub(x: Vec, y: Vec) -> Vec:
    return tuple(a - b for a, b in zip(x, y, strict=True))


def scale(c, x: Vec) -> Vec:
    c = Fraction(c)
    return tuple(c * a for a in x)


def neg(x: Vec) -> Vec:
    return tuple(-a for a in x)


def dot(x: Vec, y: Vec) -> Fraction:
    return sum((a * b for a, b in zip(x, y, strict=True)), Fraction(0))


def mat_vec(m: Mat, x: Vec) -> Vec:
    return tuple(dot(row, x) for row in m)


def mat_mul(a: Mat, b: Mat) -> Mat:
    bt = transpose(b)
    return tuple(tuple(dot(ra, cb) for cb in bt) for ra in a)


def transpose(m: Mat) -> Mat:
    return tuple(zip(*m)) if m else ()


def mat_sub(a: Mat, b: Mat) -> Mat:
    return tuple(sub(ra, rb) for ra, rb in zip(a, b, strict=True))


def mat_eq(a: Mat, b: Mat) -> bool:
    return a == b


def is_zero(x: Vec) -> bool:
    return all(a == 0 for a in x)


def rref(m: Sequence[Vec]) -> tuple[list[Vec], list[int]]:
    """Reduced row echelon form; returns (rows, pivot column indices)."""
    rows = [list(r) for r in m]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = Fraction(1) / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return [tuple(row) for row in rows[:r]], pivots


def rank(m: Sequence[Vec]) -> int:
    return len(rref(m)[0])


def nullspace(m: Sequence[Vec]) -> list[Vec]:
    """Basis of {x : m x = 0}."""
    if not m:
        return []
    ncols = len(m[0])
    rows, pivots = rref(m)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for r, p in zip(rows, pivots):
            x[p] = -r[f]
        basis.append(tuple(x))
    return basis


def mat_inv(m: Mat) -> Mat:
    n = len(m)
    aug = [list(m[i]) + list(identity(n)[i]) for i in range(n)]
    rows, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("singular matrix")
    return tuple(tuple(row[n:]) for row in rows)


def solve(m: Mat, b: Vec) -> Vec | None:
    """One solution of m x = b, or None if inconsistent."""
    n = len(m[0]) if m else 0
    aug = [list(r) + [bv] for r, bv in zip(m, b, strict=True)]
    rows, pivots = rref(aug)
    for row, p in zip(rows, pivots):
        if p == n:
            return None
    x = [Fraction(0)] * n
    for row, p in zip(rows, pivots):
        x[p] = row[-1]
    return tuple(x)


def span_contains(basis: Sequence[Vec], x: Vec) -> bool:
    if is_zero(x):
        return True
    if not basis:
        return False
    return rank(list(basis) + [x]) == rank(basis)


# --- simplex ---------------------------------------------------------------

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


def _pivot(T: list[list[Fraction]], basis: list[int], r: int, c: int) -> None:
    inv = Fraction(1) / T[r][c]
    T[r] = [x * inv for x in T[r]]
    for i in range(len(T)):
        if i != r and T[i][c] != 0:
            f = T[i][c]
            T[i] = [x - f * y for x, y in zip(T[i], T[r])]
    basis[r] = c


def _simplex_core(T: list[list[Fraction]], basis: list[int], ncols: int) -> str:
    # maximizes the objective stored in the last tableau row; Bland's rule
    while True:
        obj = T[-1]
        c = next((j for j in range(ncols) if obj[j] < 0), None)
        if c is None:
            return OPTIMAL
        best, r = None, None
        for i in range(len(T) - 1):
            if T[i][c] > 0:
                ratio = T[i][-1] / T[i][c]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[r]):
                    best, r = ratio, i
        if r is None:
            return UNBOUNDED
        _pivot(T, basis, r, c)


def lp_solve(A: Sequence[Vec], b: Vec, c: Vec | None = None):
    """max c.x subject to A x = b, x >= 0, exactly.

    Returns (status, x, value); x and value are None when infeasible, and
    value is None when unbounded.  Pass c=None for pure feasibility.
    """
    m, n = len(A), (len(A[0]) if A else (len(c) if c else 0))
    A = [list(r) for r in A]
    b = list(b)
    for i in range(m):
        if b[i] < 0:
            A[i] = [-x for x in A[i]]
            b[i] = -b[i]
    # phase 1: maximize -sum(artificials); invariant: last row holds reduced
    # costs and, in its final entry, the current objective value
    T = [A[i] + [Fraction(1) if j == i else Fraction(0) for j in range(m)] + [b[i]]
         for i in range(m)]
    obj = [Fraction(0)] * n + [Fraction(1)] * m + [Fraction(0)]
    for i in range(m):
        obj = [x - y for x, y in zip(obj, T[i])]
    T.append(obj)
    basis = [n + i for i in range(m)]
    _simplex_core(T, basis, n + m)
    if T[-1][-1] != 0:
        return INFEASIBLE, None, None
    # drive artificials out of the basis where possible, then drop them
    for i in range(m):
        if basis[i] >= n:
            cidx = next((j for j in range(n) if T[i][j] != 0), None)
            if cidx is not None:
                _pivot(T, basis, i, cidx)
    keep = [i for i in range(m) if basis[i] < n]
    T = [[T[i][j] for j in range(n)] + [T[i][-1]] for i in keep]
    basis = [basis[i] for i in keep]
    if c is None:
        x = [Fraction(0)] * n
        for i, bi in enumerate(basis):
            x[bi] = T[i][-1]
        return OPTIMAL, tuple(x), Fraction(0)
    # phase 2
    obj = [-Fraction(ci) for ci in c] + [Fraction(0)]
    for i, bi in enumerate(basis):
        if obj[bi] != 0:
            f = obj[bi]
            obj = [x - f * y for x, y in zip(obj, T[i])]
    T.append(obj)
    status = _simplex_core(T, basis, n)
    x = [Fraction(0)] * n
    for i, bi in enumerate(basis):
        x[bi] = T[i][-1]
    if status == UNBOUNDED:
        return UNBOUNDED, tuple(x), None
    return OPTIMAL, tuple(x), T[-1][-1]


def feasible(A: Sequence[Vec], b: Vec) -> bool:
    """Exact feasibility of {A x = b, x >= 0}."""
    return lp_solve(A, b, None)[0] == OPTIMAL
