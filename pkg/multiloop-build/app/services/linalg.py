"""
Exact linear algebra over cyclotomic numbers.

Matrices are lists of row tuples, vectors are tuples. Elimination is
fraction-free (Bareiss) for the dense routines; ``SparseEliminator`` handles
the large, very sparse systems of the centroid and form-uniqueness solvers.
"""

import logging
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from app.core.exceptions import DimensionMismatchError, NotInvertibleError
from app.services.cycfield import ONE, ZERO, CycNum

logger = logging.getLogger(__name__)

Vector = Tuple[CycNum, ...]
Matrix = List[Vector]


# ---------------------------------------------------------------------------
# Vectors and matrices
# ---------------------------------------------------------------------------


def zero_vector(n: int) -> Vector:
    return (ZERO,) * n


def unit_vector(n: int, i: int) -> Vector:
    return tuple(ONE if k == i else ZERO for k in range(n))


def vec_add(a: Sequence[CycNum], b: Sequence[CycNum]) -> Vector:
    if len(a) != len(b):
        raise DimensionMismatchError(f"vector lengths {len(a)} and {len(b)}")
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a: Sequence[CycNum], b: Sequence[CycNum]) -> Vector:
    if len(a) != len(b):
        raise DimensionMismatchError(f"vector lengths {len(a)} and {len(b)}")
    return tuple(x - y for x, y in zip(a, b))


def vec_scale(c: CycNum, a: Sequence[CycNum]) -> Vector:
    if c.is_zero():
        return zero_vector(len(a))
    return tuple(c * x if x else x for x in a)


def vec_combine(terms: Iterable[Tuple[CycNum, Sequence[CycNum]]], n: int) -> Vector:
    out = [ZERO] * n
    for c, v in terms:
        if c.is_zero():
            continue
        for k, x in enumerate(v):
            if x:
                out[k] = out[k] + c * x
    return tuple(out)


def is_zero_vector(a: Sequence[CycNum]) -> bool:
    return all(x.is_zero() for x in a)


def dot(a: Sequence[CycNum], b: Sequence[CycNum]) -> CycNum:
    total = ZERO
    for x, y in zip(a, b):
        if x and y:
            total = total + x * y
    return total


def identity_matrix(n: int) -> Matrix:
    return [unit_vector(n, i) for i in range(n)]


def transpose(a: Sequence[Sequence[CycNum]]) -> Matrix:
    if not a:
        return []
    return [tuple(row[j] for row in a) for j in range(len(a[0]))]


def mat_vec(a: Sequence[Sequence[CycNum]], v: Sequence[CycNum]) -> Vector:
    return tuple(dot(row, v) for row in a)


def mat_mul(a: Sequence[Sequence[CycNum]], b: Sequence[Sequence[CycNum]]) -> Matrix:
    if a and len(a[0]) != len(b):
        raise DimensionMismatchError(f"cannot multiply {len(a)}x{len(a[0])} by {len(b)}x.")
    cols = len(b[0]) if b else 0
    out: Matrix = []
    for row in a:
        acc = [ZERO] * cols
        for k, x in enumerate(row):
            if not x:
                continue
            for j, y in enumerate(b[k]):
                if y:
                    acc[j] = acc[j] + x * y
        out.append(tuple(acc))
    return out


def mat_sub(a: Sequence[Sequence[CycNum]], b: Sequence[Sequence[CycNum]]) -> Matrix:
    return [vec_sub(x, y) for x, y in zip(a, b)]


def mat_scale(c: CycNum, a: Sequence[Sequence[CycNum]]) -> Matrix:
    return [vec_scale(c, row) for row in a]


def mat_equal(a: Sequence[Sequence[CycNum]], b: Sequence[Sequence[CycNum]]) -> bool:
    return len(a) == len(b) and all(tuple(x) == tuple(y) for x, y in zip(a, b))


def columns_to_matrix(columns: Sequence[Sequence[CycNum]]) -> Matrix:
    """Matrix whose j-th column is ``columns[j]``."""
    return transpose(columns)


def matrix_key(a: Sequence[Sequence[CycNum]]) -> Tuple[Vector, ...]:
    return tuple(tuple(row) for row in a)


# ---------------------------------------------------------------------------
# Fraction-free elimination
# ---------------------------------------------------------------------------


def echelon_form(rows: Sequence[Sequence[CycNum]]) -> Tuple[Matrix, List[int], int]:
    """
    Bareiss fraction-free row echelon form.

    Returns:
        (echelon rows, pivot columns, number of row swaps)
    """
    m = [list(r) for r in rows]
    if not m:
        return [], [], 0
    n_rows, n_cols = len(m), len(m[0])
    pivots: List[int] = []
    previous = ONE
    swaps = 0
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        p = next((i for i in range(r, n_rows) if not m[i][c].is_zero()), None)
        if p is None:
            continue
        if p != r:
            m[p], m[r] = m[r], m[p]
            swaps += 1
        pivot = m[r][c]
        for i in range(r + 1, n_rows):
            factor = m[i][c]
            for j in range(c + 1, n_cols):
                value = pivot * m[i][j]
                if factor and m[r][j]:
                    value = value - factor * m[r][j]
                m[i][j] = value / previous if value else value
            m[i][c] = ZERO
        previous = pivot
        pivots.append(c)
        r += 1
    return [tuple(row) for row in m], pivots, swaps


def rank(rows: Sequence[Sequence[CycNum]]) -> int:
    return len(echelon_form(rows)[1])


def determinant(a: Sequence[Sequence[CycNum]]) -> CycNum:
    n = len(a)
    if any(len(row) != n for row in a):
        raise DimensionMismatchError("determinant of a non-square matrix")
    if n == 0:
        return ONE
    m, pivots, swaps = echelon_form(a)
    if len(pivots) < n:
        return ZERO
    value = m[n - 1][n - 1]
    return -value if swaps % 2 else value


def nullspace(rows: Sequence[Sequence[CycNum]], n_cols: Optional[int] = None) -> List[Vector]:
    """Basis of {x : A x = 0} by back-substitution on the echelon form."""
    if not rows:
        if n_cols is None:
            raise DimensionMismatchError("nullspace of an empty matrix needs n_cols")
        return [unit_vector(n_cols, i) for i in range(n_cols)]
    n = len(rows[0])
    m, pivots, _ = echelon_form(rows)
    pivot_set = set(pivots)
    free = [c for c in range(n) if c not in pivot_set]
    basis: List[Vector] = []
    for f in free:
        x = [ZERO] * n
        x[f] = ONE
        for r in range(len(pivots) - 1, -1, -1):
            p = pivots[r]
            s = ZERO
            for c in range(p + 1, n):
                if m[r][c] and x[c]:
                    s = s + m[r][c] * x[c]
            x[p] = -s / m[r][p] if s else ZERO
        basis.append(tuple(x))
    return basis


def solve(a: Sequence[Sequence[CycNum]], b: Sequence[CycNum]) -> Optional[Vector]:
    """One solution of A x = b, or None if inconsistent."""
    if not a:
        return None
    n = len(a[0])
    augmented = [tuple(row) + (rhs,) for row, rhs in zip(a, b)]
    m, pivots, _ = echelon_form(augmented)
    if n in pivots:
        return None
    x = [ZERO] * n
    for r in range(len(pivots) - 1, -1, -1):
        p = pivots[r]
        s = m[r][n]
        for c in range(p + 1, n):
            if m[r][c] and x[c]:
                s = s - m[r][c] * x[c]
        x[p] = s / m[r][p]
    return tuple(x)


def inverse(a: Sequence[Sequence[CycNum]]) -> Matrix:
    n = len(a)
    columns = []
    for i in range(n):
        x = solve(a, unit_vector(n, i))
        if x is None:
            raise NotInvertibleError("matrix is singular", witness={"column": i})
        columns.append(x)
    return columns_to_matrix(columns)


# ---------------------------------------------------------------------------
# Subspaces
# ---------------------------------------------------------------------------


class IncrementalBasis:
    """Echelon-reduced span that grows one vector at a time."""

    def __init__(self, dim: int):
        self.dim = dim
        self._rows: List[Tuple[int, List[CycNum]]] = []
        self.vectors: List[Vector] = []

    def _reduce(self, v: Sequence[CycNum]) -> List[CycNum]:
        w = list(v)
        for p, row in self._rows:
            c = w[p]
            if c:
                for j in range(p, self.dim):
                    if row[j]:
                        w[j] = w[j] - c * row[j]
        return w

    def contains(self, v: Sequence[CycNum]) -> bool:
        return is_zero_vector(self._reduce(v))

    def add(self, v: Sequence[CycNum]) -> bool:
        """Add ``v``; returns False when it already lies in the span."""
        w = self._reduce(v)
        p = next((j for j, x in enumerate(w) if x), None)
        if p is None:
            return False
        lead = w[p]
        row = [x / lead if x else x for x in w]
        position = next((k for k, (q, _) in enumerate(self._rows) if q > p), len(self._rows))
        self._rows.insert(position, (p, row))
        self.vectors.append(tuple(v))
        return True

    def __len__(self) -> int:
        return len(self._rows)


def independent_subset(vectors: Sequence[Sequence[CycNum]], dim: Optional[int] = None) -> List[Vector]:
    if not vectors:
        return []
    span = IncrementalBasis(dim if dim is not None else len(vectors[0]))
    for v in vectors:
        span.add(v)
    return span.vectors


def span_dimension(vectors: Sequence[Sequence[CycNum]]) -> int:
    return len(independent_subset(vectors))


def same_span(a: Sequence[Sequence[CycNum]], b: Sequence[Sequence[CycNum]], dim: int) -> bool:
    span = IncrementalBasis(dim)
    for v in a:
        span.add(v)
    if any(not span.contains(v) for v in b):
        return False
    return len(span) == span_dimension(list(b))


class CoordinateSolver:
    """Coordinates with respect to a fixed independent family of vectors."""

    def __init__(self, basis: Sequence[Sequence[CycNum]], dim: int):
        self.basis = [tuple(b) for b in basis]
        self.dim = dim
        k = len(self.basis)
        if k == 0:
            self._rows: List[int] = []
            self._inverse: Matrix = []
            return
        _, pivots, _ = echelon_form(self.basis)
        if len(pivots) < k:
            raise NotInvertibleError("basis vectors are dependent", witness={"size": k})
        self._rows = pivots
        square = [tuple(b[i] for i in pivots) for b in self.basis]
        self._inverse = inverse(square)

    def coordinates(self, v: Sequence[CycNum], check: bool = True) -> Optional[Vector]:
        if not self.basis:
            return () if is_zero_vector(v) else None
        restricted = tuple(v[i] for i in self._rows)
        k = len(self.basis)
        coords = tuple(
            dot(restricted, tuple(self._inverse[r][j] for r in range(k))) for j in range(k)
        )
        if check:
            rebuilt = vec_combine(zip(coords, self.basis), self.dim)
            if rebuilt != tuple(v):
                return None
        return coords


def intersect(u: Sequence[Sequence[CycNum]], w: Sequence[Sequence[CycNum]], dim: int) -> List[Vector]:
    """Basis of span(u) ∩ span(w)."""
    if not u or not w:
        return []
    columns = [tuple(x) for x in u] + [tuple(-y for y in x) for x in w]
    relations = nullspace(columns_to_matrix(columns))
    out = []
    for rel in relations:
        out.append(vec_combine(zip(rel[: len(u)], u), dim))
    return independent_subset(out, dim)


# ---------------------------------------------------------------------------
# Sparse systems
# ---------------------------------------------------------------------------


class SparseEliminator:
    """Row-by-row elimination of sparse equations given as {column: coefficient}."""

    def __init__(self) -> None:
        self._pivots: Dict[int, Dict[int, CycNum]] = {}
        self._order: List[int] = []

    def add(self, equation: Mapping[int, CycNum]) -> bool:
        row = {c: v for c, v in equation.items() if v}
        while row:
            lead = min(row)
            pivot_row = self._pivots.get(lead)
            if pivot_row is None:
                scale = row[lead]
                self._pivots[lead] = {c: v / scale for c, v in row.items()}
                return True
            factor = row[lead]
            for c, v in pivot_row.items():
                updated = row.get(c, ZERO) - factor * v
                if updated:
                    row[c] = updated
                else:
                    row.pop(c, None)
        return False

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def solution_dimension(self, n_unknowns: int) -> int:
        return n_unknowns - self.rank

    def nullspace(self, n_unknowns: int) -> List[Vector]:
        """Basis of the solution space (dense vectors); fine for small systems."""
        pivots = sorted(self._pivots)
        free = [c for c in range(n_unknowns) if c not in self._pivots]
        basis = []
        for f in free:
            x: Dict[int, CycNum] = {f: ONE}
            for p in reversed(pivots):
                s = ZERO
                for c, v in self._pivots[p].items():
                    if c != p and c in x:
                        s = s + v * x[c]
                if s:
                    x[p] = -s
            basis.append(tuple(x.get(c, ZERO) for c in range(n_unknowns)))
        return basis
