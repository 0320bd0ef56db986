"""
Integer lattices and integer matrices.

Thin wrappers over sympy's exact integer matrices and normal forms. Lattice
bases are lists of integer column vectors; grading degrees are tuples.
"""

import itertools
import logging
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import sympy
from sympy.matrices.normalforms import hermite_normal_form, smith_normal_form
from sympy.polys.domains import ZZ

from app.core.exceptions import NotInvertibleError, NotUnimodularError

logger = logging.getLogger(__name__)

Degree = Tuple[int, ...]
IntMatrix = Tuple[Tuple[int, ...], ...]
RatMatrix = Tuple[Tuple[Fraction, ...], ...]


def to_sympy(rows: Sequence[Sequence[object]]) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(str(x)) for x in row] for row in rows])


def _to_fraction(value: object) -> Fraction:
    r = sympy.Rational(value)
    return Fraction(int(r.p), int(r.q))


def from_sympy(m: sympy.Matrix) -> RatMatrix:
    return tuple(tuple(_to_fraction(m[i, j]) for j in range(m.cols)) for i in range(m.rows))


def as_int_matrix(rows: Sequence[Sequence[object]]) -> IntMatrix:
    out = []
    for row in rows:
        values = []
        for x in row:
            f = Fraction(x) if not isinstance(x, Fraction) else x
            if f.denominator != 1:
                raise NotUnimodularError("matrix has non-integer entries", witness={"entry": str(f)})
            values.append(int(f))
        out.append(tuple(values))
    return tuple(out)


def identity(n: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def diagonal(values: Sequence[object]) -> RatMatrix:
    n = len(values)
    return tuple(
        tuple(Fraction(values[i]) if i == j else Fraction(0) for j in range(n)) for i in range(n)
    )


def mat_mul(a: Sequence[Sequence[object]], b: Sequence[Sequence[object]]) -> RatMatrix:
    return from_sympy(to_sympy(a) * to_sympy(b))


def transpose(a: Sequence[Sequence[object]]) -> Tuple[Tuple[object, ...], ...]:
    return tuple(zip(*a)) if a else ()


def apply(a: Sequence[Sequence[object]], v: Sequence[object]) -> Tuple[Fraction, ...]:
    """Matrix times column vector, exact."""
    return tuple(sum((Fraction(x) * Fraction(y) for x, y in zip(row, v)), Fraction(0)) for row in a)


def apply_int(a: Sequence[Sequence[object]], v: Sequence[int]) -> Optional[Degree]:
    """Matrix times integer vector when the image is integral, else None."""
    image = apply(a, v)
    if any(x.denominator != 1 for x in image):
        return None
    return tuple(int(x) for x in image)


def determinant(a: Sequence[Sequence[object]]) -> Fraction:
    if not a:
        return Fraction(1)
    return _to_fraction(to_sympy(a).det())


def is_unimodular(a: Sequence[Sequence[object]]) -> bool:
    if any(Fraction(x).denominator != 1 for row in a for x in row):
        return False
    return abs(determinant(a)) == 1


def require_unimodular(a: Sequence[Sequence[object]]) -> IntMatrix:
    if not is_unimodular(a):
        raise NotUnimodularError(
            "matrix is not in GL_n(Z)",
            witness={"matrix": [[str(x) for x in row] for row in a]},
        )
    return as_int_matrix(a)


def inverse(a: Sequence[Sequence[object]]) -> RatMatrix:
    m = to_sympy(a)
    if m.det() == 0:
        raise NotInvertibleError("singular rational matrix", witness={"rows": len(a)})
    return from_sympy(m.inv())


def int_inverse(a: Sequence[Sequence[object]]) -> IntMatrix:
    return as_int_matrix(inverse(require_unimodular(a)))


# ---------------------------------------------------------------------------
# Lattices
# ---------------------------------------------------------------------------


def lattice_basis(generators: Sequence[Sequence[int]], n: int) -> List[Degree]:
    """Basis (HNF columns) of the subgroup of Z^n spanned by ``generators``."""
    gens = [tuple(int(x) for x in g) for g in generators if any(g)]
    if not gens:
        return []
    columns = sympy.Matrix(n, len(gens), lambda i, j: gens[j][i])
    hnf = hermite_normal_form(columns)
    basis = []
    for j in range(hnf.cols):
        column = tuple(int(hnf[i, j]) for i in range(n))
        if any(column):
            basis.append(column)
    return basis


def invariant_factors(generators: Sequence[Sequence[int]], n: int) -> List[int]:
    """Nonzero diagonal entries of the Smith normal form of the generator matrix."""
    gens = [tuple(int(x) for x in g) for g in generators]
    if not gens:
        return []
    columns = sympy.Matrix(n, len(gens), lambda i, j: gens[j][i])
    snf = smith_normal_form(columns, domain=ZZ)
    factors = []
    for k in range(min(snf.rows, snf.cols)):
        value = abs(int(snf[k, k]))
        if value:
            factors.append(value)
    return factors


def lattice_rank(generators: Sequence[Sequence[int]], n: int) -> int:
    return len(invariant_factors(generators, n))


def lattice_index(generators: Sequence[Sequence[int]], n: int) -> Optional[int]:
    """[Z^n : L] for a full-rank lattice, None otherwise."""
    factors = invariant_factors(generators, n)
    if len(factors) < n:
        return None
    index = 1
    for f in factors:
        index *= f
    return index


def coordinates(basis: Sequence[Sequence[int]], v: Sequence[object]) -> Optional[Tuple[Fraction, ...]]:
    """Rational coordinates of ``v`` in ``basis`` (independent columns), None if outside the span."""
    n = len(v)
    if not basis:
        return () if not any(v) else None
    columns = sympy.Matrix(n, len(basis), lambda i, j: basis[j][i])
    target = sympy.Matrix(n, 1, lambda i, _: sympy.Rational(str(v[i])))
    try:
        solution, params = columns.gauss_jordan_solve(target)
    except ValueError:
        return None
    if params.shape[0]:
        solution = solution.subs({p: 0 for p in params})
    return tuple(_to_fraction(solution[i, 0]) for i in range(len(basis)))


def contains(basis: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    coords = coordinates(basis, v)
    return coords is not None and all(c.denominator == 1 for c in coords)


def same_lattice(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], n: int) -> bool:
    return all(contains(a, v) for v in b) and all(contains(b, v) for v in a)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def box(radius: int, n: int) -> Iterator[Degree]:
    """All points of [-radius, radius]^n in lexicographic order."""
    return itertools.product(range(-radius, radius + 1), repeat=n)


def fundamental_box(m: Sequence[int]) -> Iterator[Degree]:
    return itertools.product(*(range(mi) for mi in m))


def reduce_mod(v: Sequence[int], m: Sequence[int]) -> Degree:
    return tuple(x % mi for x, mi in zip(v, m))


def _entry_key(x: int) -> Tuple[int, int]:
    # 0 < 1 < -1 < 2 < -2 < ...
    return (abs(x), 0 if x >= 0 else 1)


def matrix_sort_key(p: Sequence[Sequence[int]]) -> Tuple[object, ...]:
    flat = [x for row in p for x in row]
    return (sum(abs(x) for x in flat), tuple(_entry_key(x) for x in flat))


def _elementary(n: int) -> List[IntMatrix]:
    gens: List[IntMatrix] = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for sign in (1, -1):
                rows = [list(r) for r in identity(n)]
                rows[i][j] = sign
                gens.append(tuple(tuple(r) for r in rows))
        rows = [list(r) for r in identity(n)]
        rows[i][i] = -1
        gens.append(tuple(tuple(r) for r in rows))
    return gens


def unimodular_matrices(n: int, bound: int) -> List[IntMatrix]:
    """
    Candidate matrices in GL_n(Z), identity first, then by increasing size.

    For n <= 2 every matrix with entries in [-bound, bound] is listed; for
    larger n, products of at most ``bound`` elementary matrices.
    """
    found = {identity(n)}
    if n <= 2:
        for flat in itertools.product(range(-bound, bound + 1), repeat=n * n):
            p = tuple(tuple(flat[i * n : (i + 1) * n]) for i in range(n))
            if abs(determinant(p)) == 1:
                found.add(p)
    else:
        frontier = {identity(n)}
        gens = _elementary(n)
        for _ in range(bound):
            nxt = set()
            for p in frontier:
                for e in gens:
                    q = as_int_matrix(mat_mul(p, e))
                    if q not in found:
                        found.add(q)
                        nxt.add(q)
            frontier = nxt
    ordered = [identity(n)] + sorted(found - {identity(n)}, key=matrix_sort_key)
    logger.debug(f"enumerated {len(ordered)} unimodular {n}x{n} matrices at bound {bound}")
    return ordered


def parse_fraction(value: object) -> Fraction:
    return Fraction(str(value)) if not isinstance(value, Fraction) else value


def fractions(values: Iterable[object]) -> Tuple[Fraction, ...]:
    return tuple(parse_fraction(v) for v in values)
