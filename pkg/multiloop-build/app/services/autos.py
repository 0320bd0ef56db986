"""
Finite-order automorphisms, commuting tuples and the GL_n(Z) action.
"""

import logging
from fractions import Fraction
from typing import TYPE_CHECKING, Dict, List, Mapping, Optional, Sequence, Set, Tuple

from app.core.config import get_settings
from app.core.exceptions import (
    DimensionMismatchError,
    FieldTooSmallError,
    GradeViolationError,
    NotBracketPreservingError,
    NotCommutingError,
    NotInvertibleError,
    NotNilpotentError,
    OrderBoundExceededError,
    UnsupportedError,
)
from app.services import lattice
from app.services.cycfield import ONE, CycNum, root_of_unity
from app.services.liecore import LieAlgebra, extend_from_generators
from app.services.linalg import (
    CoordinateSolver,
    Matrix,
    Vector,
    columns_to_matrix,
    determinant,
    identity_matrix,
    inverse,
    is_zero_vector,
    mat_equal,
    mat_mul,
    mat_scale,
    mat_vec,
    matrix_key,
    vec_combine,
    vec_scale,
)

if TYPE_CHECKING:
    from app.services.roots import RootDatum, Sl2Triple

logger = logging.getLogger(__name__)


def _order(matrix: Matrix, bound: int) -> int:
    eye = identity_matrix(len(matrix))
    power = matrix
    for k in range(1, bound + 1):
        if mat_equal(power, eye):
            return k
        power = mat_mul(power, matrix)
    raise OrderBoundExceededError(f"no power up to {bound} is the identity", witness={"bound": bound})


class Automorphism:
    """Validated automorphism; ``matrix`` columns are the images of the basis."""

    def __init__(self, algebra: LieAlgebra, matrix: Matrix, order: int, name: str = ""):
        self.algebra = algebra
        self.matrix = [tuple(row) for row in matrix]
        self.order = order
        self.name = name

    def apply(self, v: Sequence[CycNum]) -> Vector:
        return mat_vec(self.matrix, v)

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self after other."""
        product = mat_mul(self.matrix, other.matrix)
        return Automorphism(self.algebra, product, _order(product, get_settings().order_bound))

    def power(self, k: int) -> "Automorphism":
        k %= self.order
        result = identity_matrix(self.algebra.dim)
        base = self.matrix
        e = k
        while e:
            if e & 1:
                result = mat_mul(result, base)
            e >>= 1
            if e:
                base = mat_mul(base, base)
        return Automorphism(self.algebra, result, self.order // _gcd(self.order, k) if k else 1)

    def inverse(self) -> "Automorphism":
        return self.power(self.order - 1)

    def conjugate(self, phi: Matrix, phi_inverse: Optional[Matrix] = None) -> "Automorphism":
        """phi o self o phi^-1 (same order)."""
        inv = phi_inverse if phi_inverse is not None else inverse(phi)
        return Automorphism(self.algebra, mat_mul(mat_mul(phi, self.matrix), inv), self.order, self.name)

    def is_identity(self) -> bool:
        return self.order == 1

    def key(self) -> Tuple[Vector, ...]:
        return matrix_key(self.matrix)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Automorphism):
            return NotImplemented
        return mat_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"Automorphism({self.name or '?'}, order={self.order})"


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def bracket_violation(g: LieAlgebra, matrix: Matrix) -> Optional[Tuple[int, int]]:
    """First basis pair (i, j) with M[e_i, e_j] != [M e_i, M e_j]."""
    columns = [tuple(row[j] for row in matrix) for j in range(g.dim)]
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            lhs = mat_vec(matrix, g.bracket_basis(i, j))
            if lhs != g.bracket(columns[i], columns[j]):
                return (i, j)
    return None


def check_automorphism(
    g: LieAlgebra, matrix: Sequence[Sequence[CycNum]], name: str = "", order_bound: Optional[int] = None
) -> Automorphism:
    """
    Validate a matrix as a finite-order automorphism.

    Raises:
        DimensionMismatchError, NotInvertibleError, NotBracketPreservingError,
        OrderBoundExceededError
    """
    m = [tuple(row) for row in matrix]
    if len(m) != g.dim or any(len(row) != g.dim for row in m):
        raise DimensionMismatchError(f"automorphism matrix must be {g.dim}x{g.dim}")
    if determinant(m).is_zero():
        raise NotInvertibleError("automorphism matrix is singular", witness={"name": name})
    pair = bracket_violation(g, m)
    if pair is not None:
        i, j = pair
        raise NotBracketPreservingError(
            f"bracket of {g.labels[i]} and {g.labels[j]} is not preserved",
            witness={"pair": [i, j], "name": name},
        )
    bound = order_bound if order_bound is not None else get_settings().order_bound
    order = _order(m, bound)
    logger.debug(f"validated automorphism {name or '?'} of {g.name}, order {order}")
    return Automorphism(g, m, order, name)


# ---------------------------------------------------------------------------
# Named automorphisms
# ---------------------------------------------------------------------------


def identity(g: LieAlgebra) -> Automorphism:
    return Automorphism(g, identity_matrix(g.dim), 1, "identity")


def _require_chevalley(g: LieAlgebra) -> None:
    if g.chevalley is None:
        raise UnsupportedError(f"named automorphisms need Chevalley generators; {g.name} has none")


def chevalley_involution(g: LieAlgebra) -> Automorphism:
    """e_i -> -f_i, f_i -> -e_i."""
    _require_chevalley(g)
    data = g.chevalley
    assert data is not None
    minus = CycNum.rational(-1)
    e_images = [vec_scale(minus, g.basis_vector(k)) for k in data.f]
    f_images = [vec_scale(minus, g.basis_vector(k)) for k in data.e]
    return check_automorphism(g, extend_from_generators(g, e_images, f_images), "chevalley_involution")


def diagram(g: LieAlgebra, permutation: Sequence[int]) -> Automorphism:
    """Diagram automorphism e_i -> e_pi(i), f_i -> f_pi(i); ``permutation`` is 1-based."""
    _require_chevalley(g)
    data = g.chevalley
    assert data is not None
    pi = [p - 1 for p in permutation]
    if sorted(pi) != list(range(data.rank)):
        raise UnsupportedError(f"{list(permutation)} is not a permutation of 1..{data.rank}")
    a = data.cartan_matrix
    for i in range(data.rank):
        for j in range(data.rank):
            if a[pi[i]][pi[j]] != a[i][j]:
                raise UnsupportedError(
                    f"{list(permutation)} is not a symmetry of the Dynkin diagram",
                    witness={"pair": [i + 1, j + 1]},
                )
    e_images = [g.basis_vector(data.e[pi[i]]) for i in range(data.rank)]
    f_images = [g.basis_vector(data.f[pi[i]]) for i in range(data.rank)]
    return check_automorphism(g, extend_from_generators(g, e_images, f_images), f"diagram{list(permutation)}")


def torus(g: LieAlgebra, weights: Sequence[object]) -> Automorphism:
    """e_i -> zeta^{w_i} e_i, f_i -> zeta^{-w_i} f_i for rational weights w_i."""
    _require_chevalley(g)
    data = g.chevalley
    assert data is not None
    if len(weights) != data.rank:
        raise DimensionMismatchError(f"torus needs {data.rank} weights, got {len(weights)}")
    qs = [lattice.parse_fraction(w) for w in weights]
    e_images = [vec_scale(root_of_unity(q), g.basis_vector(data.e[i])) for i, q in enumerate(qs)]
    f_images = [vec_scale(root_of_unity(-q), g.basis_vector(data.f[i])) for i, q in enumerate(qs)]
    label = ",".join(str(q) for q in qs)
    return check_automorphism(g, extend_from_generators(g, e_images, f_images), f"torus[{label}]")


def from_named(g: LieAlgebra, named: str, argument: Optional[Sequence[object]] = None) -> Automorphism:
    if named == "identity":
        return identity(g)
    if named == "chevalley_involution":
        return chevalley_involution(g)
    if named == "diagram":
        return diagram(g, [int(str(p)) for p in (argument or [])])
    if named == "torus":
        return torus(g, list(argument or []))
    raise UnsupportedError(f"unknown named automorphism {named!r}")


# ---------------------------------------------------------------------------
# Tuples
# ---------------------------------------------------------------------------


class AutTuple:
    """Pairwise commuting automorphisms with sigma_i^{m_i} = id."""

    def __init__(self, autos: Sequence[Automorphism], m: Optional[Sequence[int]] = None):
        if not autos:
            raise DimensionMismatchError("an automorphism tuple needs at least one entry")
        self.autos = list(autos)
        self.algebra = self.autos[0].algebra
        for i, a in enumerate(self.autos):
            for j in range(i + 1, len(self.autos)):
                b = self.autos[j]
                if not mat_equal(mat_mul(a.matrix, b.matrix), mat_mul(b.matrix, a.matrix)):
                    raise NotCommutingError(
                        f"sigma_{i + 1} and sigma_{j + 1} do not commute",
                        witness={"pair": [i + 1, j + 1]},
                    )
        self.m: Tuple[int, ...] = tuple(m) if m is not None else self.orders
        if len(self.m) != len(self.autos):
            raise DimensionMismatchError(f"m has {len(self.m)} entries for {len(self.autos)} automorphisms")
        for i, (a, mi) in enumerate(zip(self.autos, self.m)):
            if mi < 1 or mi % a.order:
                raise GradeViolationError(
                    f"sigma_{i + 1}^{mi} is not the identity (order {a.order})",
                    component=str(i + 1),
                )

    @property
    def n(self) -> int:
        return len(self.autos)

    @property
    def orders(self) -> Tuple[int, ...]:
        return tuple(a.order for a in self.autos)

    def __getitem__(self, i: int) -> Automorphism:
        return self.autos[i]

    def __iter__(self):  # type: ignore[no-untyped-def]
        return iter(self.autos)

    def __len__(self) -> int:
        return len(self.autos)

    def with_m(self, m: Sequence[int]) -> "AutTuple":
        return AutTuple(self.autos, m)

    def conjugate(self, phi: Matrix) -> "AutTuple":
        inv = inverse(phi)
        return AutTuple([a.conjugate(phi, inv) for a in self.autos], self.m)

    def compose(self, other: "AutTuple") -> "AutTuple":
        """Componentwise product self_i o other_i, graded by true orders."""
        return AutTuple([a.compose(b) for a, b in zip(self.autos, other.autos)])

    def __repr__(self) -> str:
        return f"AutTuple(orders={self.orders}, m={self.m})"


def gl_action(sigma: AutTuple, p: Sequence[Sequence[int]]) -> AutTuple:
    """sigma^P with (sigma^P)_j = prod_i sigma_i^{p_ij}; m is reset to the true orders."""
    p = lattice.require_unimodular(p)
    n = sigma.n
    if len(p) != n:
        raise DimensionMismatchError(f"P must be {n}x{n}")
    autos = []
    for j in range(n):
        product = identity_matrix(sigma.algebra.dim)
        for i in range(n):
            if p[i][j]:
                product = mat_mul(product, sigma[i].power(p[i][j]).matrix)
        autos.append(
            Automorphism(sigma.algebra, product, _order(product, get_settings().order_bound), f"sigma^P_{j + 1}")
        )
    return AutTuple(autos)


def tau_twist(
    g: LieAlgebra,
    rootdatum: "RootDatum",
    s: Mapping[int, Sequence[object]],
    m: Optional[Sequence[int]] = None,
) -> AutTuple:
    """
    tau_i acting on g_alpha by zeta_{m_i}^{-s_i(alpha)} (or zeta^{-s_i(alpha)}
    when ``m`` is None) and trivially on g_0; ``s`` maps base-root indices to
    n-vectors.
    """
    base_values = {k: lattice.fractions(v) for k, v in s.items()}
    n = len(next(iter(base_values.values()))) if base_values else (len(m) if m is not None else 0)
    if n == 0:
        raise DimensionMismatchError("tau twist needs the nullity n")
    settings = get_settings()

    def s_of(root: Tuple[int, ...]) -> Tuple[Fraction, ...]:
        total = [Fraction(0)] * n
        for k, a in enumerate(root):
            if a:
                for i, v in enumerate(base_values.get(k, (Fraction(0),) * n)):
                    total[i] += a * v
        return tuple(total)

    vectors: List[Vector] = list(rootdatum.zero_space)
    scalars: List[List[CycNum]] = [[ONE] * len(vectors) for _ in range(n)]
    for root in rootdatum.roots:
        values = s_of(root)
        for i in range(n):
            q = -values[i] / m[i] if m is not None else -values[i]
            if not settings.auto_extend_field and settings.field_order and settings.field_order % q.denominator:
                raise FieldTooSmallError(
                    f"zeta^{q} is outside Q(zeta_{settings.field_order})", order=settings.field_order
                )
            scalars[i].extend([root_of_unity(q)] * len(rootdatum.root_spaces[root]))
        vectors.extend(rootdatum.root_spaces[root])
    solver = CoordinateSolver(vectors, g.dim)
    coords = [solver.coordinates(g.basis_vector(j), check=False) for j in range(g.dim)]
    autos = []
    for i in range(n):
        columns = []
        for c in coords:
            assert c is not None
            columns.append(_combine(vectors, [x * d for x, d in zip(c, scalars[i])], g.dim))
        matrix = columns_to_matrix(columns)
        autos.append(Automorphism(g, matrix, _order(matrix, settings.order_bound), f"tau_{i + 1}"))
    return AutTuple(autos)


def _combine(vectors: Sequence[Vector], coeffs: Sequence[CycNum], dim: int) -> Vector:
    return vec_combine(zip(coeffs, vectors), dim)


def _exp_nilpotent(n: Matrix, label: str) -> Matrix:
    size = len(n)
    result = identity_matrix(size)
    term = identity_matrix(size)
    for k in range(1, size + 2):
        term = mat_scale(CycNum.rational(Fraction(1, k)), mat_mul(term, n))
        if all(is_zero_vector(row) for row in term):
            return result
        result = [tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(result, term)]
    raise NotNilpotentError(f"ad({label}) is not nilpotent", witness={"steps": size + 1})


def inner_reflection(g: LieAlgebra, triple: "Sl2Triple") -> Automorphism:
    """exp(ad x+) exp(-ad x-) exp(ad x+)."""
    plus = _exp_nilpotent(g.ad(triple.x_plus), "x+")
    minus = _exp_nilpotent(mat_scale(CycNum.rational(-1), g.ad(triple.x_minus)), "x-")
    matrix = mat_mul(mat_mul(plus, minus), plus)
    return check_automorphism(g, matrix, f"theta[{triple.alpha}]")


# ---------------------------------------------------------------------------
# Generated groups
# ---------------------------------------------------------------------------


def relation_set(sigma: AutTuple) -> Tuple[Tuple[int, ...], Set[Tuple[int, ...]]]:
    """
    Exponent vectors k in prod [0, ord_i) with prod sigma_i^{k_i} = id, together
    with the orders.
    """
    orders = sigma.orders
    size = 1
    for o in orders:
        size *= o
    if size > get_settings().order_bound ** 2:
        raise OrderBoundExceededError("exponent box too large", witness={"orders": list(orders)})
    eye_key = matrix_key(identity_matrix(sigma.algebra.dim))
    products: Dict[Tuple[int, ...], Matrix] = {}
    kernel: Set[Tuple[int, ...]] = set()
    for k in lattice.fundamental_box(orders):
        last = max((i for i, x in enumerate(k) if x), default=None)
        if last is None:
            products[k] = identity_matrix(sigma.algebra.dim)
        else:
            previous = tuple(x - 1 if i == last else x for i, x in enumerate(k))
            products[k] = mat_mul(products[previous], sigma[last].matrix)
        if matrix_key(products[k]) == eye_key:
            kernel.add(k)
    return orders, kernel


def group_order(sigma: AutTuple) -> int:
    """|<sigma_1, ..., sigma_n>| by breadth-first closure with matrix dedup."""
    bound = get_settings().order_bound
    start = identity_matrix(sigma.algebra.dim)
    seen = {matrix_key(start)}
    frontier = [start]
    while frontier:
        nxt = []
        for x in frontier:
            for a in sigma:
                y = mat_mul(x, a.matrix)
                key = matrix_key(y)
                if key not in seen:
                    seen.add(key)
                    nxt.append(y)
                    if len(seen) > bound:
                        raise OrderBoundExceededError(
                            f"generated group exceeds {bound} elements", witness={"bound": bound}
                        )
        frontier = nxt
    return len(seen)
