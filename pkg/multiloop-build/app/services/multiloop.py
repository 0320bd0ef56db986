"""
Multiloop Lie algebras L_m(g, sigma, h).

The algebra is kept intensionally: the finite grading g = sum g^lambda-bar is
computed once and every component of the infinite-dimensional loop algebra
is looked up by reducing its degree modulo m. Regraded algebras are views
over a source that remap degrees lazily.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Protocol, Sequence, Tuple

from app.core.exceptions import (
    CertificateInvalidError,
    DomainMismatchError,
    GradeViolationError,
)
from app.services import lattice
from app.services.autos import AutTuple, bracket_violation, gl_action
from app.services.cycfield import ZERO, CycNum, lcm
from app.services.lattice import Degree
from app.services.liecore import LieAlgebra
from app.services.linalg import (
    CoordinateSolver,
    Matrix,
    SparseEliminator,
    Vector,
    intersect,
    is_zero_vector,
    mat_equal,
    mat_mul,
    mat_vec,
    same_span,
    vec_add,
    vec_scale,
)
from app.services.roots import RootDatum, RootKey, cartan_subalgebra, root_decomposition
from app.services.spectra import simultaneous_eigenspaces

logger = logging.getLogger(__name__)


def eigengrade(sigma: AutTuple) -> Dict[Degree, List[Vector]]:
    """
    Simultaneous eigenspaces g^lambda-bar: sigma_i acts by zeta_{m_i}^{l_i}.

    Raises:
        GradeViolationError: if an eigenvalue is not an m_i-th root of unity
    """
    g = sigma.algebra
    base_order = 1
    for mi in sigma.m:
        base_order = lcm(base_order, mi)
    blocks = simultaneous_eigenspaces([a.matrix for a in sigma], g.dim, base_order=base_order)
    grading: Dict[Degree, List[Vector]] = {}
    for values, vectors in blocks:
        exponents = []
        for i, value in enumerate(values):
            mi = sigma.m[i]
            exponent = next((l for l in range(mi) if CycNum.zeta(mi, l) == value), None)
            if exponent is None:
                raise GradeViolationError(
                    f"eigenvalue {value} of sigma_{i + 1} is not a {mi}-th root of unity",
                    component=str(i + 1),
                )
            exponents.append(exponent)
        grading.setdefault(tuple(exponents), []).extend(vectors)
    return grading


class LoopElement:
    """Finite sum of x (x) t^lambda, stored as {lambda: x}."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Degree, Sequence[CycNum]]] = None):
        self.terms: Dict[Degree, Vector] = {}
        for degree, x in (terms or {}).items():
            if not is_zero_vector(x):
                self.terms[tuple(degree)] = tuple(x)

    @classmethod
    def monomial(cls, x: Sequence[CycNum], degree: Sequence[int]) -> "LoopElement":
        return cls({tuple(degree): x})

    def __add__(self, other: "LoopElement") -> "LoopElement":
        terms = dict(self.terms)
        for degree, x in other.terms.items():
            terms[degree] = vec_add(terms[degree], x) if degree in terms else x
        return LoopElement(terms)

    def __sub__(self, other: "LoopElement") -> "LoopElement":
        return self + other.scale(CycNum.rational(-1))

    def __neg__(self) -> "LoopElement":
        return self.scale(CycNum.rational(-1))

    def scale(self, c: CycNum) -> "LoopElement":
        return LoopElement({d: vec_scale(c, x) for d, x in self.terms.items()})

    def shift(self, mu: Sequence[int]) -> "LoopElement":
        """Multiplication by the centroid element t^mu."""
        return LoopElement({tuple(a + b for a, b in zip(d, mu)): x for d, x in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LoopElement):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        return f"LoopElement({sorted(self.terms)})"


@dataclass(frozen=True)
class Regrade:
    """A regrading: rho (degree map lambda -> R lambda) or an s-shift."""

    kind: str
    rho: Optional[Tuple[Tuple[Fraction, ...], ...]] = None
    s: Optional[Dict[int, Tuple[int, ...]]] = None

    @classmethod
    def from_rho(cls, matrix: Sequence[Sequence[object]]) -> "Regrade":
        return cls("rho", rho=tuple(tuple(Fraction(x) for x in row) for row in matrix))

    @classmethod
    def shift(cls, s: Mapping[int, Sequence[int]]) -> "Regrade":
        return cls("s_shift", s={k: tuple(int(x) for x in v) for k, v in s.items()})


class MultiloopLieAlgebra:
    """
    L_m(g, sigma, h) with components g^lambda-bar (x) t^lambda and root
    components g_alpha^lambda-bar (x) t^lambda.
    """

    def __init__(
        self,
        sigma: AutTuple,
        rootdatum: Optional[RootDatum] = None,
        compute_roots: bool = True,
        seed: Optional[int] = None,
    ):
        self.sigma = sigma
        self.base: LieAlgebra = sigma.algebra
        self.m: Tuple[int, ...] = tuple(sigma.m)
        self.n = sigma.n
        self.grading = eigengrade(sigma)
        self.fixed: List[Vector] = list(self.grading.get((0,) * self.n, []))
        if rootdatum is None and compute_roots and self.fixed:
            h = cartan_subalgebra(self.base, self.fixed, seed)
            rootdatum = root_decomposition(self.base, h, seed)
        self.rootdatum = rootdatum
        self._refined: Dict[Tuple[RootKey, Degree], List[Vector]] = {}
        self._solvers: Dict[Degree, CoordinateSolver] = {}
        logger.debug(
            f"multiloop algebra over {self.base.name}: m={self.m}, "
            f"{len(self.grading)} occupied classes, dim g^sigma={len(self.fixed)}"
        )

    # -- components -------------------------------------------------------

    def reduce(self, degree: Sequence[int]) -> Degree:
        return lattice.reduce_mod(degree, self.m)

    def component(self, degree: Sequence[int]) -> List[Vector]:
        return list(self.grading.get(self.reduce(degree), []))

    def root_component(self, alpha: Sequence[int], degree: Sequence[int]) -> List[Vector]:
        """Basis of g_alpha^lambda-bar; alpha = 0 gives the zero weight space."""
        if self.rootdatum is None:
            return self.component(degree) if not any(alpha) else []
        key = (tuple(alpha), self.reduce(degree))
        if key not in self._refined:
            self._refined[key] = intersect(
                self.rootdatum.space(alpha), self.component(degree), self.base.dim
            )
        return list(self._refined[key])

    def central_lattice(self) -> List[Degree]:
        return [tuple(mi if j == i else 0 for j in range(self.n)) for i, mi in enumerate(self.m)]

    def contains(self, x: Sequence[CycNum], degree: Sequence[int]) -> bool:
        reduced = self.reduce(degree)
        if reduced not in self._solvers:
            self._solvers[reduced] = CoordinateSolver(self.component(reduced), self.base.dim)
        return self._solvers[reduced].coordinates(x) is not None

    def dimensions(self) -> Dict[Degree, int]:
        return {
            cls: len(self.grading.get(cls, [])) for cls in lattice.fundamental_box(self.m)
        }

    def __repr__(self) -> str:
        return f"MultiloopLieAlgebra({self.base.name}, m={self.m})"


def validate_element(L: MultiloopLieAlgebra, a: LoopElement) -> None:
    for degree, x in a.terms.items():
        if not L.contains(x, degree):
            raise GradeViolationError(
                f"term at degree {degree} is not in g^{L.reduce(degree)}",
                component=str(degree),
            )


def loop_bracket(L: MultiloopLieAlgebra, a: LoopElement, b: LoopElement, check: bool = True) -> LoopElement:
    """[x t^lambda, y t^mu] = [x, y] t^(lambda + mu)."""
    if check:
        validate_element(L, a)
        validate_element(L, b)
    out: Dict[Degree, Vector] = {}
    for la, x in a.terms.items():
        for mu, y in b.terms.items():
            z = L.base.bracket(x, y)
            if is_zero_vector(z):
                continue
            degree = tuple(p + q for p, q in zip(la, mu))
            out[degree] = vec_add(out[degree], z) if degree in out else z
    return LoopElement(out)


def loop_form(L: MultiloopLieAlgebra, a: LoopElement, b: LoopElement) -> CycNum:
    """(x t^lambda | y t^mu) = kappa(x, y) if lambda + mu = 0, else 0."""
    total = ZERO
    for la, x in a.terms.items():
        y = b.terms.get(tuple(-v for v in la))
        if y is not None:
            total = total + L.base.kappa(x, y)
    return total


class GradedLoop(Protocol):
    """What the checks need from a multiloop algebra or a regraded view."""

    base: LieAlgebra
    n: int
    rootdatum: Optional[RootDatum]

    def component(self, degree: Sequence[int]) -> List[Vector]:
        ...

    def root_component(self, alpha: Sequence[int], degree: Sequence[int]) -> List[Vector]:
        ...

    def central_lattice(self) -> List[Degree]:
        ...


# ---------------------------------------------------------------------------
# Supports and the central grading group
# ---------------------------------------------------------------------------


def zn_support(L: "GradedLoop", radius: int) -> List[Degree]:
    """Degrees lambda in [-radius, radius]^n with a nonzero component."""
    return [d for d in lattice.box(radius, L.n) if L.component(d)]


def root_support(L: MultiloopLieAlgebra, radius: int) -> List[Tuple[RootKey, Degree]]:
    """Pairs (alpha, lambda) in the window with g_alpha^lambda != 0 (alpha = 0 included)."""
    if L.rootdatum is None:
        return [((), d) for d in zn_support(L, radius)]
    keys = [(0,) * L.rootdatum.rank] + list(L.rootdatum.roots)
    return [
        (alpha, d)
        for d in lattice.box(radius, L.n)
        for alpha in keys
        if L.root_component(alpha, d)
    ]


def support_group(L: MultiloopLieAlgebra) -> List[Degree]:
    """Lattice basis of <supp>, from one fundamental box plus m_1 Z x ... x m_n Z."""
    generators: List[Sequence[int]] = [cls for cls in lattice.fundamental_box(L.m) if L.component(cls)]
    generators += L.central_lattice()
    return lattice.lattice_basis(generators, L.n)


def _homogeneous_basis(L: MultiloopLieAlgebra) -> Tuple[List[Vector], List[Degree]]:
    vectors: List[Vector] = []
    classes: List[Degree] = []
    for cls in sorted(L.grading):
        for v in L.grading[cls]:
            vectors.append(v)
            classes.append(cls)
    return vectors, classes


def centroid_degree_dimension(L: MultiloopLieAlgebra, mu: Sequence[int]) -> int:
    """
    Dimension of the degree-mu part of the graded centroid: maps C with
    C(g^kappa) in g^(kappa + mu) commuting with every ad x.
    """
    g = L.base
    vectors, classes = _homogeneous_basis(L)
    solver = CoordinateSolver(vectors, g.dim)
    shift = L.reduce(mu)
    size = len(vectors)
    index: Dict[Tuple[int, int], int] = {}
    for r in range(size):
        for i in range(size):
            target = tuple((c + s) % mi for c, s, mi in zip(classes[i], shift, L.m))
            if classes[r] == target:
                index[(r, i)] = len(index)
    if not index:
        return 0
    ad_columns = []
    for x in vectors:
        columns = []
        for v in vectors:
            coords = solver.coordinates(g.bracket(x, v), check=False)
            assert coords is not None
            columns.append(coords)
        ad_columns.append(columns)
    system = SparseEliminator()
    for columns in ad_columns:
        # (C A - A C)[r][j] = 0
        for r in range(size):
            for j in range(size):
                equation: Dict[int, CycNum] = {}
                for i in range(size):
                    a_ij = columns[j][i]
                    if a_ij and (r, i) in index:
                        var = index[(r, i)]
                        equation[var] = equation.get(var, ZERO) + a_ij
                    a_ri = columns[i][r]
                    if a_ri and (i, j) in index:
                        var = index[(i, j)]
                        equation[var] = equation.get(var, ZERO) - a_ri
                if any(equation.values()):
                    system.add(equation)
        if system.rank == len(index):
            break
    return system.solution_dimension(len(index))


def central_grading_group(
    L: MultiloopLieAlgebra, verify: bool = False
) -> Tuple[List[Degree], Dict[Degree, int]]:
    """
    m_1 Z x ... x m_n Z, optionally cross-checked by solving for the graded
    centroid on every class of the fundamental box (dimension 1 at 0, else 0).
    """
    dims: Dict[Degree, int] = {}
    if verify:
        for mu in lattice.fundamental_box(L.m):
            dims[mu] = centroid_degree_dimension(L, mu)
        logger.info(f"graded centroid dimensions for m={L.m}: {dims}")
    return L.central_lattice(), dims


# ---------------------------------------------------------------------------
# Admissibility and realizations
# ---------------------------------------------------------------------------


def admissible_matrix(
    p: Sequence[Sequence[int]], m_prime: Sequence[int], m: Sequence[int]
) -> Tuple[Tuple[Fraction, ...], ...]:
    """Q = D_m' P^T D_m^-1 (rational)."""
    lattice.require_unimodular(p)
    n = len(m)
    return tuple(
        tuple(Fraction(m_prime[i] * p[j][i], m[j]) for j in range(n)) for i in range(n)
    )


def admissible(p: Sequence[Sequence[int]], m_prime: Sequence[int], m: Sequence[int]) -> bool:
    """True iff D_m' P^T D_m^-1 is in GL_n(Z)."""
    return lattice.is_unimodular(admissible_matrix(p, m_prime, m))


class RealizationMap:
    """x (x) t^lambda -> phi(x) (x) t^(Q lambda)."""

    def __init__(self, q: Sequence[Sequence[int]], phi: Matrix):
        self.q = lattice.as_int_matrix(q)
        self.phi = phi

    def degree(self, degree: Sequence[int]) -> Degree:
        image = lattice.apply_int(self.q, degree)
        assert image is not None
        return image

    def apply(self, a: LoopElement) -> LoopElement:
        return LoopElement({self.degree(d): mat_vec(self.phi, x) for d, x in a.terms.items()})


def realization_iso(
    L: MultiloopLieAlgebra,
    L_prime: MultiloopLieAlgebra,
    phi: Matrix,
    p: Sequence[Sequence[int]],
    radius: int = 1,
) -> RealizationMap:
    """
    The isograded isomorphism L_m(g, sigma) -> L_m'(g', sigma') induced by phi
    when sigma' = phi sigma^P phi^-1 and P is (m', m)-admissible.

    Raises:
        CertificateInvalidError: with the first failing check
    """
    if not admissible(p, L_prime.m, L.m):
        raise CertificateInvalidError(
            f"P is not ({list(L_prime.m)}, {list(L.m)})-admissible", step="admissible"
        )
    q = lattice.as_int_matrix(admissible_matrix(p, L_prime.m, L.m))
    g, g_prime = L.base, L_prime.base
    if len(phi) != g_prime.dim or g.dim != g_prime.dim:
        raise CertificateInvalidError("phi has the wrong shape", step="shape")
    pair = bracket_violation(g, phi) if g is g_prime else cross_bracket_violation(g, g_prime, phi)
    if pair is not None:
        raise CertificateInvalidError("phi does not preserve brackets", step="bracket", debug_info={"pair": list(pair)})
    sigma_p = gl_action(L.sigma, p)
    for j, (a, b) in enumerate(zip(L_prime.sigma, sigma_p)):
        if not mat_equal(mat_mul(a.matrix, phi), mat_mul(phi, b.matrix)):
            raise CertificateInvalidError(
                f"sigma'_{j + 1} phi != phi sigma^P_{j + 1}", step="intertwining", debug_info={"index": j}
            )
    result = RealizationMap(q, phi)
    for degree in lattice.box(radius, L.n):
        source = [mat_vec(phi, v) for v in L.component(degree)]
        target = L_prime.component(result.degree(degree))
        if not same_span(source, target, g_prime.dim):
            raise CertificateInvalidError(
                f"component {degree} is not carried onto {result.degree(degree)}",
                step="window",
                debug_info={"degree": list(degree)},
            )
    return result


def cross_bracket_violation(g: LieAlgebra, g_prime: LieAlgebra, phi: Matrix) -> Optional[Tuple[int, int]]:
    columns = [tuple(row[j] for row in phi) for j in range(g.dim)]
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            if mat_vec(phi, g.bracket_basis(i, j)) != g_prime.bracket(columns[i], columns[j]):
                return (i, j)
    return None


def normalize_to_orders(L: MultiloopLieAlgebra) -> Tuple[MultiloopLieAlgebra, Regrade]:
    """L_ord(sigma)(g, sigma, h) and the rho regrade lambda -> (lambda_i / a_i), a_i = m_i / ord(sigma_i)."""
    orders = L.sigma.orders
    target = MultiloopLieAlgebra(L.sigma.with_m(orders), rootdatum=L.rootdatum)
    rho = lattice.diagonal([Fraction(o, mi) for o, mi in zip(orders, L.m)])
    return target, Regrade.from_rho(rho)


# ---------------------------------------------------------------------------
# Regraded views
# ---------------------------------------------------------------------------


class RegradedView:
    """
    Lazy view of a regraded algebra: B_(rho) with (B_(rho))^mu = B^(rho^-1 mu),
    or B^(s) with (B^(s))_alpha^lambda = B_alpha^(lambda + s(alpha)).
    """

    def __init__(self, source: "GradedLoop", regrade: Regrade):
        self.source = source
        self.regrade = regrade
        self.base = source.base
        self.n = source.n
        self.rootdatum = source.rootdatum
        if regrade.kind == "rho":
            assert regrade.rho is not None
            self._inverse = lattice.inverse(regrade.rho)
            self._support = support_group_of(source)
        elif regrade.kind == "s_shift":
            if self.rootdatum is None:
                raise DomainMismatchError("an s-shift needs the root grading", step="s_shift")
        else:
            raise DomainMismatchError(f"unknown regrade kind {regrade.kind!r}", step="kind")

    def _preimage(self, degree: Sequence[int]) -> Optional[Degree]:
        image = lattice.apply_int(self._inverse, degree)
        if image is None or not lattice.contains(self._support, image):
            return None
        return image

    def shift_of(self, alpha: Sequence[int]) -> Degree:
        assert self.regrade.s is not None
        total = [0] * self.n
        for k, a in enumerate(alpha):
            if a:
                value = self.regrade.s.get(k, (0,) * self.n)
                total = [t + a * v for t, v in zip(total, value)]
        return tuple(total)

    def root_component(self, alpha: Sequence[int], degree: Sequence[int]) -> List[Vector]:
        if self.regrade.kind == "rho":
            pre = self._preimage(degree)
            return [] if pre is None else self.source.root_component(alpha, pre)
        shifted = tuple(d + s for d, s in zip(degree, self.shift_of(alpha)))
        return self.source.root_component(alpha, shifted)

    def component(self, degree: Sequence[int]) -> List[Vector]:
        if self.regrade.kind == "rho":
            pre = self._preimage(degree)
            return [] if pre is None else self.source.component(pre)
        assert self.rootdatum is not None
        out: List[Vector] = []
        for alpha in [(0,) * self.rootdatum.rank] + list(self.rootdatum.roots):
            out.extend(self.root_component(alpha, degree))
        return out

    def central_lattice(self) -> List[Degree]:
        lattice_basis = self.source.central_lattice()
        if self.regrade.kind == "s_shift":
            return lattice_basis
        assert self.regrade.rho is not None
        images = [lattice.apply_int(self.regrade.rho, v) for v in lattice_basis]
        return [v for v in images if v is not None]

    def __repr__(self) -> str:
        return f"RegradedView({self.regrade.kind}, {self.source!r})"


def support_group_of(L: "GradedLoop") -> List[Degree]:
    """Lattice basis of <supp> for any graded loop (window around one period)."""
    if isinstance(L, MultiloopLieAlgebra):
        return support_group(L)
    central = L.central_lattice()
    radius = max((abs(x) for v in central for x in v), default=1)
    generators = [d for d in lattice.box(radius, L.n) if L.component(d)]
    return lattice.lattice_basis(generators + central, L.n)


def compare_on_window(a: "GradedLoop", b: "GradedLoop", radius: int, roots: bool = False) -> Optional[Degree]:
    """First degree (or None) in the window where the components differ."""
    dim = a.base.dim
    for degree in lattice.box(radius, a.n):
        if roots and a.rootdatum is not None:
            rd = a.rootdatum
            for alpha in [(0,) * rd.rank] + list(rd.roots):
                if not same_span(a.root_component(alpha, degree), b.root_component(alpha, degree), dim):
                    return degree
        elif not same_span(a.component(degree), b.component(degree), dim):
            return degree
    return None
