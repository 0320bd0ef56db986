"""
Cartan subalgebras of fixed-point algebras and the root decomposition of g
relative to them.

Roots are stored as integer coordinate tuples in a base chosen from a fixed
lexicographic order; the Killing form restricted to h is transferred to h*
to give the form ( | ), the coroots and the sl2-triples.
"""

import itertools
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx
from tenacity import after_log, retry, retry_if_exception_type, stop_after_attempt

from app.core.config import get_settings
from app.core.exceptions import (
    EmptyComponentError,
    FieldTooSmallError,
    GradeViolationError,
    IsotropicRootError,
    NotDiagonalizableError,
    UnclassifiedTypeError,
    ZeroFixedAlgebraError,
)
from app.models.schemas import CheckResult, RootSystemReport
from app.services.cycfield import ZERO, CycNum, common_order
from app.services.liecore import LieAlgebra, centralizer, random_element
from app.services.linalg import (
    CoordinateSolver,
    IncrementalBasis,
    Matrix,
    Vector,
    identity_matrix,
    intersect,
    inverse,
    is_zero_vector,
    mat_sub,
    mat_vec,
    nullspace,
    vec_combine,
    vec_scale,
)
from app.services.spectra import simultaneous_eigenspaces

logger = logging.getLogger(__name__)

RootKey = Tuple[int, ...]
Values = Tuple[CycNum, ...]


# ---------------------------------------------------------------------------
# Fixed points and Cartan subalgebras
# ---------------------------------------------------------------------------


def fixed_subalgebra(g: LieAlgebra, matrices: Sequence[Matrix]) -> List[Vector]:
    """Basis of {x : sigma_i(x) = x for all i}; may be empty."""
    rows: List[Vector] = []
    eye = identity_matrix(g.dim)
    for m in matrices:
        rows.extend(mat_sub(m, eye))
    if not rows:
        return identity_matrix(g.dim)
    return nullspace(rows, g.dim)


def _is_abelian(g: LieAlgebra, basis: Sequence[Vector]) -> bool:
    return all(
        is_zero_vector(g.bracket(x, y)) for x, y in itertools.combinations(basis, 2)
    )


def _verify_cartan(g: LieAlgebra, g0: Sequence[Vector], h: Sequence[Vector]) -> None:
    if not h:
        raise NotDiagonalizableError("candidate Cartan subalgebra is zero")
    if not _is_abelian(g, h):
        raise NotDiagonalizableError("candidate Cartan subalgebra is not abelian")
    if len(intersect(centralizer(g, h), g0, g.dim)) != len(h):
        raise NotDiagonalizableError(
            "candidate Cartan subalgebra is not self-centralizing",
            witness={"dim": len(h)},
        )
    # raises NotDiagonalizable / FieldTooSmall
    simultaneous_eigenspaces([g.ad(x) for x in h], g.dim)


def _chevalley_candidate(g: LieAlgebra, g0: Sequence[Vector]) -> Optional[List[Vector]]:
    """Centralizer in g0 of the part of the standard torus fixed by sigma."""
    if g.chevalley is None:
        return None
    torus = [g.basis_vector(k) for k in g.chevalley.h]
    fixed = intersect(torus, g0, g.dim)
    if not fixed:
        return None
    candidate = intersect(centralizer(g, fixed), g0, g.dim)
    try:
        _verify_cartan(g, g0, candidate)
    except (NotDiagonalizableError, FieldTooSmallError) as exc:
        logger.debug(f"standard torus candidate rejected: {exc}")
        return None
    return candidate


def cartan_subalgebra(
    g: LieAlgebra,
    g0: Sequence[Vector],
    seed: Optional[int] = None,
    retries: Optional[int] = None,
) -> List[Vector]:
    """
    A Cartan subalgebra of the reductive subalgebra spanned by ``g0``.

    Tries g0 itself when abelian, then the fixed part of the standard torus,
    then centralizers of pseudorandom elements (reseeded on failure).

    Raises:
        ZeroFixedAlgebraError: if g0 = 0
        NotDiagonalizableError / FieldTooSmallError: when every attempt fails
    """
    if not g0:
        raise ZeroFixedAlgebraError("the fixed-point algebra is zero")
    g0 = [tuple(v) for v in g0]
    if _is_abelian(g, g0):
        _verify_cartan(g, g0, g0)
        return list(g0)
    candidate = _chevalley_candidate(g, g0)
    if candidate is not None:
        logger.debug(f"Cartan subalgebra of dim {len(candidate)} from the standard torus")
        return candidate

    settings = get_settings()
    rng = random.Random(settings.seed if seed is None else seed)
    attempts = retries if retries is not None else settings.cartan_retries

    @retry(
        stop=stop_after_attempt(attempts),
        retry=retry_if_exception_type((NotDiagonalizableError, FieldTooSmallError)),
        after=after_log(logger, logging.DEBUG),
        reraise=True,
    )
    def attempt() -> List[Vector]:
        x = random_element(g, rng, g0)
        h = intersect(centralizer(g, [x]), g0, g.dim)
        _verify_cartan(g, g0, h)
        return h

    return attempt()


# ---------------------------------------------------------------------------
# Root data
# ---------------------------------------------------------------------------


def _value_key(values: Values, order: int) -> Tuple[Tuple[Fraction, ...], ...]:
    return tuple(tuple(-c for c in v.lift(order).coeffs) for v in values)


@dataclass(frozen=True)
class Sl2Triple:
    x_plus: Vector
    x_minus: Vector
    h_alpha: Vector
    alpha: RootKey
    lambda_bar: Optional[Tuple[int, ...]] = None


@dataclass
class RootDatum:
    """Root decomposition of g relative to h, with roots keyed by base coordinates."""

    algebra: LieAlgebra
    h_basis: List[Vector]
    zero_space: List[Vector]
    roots: List[RootKey]
    values: Dict[RootKey, Values]
    root_spaces: Dict[RootKey, List[Vector]]
    gram: Tuple[Tuple[Fraction, ...], ...]
    killing_inverse: Matrix
    seed: int
    _solver: CoordinateSolver = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def simple_roots(self) -> List[RootKey]:
        return [tuple(1 if j == i else 0 for j in range(self.rank)) for i in range(self.rank)]

    @property
    def positive_roots(self) -> List[RootKey]:
        return [a for a in self.roots if _is_positive(a)]

    def form(self, a: Sequence[object], b: Sequence[object]) -> Fraction:
        total = Fraction(0)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        total += Fraction(x) * Fraction(y) * self.gram[i][j]
        return total

    def pairing(self, beta: Sequence[object], alpha: RootKey) -> Fraction:
        """<beta, h_alpha> = 2 (beta|alpha) / (alpha|alpha)."""
        return 2 * self.form(beta, alpha) / self.form(alpha, alpha)

    def is_short(self, alpha: RootKey) -> bool:
        return self.form(alpha, alpha) == min(self.form(b, b) for b in self.roots)

    def cartan_matrix(self) -> List[List[int]]:
        """a_ij = <alpha_j, h_alpha_i>."""
        simple = self.simple_roots
        return [[int(self.pairing(aj, ai)) for aj in simple] for ai in simple]

    def evaluate(self, key: Sequence[int]) -> Values:
        """Values of a lattice element on h_basis."""
        out = [ZERO] * len(self.h_basis)
        for i, a in enumerate(key):
            if a:
                simple = self.values[self.simple_roots[i]]
                out = [x + a * y for x, y in zip(out, simple)]
        return tuple(out)

    def key_of(self, values: Sequence[CycNum]) -> Optional[RootKey]:
        """Base coordinates of a functional given by its values, if integral."""
        coords = self._solver.coordinates(values)
        if coords is None or not all(c.is_rational() for c in coords):
            return None
        fractions = [c.to_fraction() for c in coords]
        if any(f.denominator != 1 for f in fractions):
            return None
        return tuple(int(f) for f in fractions)

    def t_vector(self, alpha: Sequence[int]) -> Vector:
        """nu^-1(alpha) as an element of h."""
        coeffs = mat_vec(self.killing_inverse, self.evaluate(alpha))
        return vec_combine(zip(coeffs, self.h_basis), self.algebra.dim)

    def coroot(self, alpha: RootKey) -> Vector:
        """h_alpha = 2 nu^-1(alpha) / (alpha|alpha)."""
        scale = CycNum.rational(2 / self.form(alpha, alpha))
        return vec_scale(scale, self.t_vector(alpha))

    def space(self, key: Sequence[int]) -> List[Vector]:
        key = tuple(key)
        if not any(key):
            return list(self.zero_space)
        return list(self.root_spaces.get(key, []))

    def label(self, key: Sequence[int]) -> str:
        terms = []
        for i, a in enumerate(key):
            if a:
                coefficient = "" if abs(a) == 1 else str(abs(a))
                sign = "-" if a < 0 else "+"
                terms.append(f"{sign}{coefficient}a{i + 1}")
        text = "".join(terms) or "0"
        return text[1:] if text.startswith("+") else text


def _is_positive(key: Sequence[object]) -> bool:
    for x in key:
        if x:
            return x > 0  # type: ignore[operator]
    return False


def _rationalize(values: Sequence[CycNum], what: str) -> Tuple[Fraction, ...]:
    out = []
    for v in values:
        if not v.is_rational():
            raise UnclassifiedTypeError(f"{what} is not rational", component=str(v))
        out.append(v.to_fraction())
    return tuple(out)


def root_decomposition(
    g: LieAlgebra, h: Sequence[Vector], seed: Optional[int] = None
) -> RootDatum:
    """
    Decompose g under ad h.

    Raises:
        FieldTooSmallError, NotDiagonalizableError: from the eigen-decomposition
        IsotropicRootError: if some root has (alpha|alpha) = 0
        UnclassifiedTypeError: if the roots do not admit an integral base
    """
    h = [tuple(x) for x in h]
    l = len(h)
    blocks = simultaneous_eigenspaces([g.ad(x) for x in h], g.dim)
    zero_space: List[Vector] = []
    spaces: Dict[Values, List[Vector]] = {}
    for values, vectors in blocks:
        if all(v.is_zero() for v in values):
            zero_space.extend(vectors)
        else:
            spaces.setdefault(values, []).extend(vectors)
    if not spaces:
        raise UnclassifiedTypeError("h acts trivially on g; no roots")

    order = common_order(v for values in spaces for v in values)
    ordered = sorted(spaces, key=lambda vals: _value_key(vals, order))
    span = IncrementalBasis(l)
    for vals in ordered:
        if len(span) == l:
            break
        span.add(vals)
    if len(span) < l:
        raise UnclassifiedTypeError("roots do not span h*", component=str(len(span)))
    generic = CoordinateSolver(span.vectors, l)
    rational: Dict[Values, Tuple[Fraction, ...]] = {}
    for vals in ordered:
        coords = generic.coordinates(vals)
        assert coords is not None
        rational[vals] = _rationalize(coords, "root coordinate")

    positive = [vals for vals in ordered if _is_positive(rational[vals])]
    positive_set = {rational[v] for v in positive}
    simple = []
    for vals in positive:
        r = rational[vals]
        decomposable = any(
            tuple(x - y for x, y in zip(r, rational[p])) in positive_set for p in positive
        )
        if not decomposable:
            simple.append(vals)
    if len(simple) != l:
        raise UnclassifiedTypeError(
            f"found {len(simple)} simple roots for rank {l}", component=str(len(simple))
        )

    solver = CoordinateSolver(simple, l)
    keyed: Dict[RootKey, Values] = {}
    root_spaces: Dict[RootKey, List[Vector]] = {}
    for vals in ordered:
        coords = _rationalize(solver.coordinates(vals) or (), "base coordinate")
        if any(c.denominator != 1 for c in coords):
            raise UnclassifiedTypeError("root is not an integral combination of the base")
        key = tuple(int(c) for c in coords)
        keyed[key] = vals
        root_spaces[key] = spaces[vals]

    killing_h = [tuple(g.kappa(x, y) for y in h) for x in h]
    killing_inverse = inverse(killing_h)

    def raw_form(a: Values, b: Values) -> CycNum:
        total = ZERO
        for x, row in zip(a, killing_inverse):
            for y, k in zip(b, row):
                total = total + x * k * y
        return total

    gram = tuple(
        _rationalize([raw_form(a, b) for b in simple], "transferred form") for a in simple
    )
    settings = get_settings()
    keys = sorted(keyed, key=lambda k: (not _is_positive(k), sum(abs(x) for x in k), tuple(-x for x in k)))
    rd = RootDatum(
        algebra=g,
        h_basis=h,
        zero_space=zero_space,
        roots=keys,
        values=keyed,
        root_spaces=root_spaces,
        gram=gram,
        killing_inverse=killing_inverse,
        seed=settings.seed if seed is None else seed,
        _solver=solver,
    )
    for key in keys:
        if rd.form(key, key) == 0:
            raise IsotropicRootError(f"root {rd.label(key)} is isotropic", component=rd.label(key))
    logger.debug(f"root decomposition of {g.name}: rank {l}, {len(keys)} roots")
    return rd


def rootdatum_for(
    g: LieAlgebra, matrices: Sequence[Matrix], seed: Optional[int] = None
) -> RootDatum:
    """Fixed algebra, Cartan subalgebra and root decomposition in one step."""
    g0 = fixed_subalgebra(g, matrices)
    return root_decomposition(g, cartan_subalgebra(g, g0, seed), seed)


# ---------------------------------------------------------------------------
# Triples, reflections, classification
# ---------------------------------------------------------------------------


def coroot_and_triple(
    rd: RootDatum,
    alpha: RootKey,
    lambda_bar: Optional[Tuple[int, ...]] = None,
    component: Optional[Callable[[Tuple[int, ...]], List[Vector]]] = None,
) -> Sl2Triple:
    """
    sl2-triple (x+, x-, h_alpha) with x+ in g_alpha^lambda and x- in g_-alpha^-lambda.

    ``component(lambda)`` returns a basis of the grading component of an
    integer degree; without it the triple ignores the finite grading.

    Raises:
        EmptyComponentError: if g_alpha^lambda or its partner is zero
    """
    g = rd.algebra
    alpha = tuple(alpha)
    minus = tuple(-a for a in alpha)
    plus_space = rd.space(alpha)
    minus_space = rd.space(minus)
    if component is not None and lambda_bar is not None:
        plus_space = intersect(plus_space, component(tuple(lambda_bar)), g.dim)
        minus_space = intersect(minus_space, component(tuple(-x for x in lambda_bar)), g.dim)
    if not plus_space or not minus_space:
        raise EmptyComponentError(
            f"g_alpha^lambda is zero for alpha={rd.label(alpha)}, lambda={lambda_bar}",
            component=rd.label(alpha),
        )
    x_plus = plus_space[0]
    y = next((v for v in minus_space if not g.kappa(x_plus, v).is_zero()), None)
    if y is None:
        raise EmptyComponentError(
            f"g_alpha^lambda and g_-alpha^-lambda are orthogonal for {rd.label(alpha)}",
            component=rd.label(alpha),
        )
    scale = CycNum.rational(2 / rd.form(alpha, alpha)) / g.kappa(x_plus, y)
    x_minus = vec_scale(scale, y)
    h_alpha = rd.coroot(alpha)
    if g.bracket(x_plus, x_minus) != h_alpha:
        raise GradeViolationError(
            f"[x+, x-] != h_alpha for {rd.label(alpha)}", component=rd.label(alpha)
        )
    return Sl2Triple(x_plus, x_minus, h_alpha, alpha, tuple(lambda_bar) if lambda_bar else None)


def reflect(rd: RootDatum, alpha: RootKey, gamma: Sequence[int]) -> Tuple[int, ...]:
    """s_alpha(gamma) = gamma - <gamma, h_alpha> alpha."""
    c = rd.pairing(gamma, alpha)
    if c.denominator != 1:
        raise UnclassifiedTypeError(
            f"<gamma, h_alpha> = {c} is not an integer", component=rd.label(alpha)
        )
    return tuple(g - int(c) * a for g, a in zip(gamma, alpha))


def _dynkin(cartan: Sequence[Sequence[int]]) -> "nx.Graph":
    graph = nx.Graph()
    graph.add_nodes_from(range(len(cartan)))
    for i, j in itertools.combinations(range(len(cartan)), 2):
        bond = cartan[i][j] * cartan[j][i]
        if bond:
            graph.add_edge(i, j, bond=bond)
    return graph


def root_graph(rd: RootDatum, roots: Optional[Sequence[RootKey]] = None) -> "nx.Graph":
    """Roots joined when their pairing is nonzero."""
    nodes = list(rd.roots if roots is None else roots)
    graph = nx.Graph()
    graph.add_nodes_from(nodes)
    for a, b in itertools.combinations(nodes, 2):
        if rd.form(a, b):
            graph.add_edge(a, b)
    return graph


def classify(rd: RootDatum) -> str:
    """
    Type of the root system: A_r, B_r, C_r, D_r, G2 or BC_r (B2 for B2 = C2).

    Raises:
        UnclassifiedTypeError: for reducible or unsupported systems
    """
    r = rd.rank
    roots = set(rd.roots)
    reduced = not any(tuple(2 * x for x in a) in roots for a in roots)
    cartan = rd.cartan_matrix()
    dynkin = _dynkin(cartan)
    if not nx.is_connected(dynkin):
        raise UnclassifiedTypeError("root system is reducible", component=str(cartan))
    if not reduced:
        return f"BC{r}"
    if r == 1:
        return "A1"
    bonds = [d["bond"] for _, _, d in dynkin.edges(data=True)]
    if 3 in bonds:
        if r == 2:
            return "G2"
        raise UnclassifiedTypeError("triple bond outside rank 2", component=str(cartan))
    if 2 in bonds:
        if r == 2:
            return "B2"
        short = sum(1 for a in rd.roots if rd.is_short(a))
        if short == 2 * r:
            return f"B{r}"
        if short == 2 * r * (r - 1):
            return f"C{r}"
        raise UnclassifiedTypeError("doubly laced system is neither B nor C", component=str(cartan))
    degrees = sorted(d for _, d in dynkin.degree())
    if degrees[-1] <= 2:
        return f"A{r}"
    if degrees[-1] == 3 and r >= 4:
        branch = next(n for n, d in dynkin.degree() if d == 3)
        arms = sorted(
            len(nx.node_connected_component(dynkin.subgraph(set(dynkin) - {branch}), nb))
            for nb in dynkin.neighbors(branch)
        )
        if arms[:2] == [1, 1]:
            return f"D{r}"
    raise UnclassifiedTypeError("simply laced system is not of type A or D", component=str(cartan))


def enlarges(cartan_type: str) -> bool:
    """Type B_l, l >= 1; a rank-one reduced system counts as B1."""
    return cartan_type == "A1" or (cartan_type.startswith("B") and not cartan_type.startswith("BC"))


def indivisible_and_enlarged(rd: RootDatum) -> Tuple[List[RootKey], List[RootKey]]:
    """(Delta_ind, Delta_en): halvable roots removed; doubled short roots added in type B."""
    cartan_type = classify(rd)
    roots = set(rd.roots)
    indivisible = [
        a
        for a in rd.roots
        if not (all(x % 2 == 0 for x in a) and tuple(x // 2 for x in a) in roots)
    ]
    enlarged = list(rd.roots)
    if enlarges(cartan_type):
        enlarged += [tuple(2 * x for x in a) for a in rd.roots if rd.is_short(a)]
    return indivisible, enlarged


def verify_root_system(rd: RootDatum) -> RootSystemReport:
    """Root system checks with witnesses; failures are reported, not raised."""
    g = rd.algebra
    checks: List[CheckResult] = []
    roots = set(rd.roots)

    checks.append(CheckResult(name="finite", passed=True, detail=f"{len(rd.roots)} roots"))

    total = len(rd.zero_space) + sum(len(v) for v in rd.root_spaces.values())
    checks.append(
        CheckResult(
            name="dimension",
            passed=total == g.dim,
            detail=f"{total} of {g.dim}",
            witness={} if total == g.dim else {"sum": total, "dim": g.dim},
        )
    )

    span = IncrementalBasis(rd.rank)
    for a in rd.roots:
        span.add(rd.values[a])
    checks.append(
        CheckResult(name="spanning", passed=len(span) == len(rd.h_basis), detail=f"rank {len(span)}")
    )

    isotropic = [rd.label(a) for a in rd.roots if rd.form(a, a) == 0]
    checks.append(
        CheckResult(name="anisotropic", passed=not isotropic, witness={"roots": isotropic} if isotropic else {})
    )

    bad_pairing = None
    bad_reflection = None
    for a in rd.roots:
        for b in rd.roots:
            c = rd.pairing(b, a)
            if c.denominator != 1:
                bad_pairing = bad_pairing or {"alpha": rd.label(a), "beta": rd.label(b), "value": str(c)}
                continue
            image = tuple(x - int(c) * y for x, y in zip(b, a))
            if image not in roots and bad_reflection is None:
                bad_reflection = {"alpha": rd.label(a), "beta": rd.label(b)}
    checks.append(CheckResult(name="integrality", passed=bad_pairing is None, witness=bad_pairing or {}))
    checks.append(
        CheckResult(name="reflection_stable", passed=bad_reflection is None, witness=bad_reflection or {})
    )

    irreducible = nx.is_connected(root_graph(rd))
    checks.append(CheckResult(name="irreducible", passed=irreducible))

    orthogonal = _orthogonality_witness(rd)
    checks.append(CheckResult(name="orthogonality", passed=orthogonal is None, witness=orthogonal or {}))

    reduced = not any(tuple(2 * x for x in a) in roots for a in rd.roots)
    try:
        cartan_type = classify(rd)
        classified = True
    except UnclassifiedTypeError:
        cartan_type = "unclassified"
        classified = False
    checks.append(CheckResult(name="classified", passed=classified, detail=cartan_type))

    try:
        cartan = rd.cartan_matrix()
    except (ZeroDivisionError, ValueError):
        cartan = []
    return RootSystemReport(
        cartan_type=cartan_type,
        rank=rd.rank,
        reduced=reduced,
        irreducible=irreducible,
        seed=rd.seed,
        roots=[rd.label(a) for a in rd.roots],
        cartan_matrix=cartan,
        checks=checks,
    )


def _orthogonality_witness(rd: RootDatum) -> Optional[Dict[str, str]]:
    """First pair of spaces g_alpha, g_beta with alpha + beta != 0 and nonzero Killing pairing."""
    g = rd.algebra
    spaces: List[Tuple[RootKey, List[Vector]]] = [((0,) * rd.rank, rd.zero_space)]
    spaces += [(a, rd.root_spaces[a]) for a in rd.roots]
    for (a, u), (b, w) in itertools.combinations_with_replacement(spaces, 2):
        if all(x + y == 0 for x, y in zip(a, b)):
            continue
        for x in u:
            for y in w:
                if not g.kappa(x, y).is_zero():
                    return {"alpha": rd.label(a), "beta": rd.label(b)}
    return None
