"""
Lie torus conditions for multiloop algebras and the constructive
toralization: shift by s, twist by tau, change variables by P.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

from app.core.config import get_settings
from app.core.exceptions import (
    EmptyComponentError,
    MultiloopError,
    SearchExhaustedError,
    ZeroFixedAlgebraError,
)
from app.models.schemas import CheckResult, TorusReport
from app.services import lattice
from app.services.autos import AutTuple, gl_action, group_order, inner_reflection, relation_set, tau_twist
from app.services.cycfield import ZERO, CycNum
from app.services.lattice import Degree, IntMatrix
from app.services.liecore import centralizer, is_simple, subalgebra
from app.services.linalg import (
    CoordinateSolver,
    IncrementalBasis,
    Matrix,
    SparseEliminator,
    Vector,
    intersect,
    mat_vec,
    vec_scale,
)
from app.services.multiloop import MultiloopLieAlgebra
from app.services.roots import (
    RootDatum,
    RootKey,
    classify,
    coroot_and_triple,
    enlarges,
    root_decomposition,
)
from app.services.spectra import restrict
from app.services.supportiso import IsoCertificate

logger = logging.getLogger(__name__)


def _commutant_dimension(matrices: Sequence[Matrix], d: int) -> int:
    """dim {X : X A = A X for every A}."""
    system = SparseEliminator()
    for a in matrices:
        for r in range(d):
            for c in range(d):
                equation: Dict[int, CycNum] = {}
                for k in range(d):
                    if a[k][c]:
                        equation[r * d + k] = equation.get(r * d + k, ZERO) + a[k][c]
                    if a[r][k]:
                        equation[k * d + c] = equation.get(k * d + c, ZERO) - a[r][k]
                system.add(equation)
        if system.rank == d * d - 1:
            break
    return system.solution_dimension(d * d)


def _fixed_root_values(L: MultiloopLieAlgebra) -> Tuple[Set[Tuple[CycNum, ...]], str]:
    """Values of (Delta^sigma)_en on h and the type of Delta^sigma."""
    rd = L.rootdatum
    assert rd is not None
    g0 = subalgebra(L.base, L.fixed, name=f"{L.base.name}^sigma")
    solver = CoordinateSolver(L.fixed, L.base.dim)
    h_coords = []
    for x in rd.h_basis:
        coords = solver.coordinates(x)
        assert coords is not None
        h_coords.append(coords)
    fixed_rd = root_decomposition(g0, h_coords, rd.seed)
    cartan_type = classify(fixed_rd)
    values = {fixed_rd.values[a] for a in fixed_rd.roots}
    if enlarges(cartan_type):
        for a in fixed_rd.roots:
            if fixed_rd.is_short(a):
                values.add(tuple(2 * v for v in fixed_rd.values[a]))
    return values, cartan_type


def _check_a2(L: MultiloopLieAlgebra) -> CheckResult:
    g = L.base
    rd = L.rootdatum
    if rd is None or not L.fixed:
        return CheckResult(name="A2", passed=False, detail="g^sigma = 0")
    try:
        enlarged, fixed_type = _fixed_root_values(L)
    except MultiloopError as exc:
        return CheckResult(name="A2", passed=False, detail=exc.message)
    trivial_part = centralizer(g, L.fixed)
    zero_class = (0,) * L.n
    for cls in sorted(L.grading):
        if cls == zero_class:
            continue
        component = L.grading[cls]
        u = intersect(trivial_part, component, g.dim)
        span = IncrementalBasis(g.dim)
        for x in L.fixed:
            for v in component:
                span.add(g.bracket(x, v))
        v_basis = list(span.vectors)
        if len(u) + len(v_basis) != len(component) or intersect(u, v_basis, g.dim):
            return CheckResult(
                name="A2",
                passed=False,
                detail=f"g^{cls} is not U + V",
                witness={"class": list(cls), "dim": len(component), "U": len(u), "V": len(v_basis)},
            )
        if not v_basis:
            continue
        if len(v_basis) == 1:
            return CheckResult(
                name="A2", passed=False, detail=f"V^{cls} is one-dimensional", witness={"class": list(cls)}
            )
        actions = [restrict(g.ad(x), v_basis) for x in L.fixed]
        if _commutant_dimension(actions, len(v_basis)) != 1:
            return CheckResult(
                name="A2", passed=False, detail=f"V^{cls} is reducible", witness={"class": list(cls)}
            )
        for alpha in rd.roots:
            if intersect(rd.space(alpha), v_basis, g.dim) and rd.values[alpha] not in enlarged:
                return CheckResult(
                    name="A2",
                    passed=False,
                    detail=f"weight {rd.label(alpha)} of V^{cls} is outside Delta_en",
                    witness={"class": list(cls), "weight": rd.label(alpha)},
                )
    return CheckResult(name="A2", passed=True, detail=f"g^sigma of type {fixed_type}")


def check_torus(L: MultiloopLieAlgebra) -> TorusReport:
    """Conditions (A0)-(A3); failures carry witnesses."""
    orders = L.sigma.orders
    a0 = CheckResult(
        name="A0",
        passed=tuple(L.m) == tuple(orders),
        detail=f"m={list(L.m)}, ord={list(orders)}",
    )
    if L.fixed:
        simple = is_simple(subalgebra(L.base, L.fixed))
        a1 = CheckResult(name="A1", passed=simple, detail=f"dim g^sigma = {len(L.fixed)}")
    else:
        a1 = CheckResult(name="A1", passed=False, detail="g^sigma = 0")
    a2 = _check_a2(L)
    size = group_order(L.sigma)
    product = 1
    for o in orders:
        product *= o
    a3 = CheckResult(
        name="A3",
        passed=size == product,
        detail=f"|<sigma>| = {size}, prod ord = {product}",
    )
    report = TorusReport(a0=a0, a1=a1, a2=a2, a3=a3, is_torus=a0.passed and a1.passed and a2.passed and a3.passed)
    logger.info(f"torus check for {L!r}: {report.is_torus}")
    return report


def check_root_components(L: MultiloopLieAlgebra) -> CheckResult:
    """dim g_alpha^lambda <= 1, and g_2alpha^2lambda = 0 whenever g_alpha^lambda != 0."""
    rd = L.rootdatum
    if rd is None:
        return CheckResult(name="root_components", passed=False, detail="g^sigma = 0")
    occupied = 0
    for alpha in rd.roots:
        double = tuple(2 * a for a in alpha)
        for cls in lattice.fundamental_box(L.m):
            space = L.root_component(alpha, cls)
            if not space:
                continue
            occupied += 1
            if len(space) > 1:
                return CheckResult(
                    name="root_components",
                    passed=False,
                    detail=f"dim g_{rd.label(alpha)}^{list(cls)} = {len(space)}",
                    witness={"root": rd.label(alpha), "class": list(cls)},
                )
            if double in rd.root_spaces and L.root_component(double, tuple(2 * c for c in cls)):
                return CheckResult(
                    name="root_components",
                    passed=False,
                    detail=f"g_2alpha^2lambda != 0 for alpha = {rd.label(alpha)}",
                    witness={"root": rd.label(alpha), "class": list(cls)},
                )
    return CheckResult(name="root_components", passed=True, detail=f"{occupied} nonzero root components")


def check_reflections(L: MultiloopLieAlgebra) -> CheckResult:
    """theta_alpha^lambda(h_alpha) = -h_alpha for the sl2-triple of every nonzero g_alpha^lambda."""
    rd = L.rootdatum
    if rd is None:
        return CheckResult(name="reflections", passed=False, detail="g^sigma = 0")
    g = L.base
    minus = CycNum.rational(-1)
    count = 0
    for alpha in rd.roots:
        for cls in lattice.fundamental_box(L.m):
            if not L.root_component(alpha, cls):
                continue
            try:
                triple = coroot_and_triple(rd, alpha, cls, component=L.component)
                theta = inner_reflection(g, triple)
            except MultiloopError as exc:
                return CheckResult(
                    name="reflections",
                    passed=False,
                    detail=exc.message,
                    witness={"root": rd.label(alpha), "class": list(cls)},
                )
            if mat_vec(theta.matrix, triple.h_alpha) != vec_scale(minus, triple.h_alpha):
                return CheckResult(
                    name="reflections",
                    passed=False,
                    detail=f"theta(h_alpha) != -h_alpha for {rd.label(alpha)}",
                    witness={"root": rd.label(alpha), "class": list(cls)},
                )
            count += 1
    return CheckResult(name="reflections", passed=True, detail=f"{count} sl2-triples")


def _element_order(v: Sequence[int], orders: Sequence[int], kernel: Set[Degree]) -> int:
    k = 1
    while True:
        if lattice.reduce_mod([k * x for x in v], orders) in kernel:
            return k
        k += 1


def find_P_for_A3(sigma: AutTuple, bound: Optional[int] = None) -> IntMatrix:
    """
    P in GL_n(Z) with |<sigma>| = prod ord(sigma^P_i).

    Raises:
        SearchExhaustedError: if no candidate within ``bound`` works
    """
    bound = get_settings().search_bound if bound is None else bound
    n = sigma.n
    orders, kernel = relation_set(sigma)
    size = 1
    for o in orders:
        size *= o
    size //= len(kernel)
    candidates = lattice.unimodular_matrices(n, bound)
    for p in candidates:
        product = 1
        for j in range(n):
            product *= _element_order([p[i][j] for i in range(n)], orders, kernel)
            if product > size:
                break
        if product == size:
            logger.debug(f"A3 matrix found: {p}")
            return p
    raise SearchExhaustedError(
        f"no P with entries bounded by {bound} satisfies the order condition",
        component=str(list(orders)),
        debug_info={"candidates": len(candidates), "group_order": size},
    )


@dataclass
class ToralizationCertificate:
    base: List[RootKey]
    lambda_choices: Dict[RootKey, Degree]
    s: Dict[int, Degree]
    twisted: AutTuple
    P: IntMatrix
    result: MultiloopLieAlgebra
    certificate: IsoCertificate
    report: TorusReport


def toralize(L: MultiloopLieAlgebra, bound: Optional[int] = None) -> ToralizationCertificate:
    """
    A Lie torus support-isomorphic to L.

    Raises:
        ZeroFixedAlgebraError: if g^sigma = 0
        SearchExhaustedError: if the A3 matrix search fails
    """
    if not L.fixed or L.rootdatum is None:
        raise ZeroFixedAlgebraError("g^sigma = 0; no Lie torus is support-isomorphic to L")
    rd: RootDatum = L.rootdatum
    g = L.base
    base = rd.simple_roots
    choices: Dict[RootKey, Degree] = {}
    for alpha in base:
        lam = next((cls for cls in lattice.fundamental_box(L.m) if L.root_component(alpha, cls)), None)
        if lam is None:
            raise EmptyComponentError(f"root {rd.label(alpha)} has no component", component=rd.label(alpha))
        choices[alpha] = lam
    s = {k: choices[alpha] for k, alpha in enumerate(base)}
    tau = tau_twist(g, rd, s, L.m)
    twisted = AutTuple([t.compose(x) for t, x in zip(tau, L.sigma)], L.m)
    p = find_P_for_A3(twisted, bound)
    moved = gl_action(twisted, p)
    result = MultiloopLieAlgebra(moved, rootdatum=rd)
    report = check_torus(result)
    certificate = IsoCertificate(
        s={k: tuple(Fraction(v, mi) for v, mi in zip(value, L.m)) for k, value in s.items()},
        P=p,
        phi=None,
    )
    logger.info(
        f"toralized {L!r}: s={ {rd.label(a): list(v) for a, v in choices.items()} }, P={p}, torus={report.is_torus}"
    )
    return ToralizationCertificate(base, choices, s, twisted, p, result, certificate, report)
