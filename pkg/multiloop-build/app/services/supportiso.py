"""
Regrading views and isomorphism certificates.

A certificate (s, P, phi) witnesses L_m(g, sigma, h) ~supp L_m'(g', sigma', h')
through the identity sigma' = phi (tau sigma)^P phi^-1, where tau is the twist
acting on g_alpha by zeta^{-s(alpha)}.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from app.core.config import get_settings
from app.core.exceptions import (
    CertificateInvalidError,
    DomainMismatchError,
    MultiloopError,
    NotMonomorphismError,
)
from app.models.schemas import CertificateFile, VerificationResult
from app.services import lattice
from app.services.autos import (
    AutTuple,
    Automorphism,
    bracket_violation,
    chevalley_involution,
    diagram,
    gl_action,
    inner_reflection,
    tau_twist,
    torus,
)
from app.services.cycfield import CycNum, lcm, root_of_unity
from app.services.lattice import IntMatrix
from app.services.liecore import LieAlgebra
from app.services.linalg import (
    CoordinateSolver,
    IncrementalBasis,
    Matrix,
    Vector,
    determinant,
    identity_matrix,
    inverse,
    mat_equal,
    mat_mul,
    mat_sub,
    mat_vec,
    matrix_key,
    vec_combine,
)
from app.services.multiloop import (
    GradedLoop,
    LoopElement,
    MultiloopLieAlgebra,
    Regrade,
    RegradedView,
    admissible_matrix,
    compare_on_window,
    cross_bracket_violation,
    support_group_of,
)
from app.services.roots import RootDatum, Sl2Triple, coroot_and_triple

logger = logging.getLogger(__name__)

# cap on phi candidates generated from words in the generator set
_WORD_CAP = 96


@dataclass
class IsoCertificate:
    """(s, P, phi); ``phi`` None stands for the identity."""

    s: Dict[int, Tuple[Fraction, ...]]
    P: IntMatrix
    phi: Optional[Matrix] = None

    def phi_matrix(self, dim: int) -> Matrix:
        return identity_matrix(dim) if self.phi is None else self.phi

    def s_is_zero(self) -> bool:
        return not any(x for v in self.s.values() for x in v)

    def s_of(self, alpha: Sequence[int], n: int) -> Tuple[Fraction, ...]:
        """Extend s linearly from the base to the root lattice."""
        total = [Fraction(0)] * n
        for k, a in enumerate(alpha):
            if a and k in self.s:
                total = [t + a * v for t, v in zip(total, self.s[k])]
        return tuple(total)

    def is_trivial(self) -> bool:
        n = len(self.P)
        return self.s_is_zero() and self.P == lattice.identity(n) and self.phi is None

    def to_file(self) -> CertificateFile:
        phi: Any = "identity"
        if self.phi is not None:
            phi = [[x.to_json() for x in row] for row in self.phi]
        return CertificateFile(
            s={f"a{k + 1}": [str(x) for x in v] for k, v in sorted(self.s.items())},
            P=[list(row) for row in self.P],
            phi=phi,
        )

    @classmethod
    def from_file(cls, data: CertificateFile, order: int = 1) -> "IsoCertificate":
        s: Dict[int, Tuple[Fraction, ...]] = {}
        for label, values in data.s.items():
            if not label.startswith("a") or not label[1:].isdigit():
                raise CertificateInvalidError(f"unknown base root label {label!r}", step="parse")
            s[int(label[1:]) - 1] = lattice.fractions(values)
        phi: Optional[Matrix] = None
        if not isinstance(data.phi, str):
            phi = [tuple(CycNum.from_json(x, order) for x in row) for row in data.phi]
        elif data.phi != "identity":
            raise CertificateInvalidError(f"phi must be 'identity' or a matrix, got {data.phi!r}", step="parse")
        return cls(s=s, P=lattice.as_int_matrix(data.P), phi=phi)


# ---------------------------------------------------------------------------
# Regrading
# ---------------------------------------------------------------------------


def apply_regrade(L: GradedLoop, r: Regrade) -> RegradedView:
    """
    The view L_(rho) or L^(s).

    Raises:
        NotMonomorphismError: if rho is singular
        DomainMismatchError: if rho is not integral on <supp L>, or an
            s-shift is applied without a root grading
    """
    if r.kind == "rho":
        assert r.rho is not None
        if len(r.rho) != L.n or lattice.determinant(r.rho) == 0:
            raise NotMonomorphismError("rho is not injective on Z^n", step="rho")
        for v in support_group_of(L):
            if lattice.apply_int(r.rho, v) is None:
                raise DomainMismatchError(
                    f"rho does not map the support generator {list(v)} into Z^n",
                    step="rho",
                    debug_info={"generator": list(v)},
                )
    elif r.kind == "s_shift":
        assert r.s is not None
        rd = L.rootdatum
        if rd is None:
            raise DomainMismatchError("an s-shift needs the root grading", step="s_shift")
        for k, value in r.s.items():
            if k >= rd.rank or len(value) != L.n:
                raise DomainMismatchError(f"s is not defined on base root a{k + 1}", step="s_shift")
    return RegradedView(L, r)


def check_regrade_support(view: RegradedView, radius: Optional[int] = None) -> VerificationResult:
    """supp(view) = rho(supp source) on the window, component by component."""
    radius = get_settings().window_radius if radius is None else radius
    source = view.source
    dim = view.base.dim
    if view.regrade.kind == "s_shift":
        back = RegradedView(view, Regrade.shift({k: tuple(-x for x in v) for k, v in (view.regrade.s or {}).items()}))
        degree = compare_on_window(back, source, radius, roots=True)
        if degree is not None:
            return VerificationResult(passed=False, step="s_shift", witness={"degree": list(degree)})
        return VerificationResult(passed=True)
    assert view.regrade.rho is not None
    for degree in lattice.box(radius, view.n):
        comp = source.component(degree)
        if not comp:
            continue
        image = lattice.apply_int(view.regrade.rho, degree)
        if image is None:
            return VerificationResult(passed=False, step="integral", witness={"degree": list(degree)})
        ok = IncrementalBasis(dim)
        for v in view.component(image):
            ok.add(v)
        if len(ok) != len(comp) or not all(ok.contains(v) for v in comp):
            return VerificationResult(
                passed=False, step="support", witness={"degree": list(degree), "image": list(image)}
            )
    return VerificationResult(passed=True)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


def _residual(a: Matrix, b: Matrix) -> Optional[Tuple[int, List[List[str]]]]:
    """First column where a and b differ, with the residual column."""
    diff = mat_sub(a, b)
    for c in range(len(diff[0]) if diff else 0):
        column = [diff[r][c] for r in range(len(diff))]
        if any(column):
            return c, [x.to_json() for x in column]
    return None


def _verify_conjugation(
    L: MultiloopLieAlgebra,
    L_prime: MultiloopLieAlgebra,
    source: AutTuple,
    p: Sequence[Sequence[int]],
    phi: Matrix,
) -> VerificationResult:
    """sigma'_j phi = phi source^P_j for every j, after shape and bracket checks."""
    g, g_prime = L.base, L_prime.base
    if g.dim != g_prime.dim:
        return VerificationResult(passed=False, step="dimension", witness={"dims": [g.dim, g_prime.dim]})
    if L.n != L_prime.n:
        return VerificationResult(passed=False, step="nullity", witness={"n": [L.n, L_prime.n]})
    if len(p) != L.n or not lattice.is_unimodular(p):
        return VerificationResult(passed=False, step="unimodular", witness={"P": [list(r) for r in p]})
    if len(phi) != g_prime.dim or any(len(row) != g.dim for row in phi):
        return VerificationResult(passed=False, step="shape")
    if determinant(phi).is_zero():
        return VerificationResult(passed=False, step="invertible")
    pair = bracket_violation(g, phi) if g is g_prime else cross_bracket_violation(g, g_prime, phi)
    if pair is not None:
        return VerificationResult(passed=False, step="bracket", witness={"pair": list(pair)})
    moved = gl_action(source, p)
    for j, (target, b) in enumerate(zip(L_prime.sigma, moved)):
        residual = _residual(mat_mul(target.matrix, phi), mat_mul(phi, b.matrix))
        if residual is not None:
            column, values = residual
            return VerificationResult(
                passed=False,
                step="conjugation",
                witness={"index": j + 1, "basis": column, "residual": values},
            )
    return VerificationResult(passed=True)


def verify_zn_certificate(
    L: MultiloopLieAlgebra,
    L_prime: MultiloopLieAlgebra,
    p: Sequence[Sequence[int]],
    phi: Optional[Matrix] = None,
) -> VerificationResult:
    """L ~Zn-su L' via sigma' = phi sigma^P phi^-1."""
    phi = identity_matrix(L.base.dim) if phi is None else phi
    result = _verify_conjugation(L, L_prime, L.sigma, p, phi)
    logger.debug(f"Z^n certificate {L!r} -> {L_prime!r}: {result.passed} {result.step}")
    return result


def twisted_tuple(L: MultiloopLieAlgebra, s: Mapping[int, Sequence[Fraction]], m: Optional[Sequence[int]] = None) -> AutTuple:
    """tau sigma with tau read from s (rational s, tau_i = zeta^{-s_i})."""
    if not any(x for v in s.values() for x in v):
        return L.sigma if m is None else L.sigma.with_m(m)
    if L.rootdatum is None:
        raise DomainMismatchError("a nonzero s needs the root grading", step="s")
    tau = tau_twist(L.base, L.rootdatum, s, None)
    composed = [t.compose(x) for t, x in zip(tau, L.sigma)]
    return AutTuple(composed, m)


def verify_supp_certificate(
    L: MultiloopLieAlgebra, L_prime: MultiloopLieAlgebra, cert: IsoCertificate
) -> VerificationResult:
    """
    L ~supp L' via sigma' = phi (tau sigma)^P phi^-1.

    Raises:
        FieldTooSmallError: if tau needs roots of unity outside the session field
    """
    rd = L.rootdatum
    if not cert.s_is_zero():
        if rd is None:
            return VerificationResult(passed=False, step="s_nonzero", witness={"reason": "g^sigma = 0"})
        bad = [k for k, v in cert.s.items() if k >= rd.rank or len(v) != L.n]
        if bad:
            return VerificationResult(passed=False, step="s_domain", witness={"base_index": bad[0] + 1})
    try:
        source = twisted_tuple(L, cert.s)
    except MultiloopError as exc:
        if exc.error_code.startswith("FIELD"):
            raise
        return VerificationResult(passed=False, step="tau", witness={"error": exc.error_code})
    result = _verify_conjugation(L, L_prime, source, cert.P, cert.phi_matrix(L.base.dim))
    logger.info(f"support certificate {L!r} -> {L_prime!r}: {'pass' if result.passed else result.step}")
    return result


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------


@dataclass
class ChainStep:
    name: str
    source: GradedLoop
    regrade: Regrade
    target: MultiloopLieAlgebra

    def verify(self, radius: int) -> VerificationResult:
        view = apply_regrade(self.source, self.regrade)
        roots = self.regrade.kind == "s_shift"
        degree = compare_on_window(view, self.target, radius, roots=roots)
        if degree is not None:
            return VerificationResult(passed=False, step=self.name, witness={"degree": list(degree)})
        return VerificationResult(passed=True)

    def describe(self) -> Dict[str, Any]:
        if self.regrade.kind == "rho":
            assert self.regrade.rho is not None
            value: Any = [[str(x) for x in row] for row in self.regrade.rho]
        else:
            value = {f"a{k + 1}": list(v) for k, v in sorted((self.regrade.s or {}).items())}
        return {"name": self.name, "kind": self.regrade.kind, "value": value, "m": list(self.target.m)}


@dataclass
class CertificateChain:
    steps: List[ChainStep]
    end: MultiloopLieAlgebra
    target: MultiloopLieAlgebra
    phi: Optional[Matrix] = None
    results: List[VerificationResult] = field(default_factory=list)

    def verify(self, radius: Optional[int] = None) -> VerificationResult:
        """Each regrade against its explicit algebra, then the end isomorphism."""
        radius = get_settings().window_radius if radius is None else radius
        self.results = [step.verify(radius) for step in self.steps]
        failed = next((r for r in self.results if not r.passed), None)
        if failed is not None:
            return failed
        if self.phi is not None:
            final = verify_zn_certificate(self.end, self.target, lattice.identity(self.end.n), self.phi)
            self.results.append(final)
            if not final.passed:
                return VerificationResult(passed=False, step=f"phi:{final.step}", witness=final.witness)
        else:
            degree = compare_on_window(self.end, self.target, radius)
            if degree is not None:
                return VerificationResult(passed=False, step="end", witness={"degree": list(degree)})
        return VerificationResult(passed=True)

    def describe(self) -> List[Dict[str, Any]]:
        out = [step.describe() for step in self.steps]
        if self.phi is not None:
            out.append({"name": "phi", "kind": "isograded", "value": "matrix", "m": list(self.target.m)})
        return out


def _denominators(cert: IsoCertificate, n: int) -> Tuple[int, ...]:
    a = [1] * n
    for v in cert.s.values():
        for i, x in enumerate(v):
            a[i] = lcm(a[i], x.denominator)
    return tuple(a)


def chain_from_certificate(
    cert: IsoCertificate, L: MultiloopLieAlgebra, L_prime: MultiloopLieAlgebra
) -> CertificateChain:
    """
    L -> L_(rho1) -> (.)^(t) -> (.)_(rho2) -> phi, with rho1 = diag(a),
    t = (a_i m_i s_i) and rho2 = D_m' P^T D_m~^-1; identity steps are dropped.

    Raises:
        CertificateInvalidError: if the certificate does not verify
    """
    result = verify_supp_certificate(L, L_prime, cert)
    if not result.passed:
        raise CertificateInvalidError(
            f"certificate fails at {result.step}", step=result.step, debug_info={"witness": result.witness}
        )
    n = L.n
    rd = L.rootdatum
    steps: List[ChainStep] = []
    a = _denominators(cert, n)
    m_tilde = tuple(ai * mi for ai, mi in zip(a, L.m))
    current: MultiloopLieAlgebra = L
    if any(ai != 1 for ai in a):
        target = MultiloopLieAlgebra(L.sigma.with_m(m_tilde), rootdatum=rd)
        steps.append(ChainStep("rho1", current, Regrade.from_rho(lattice.diagonal(a)), target))
        current = target
    twisted = current.sigma
    if not cert.s_is_zero():
        t = {
            k: tuple(int(ai * mi * x) for ai, mi, x in zip(a, L.m, v))
            for k, v in cert.s.items()
        }
        twisted = twisted_tuple(L, cert.s, m_tilde)
        target = MultiloopLieAlgebra(twisted, rootdatum=rd)
        steps.append(ChainStep("shift", current, Regrade.shift(t), target))
        current = target
    moved = gl_action(twisted, cert.P).with_m(L_prime.m)
    phi = cert.phi
    q = admissible_matrix(cert.P, L_prime.m, m_tilde)
    if q != lattice.diagonal([1] * n) or not _same_tuple(moved, current.sigma):
        target = MultiloopLieAlgebra(moved, rootdatum=rd)
        steps.append(ChainStep("rho2", current, Regrade.from_rho(q), target))
        current = target
    chain = CertificateChain(steps=steps, end=current, target=L_prime, phi=phi)
    logger.info(f"certificate chain {L!r} -> {L_prime!r}: {[s.name for s in steps]}{' + phi' if phi else ''}")
    return chain


def _same_tuple(a: AutTuple, b: AutTuple) -> bool:
    return a.m == b.m and all(mat_equal(x.matrix, y.matrix) for x, y in zip(a, b))


class SupportMap:
    """
    The support-isomorphism L -> L' of a chain as a map on loop elements:
    x_alpha t^lambda -> phi(x_alpha) t^(rho2 (a lambda - t(alpha))).
    """

    def __init__(self, cert: IsoCertificate, L: MultiloopLieAlgebra, L_prime: MultiloopLieAlgebra):
        self.cert = cert
        self.source = L
        self.target = L_prime
        n = L.n
        self.a = _denominators(cert, n)
        m_tilde = tuple(ai * mi for ai, mi in zip(self.a, L.m))
        self.rho2 = admissible_matrix(cert.P, L_prime.m, m_tilde)
        self.phi = cert.phi_matrix(L.base.dim)
        rd = L.rootdatum
        self._pieces: List[Tuple[Tuple[int, ...], int]] = []
        vectors: List[Vector] = []
        if rd is not None and not cert.s_is_zero():
            for alpha in [(0,) * rd.rank] + list(rd.roots):
                for v in rd.space(alpha):
                    vectors.append(v)
                    self._pieces.append((alpha, len(vectors) - 1))
        self._solver = CoordinateSolver(vectors, L.base.dim) if vectors else None
        self._vectors = vectors

    def shift(self, alpha: Sequence[int]) -> Tuple[int, ...]:
        """t(alpha) = (a_i m_i s_i(alpha))."""
        s = self.cert.s_of(alpha, self.source.n)
        return tuple(int(ai * mi * x) for ai, mi, x in zip(self.a, self.source.m, s))

    def degree(self, degree: Sequence[int], alpha: Optional[Sequence[int]] = None) -> Tuple[int, ...]:
        t = self.shift(alpha) if alpha is not None else (0,) * len(degree)
        pre = [ai * d - ti for ai, d, ti in zip(self.a, degree, t)]
        image = lattice.apply_int(self.rho2, pre)
        if image is None:
            raise CertificateInvalidError(
                f"degree {list(degree)} has no integral image", step="degree", debug_info={"degree": list(degree)}
            )
        return image

    def apply(self, element: LoopElement) -> LoopElement:
        out = LoopElement()
        dim = self.source.base.dim
        for degree, x in element.terms.items():
            if self._solver is None:
                out = out + LoopElement.monomial(mat_vec(self.phi, x), self.degree(degree))
                continue
            coords = self._solver.coordinates(x)
            assert coords is not None
            parts: Dict[Tuple[int, ...], List[Tuple[CycNum, Vector]]] = {}
            for (alpha, k), c in zip(self._pieces, coords):
                if c:
                    parts.setdefault(alpha, []).append((c, self._vectors[k]))
            for alpha, terms in parts.items():
                piece = vec_combine(terms, dim)
                out = out + LoopElement.monomial(mat_vec(self.phi, piece), self.degree(degree, alpha))
        return out


def support_map(cert: IsoCertificate, L: MultiloopLieAlgebra, L_prime: MultiloopLieAlgebra) -> SupportMap:
    return SupportMap(cert, L, L_prime)


def invert_certificate(
    cert: IsoCertificate, L: MultiloopLieAlgebra, L_prime: MultiloopLieAlgebra
) -> IsoCertificate:
    """
    (phi^-1, P^-1, s') certifying L' ~supp L, with s'(alpha') = -P^T s(alpha)
    for phi(g_alpha) = g'_alpha'.

    Raises:
        CertificateInvalidError: if phi does not carry root spaces to root spaces
    """
    n = L.n
    p_inv = lattice.int_inverse(cert.P)
    phi_inv = None if cert.phi is None else inverse(cert.phi)
    s_prime: Dict[int, Tuple[Fraction, ...]] = {}
    if not cert.s_is_zero():
        rd, rd_prime = L.rootdatum, L_prime.rootdatum
        if rd is None or rd_prime is None:
            raise CertificateInvalidError("inverting a nonzero s needs both root gradings", step="invert")
        pt = lattice.transpose(cert.P)
        for k, base_root in enumerate(rd_prime.simple_roots):
            x = rd_prime.root_spaces[base_root][0]
            y = x if phi_inv is None else mat_vec(phi_inv, x)
            alpha = _root_containing(rd, y)
            if alpha is None:
                raise CertificateInvalidError(
                    f"phi^-1 does not map g'_a{k + 1} into a root space", step="invert", debug_info={"base_index": k + 1}
                )
            value = lattice.apply(pt, cert.s_of(alpha, n))
            s_prime[k] = tuple(-x for x in value)
    return IsoCertificate(s=s_prime, P=p_inv, phi=phi_inv)


def _root_containing(rd: RootDatum, v: Vector) -> Optional[Tuple[int, ...]]:
    for alpha in rd.roots:
        span = IncrementalBasis(rd.algebra.dim)
        for w in rd.space(alpha):
            span.add(w)
        if span.contains(v):
            return alpha
    return None


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------


def _diagram_permutations(g: LieAlgebra) -> List[List[int]]:
    if g.chevalley is None:
        return []
    a = g.chevalley.cartan_matrix
    r = g.chevalley.rank
    out = []
    for pi in itertools.permutations(range(r)):
        if list(pi) == list(range(r)):
            continue
        if all(a[pi[i]][pi[j]] == a[i][j] for i in range(r) for j in range(r)):
            out.append([x + 1 for x in pi])
    return out


def phi_generators(L: MultiloopLieAlgebra, L_prime: MultiloopLieAlgebra) -> List[Automorphism]:
    """Inner reflections, diagram and torus automorphisms, Chevalley involution."""
    g = L.base
    gens: List[Automorphism] = []
    rd = L.rootdatum
    if rd is not None:
        for alpha in rd.simple_roots:
            try:
                gens.append(inner_reflection(g, coroot_and_triple(rd, alpha)))
            except MultiloopError as exc:
                logger.debug(f"no reflection for {rd.label(alpha)}: {exc.message}")
    data = g.chevalley
    if data is not None:
        for i in range(data.rank):
            e, f = g.basis_vector(data.e[i]), g.basis_vector(data.f[i])
            triple = Sl2Triple(e, f, g.bracket(e, f), tuple(1 if j == i else 0 for j in range(data.rank)))
            gens.append(inner_reflection(g, triple))
        for permutation in _diagram_permutations(g):
            gens.append(diagram(g, permutation))
        gens.append(chevalley_involution(g))
        order = 1
        for mi in L.m + L_prime.m:
            order = lcm(order, mi)
        if order > 1:
            for i in range(data.rank):
                weights = [Fraction(1, order) if j == i else 0 for j in range(data.rank)]
                gens.append(torus(g, weights))
    return gens


def phi_candidates(
    L: MultiloopLieAlgebra, L_prime: MultiloopLieAlgebra, word_length: int
) -> List[Matrix]:
    """Identity first, then words in the generators by length, deduplicated."""
    g = L.base
    eye = identity_matrix(g.dim)
    seen = {matrix_key(eye)}
    out: List[Matrix] = [eye]
    gens = [a.matrix for a in phi_generators(L, L_prime)]
    frontier = [eye]
    for _ in range(word_length):
        nxt = []
        for w in frontier:
            for x in gens:
                y = mat_mul(x, w)
                key = matrix_key(y)
                if key in seen:
                    continue
                seen.add(key)
                out.append(y)
                nxt.append(y)
                if len(out) >= _WORD_CAP:
                    return out
        frontier = nxt
    return out


def _root_of_unity_exponent(c: CycNum, bound: int) -> Optional[Fraction]:
    """q in [0, 1) with c = zeta^q, if c is a root of unity."""
    power = c
    for k in range(1, bound + 1):
        if power.is_one():
            for j in range(k):
                if root_of_unity(Fraction(j, k)) == c:
                    return Fraction(j, k)
            return None
        power = power * c
    return None


def _read_s(L: MultiloopLieAlgebra, tau: Sequence[Matrix]) -> Optional[Dict[int, Tuple[Fraction, ...]]]:
    """s on the base from tau_i (tau_i x_alpha = zeta^{-s_i(alpha)} x_alpha), or None."""
    rd = L.rootdatum
    dim = L.base.dim
    if rd is None:
        return {} if all(mat_equal(t, identity_matrix(dim)) for t in tau) else None
    bound = get_settings().order_bound
    s: Dict[int, Tuple[Fraction, ...]] = {}
    for k, alpha in enumerate(rd.simple_roots):
        x = rd.root_spaces[alpha][0]
        pivot = next(i for i, v in enumerate(x) if v)
        values = []
        for t in tau:
            y = mat_vec(t, x)
            c = y[pivot] / x[pivot]
            if any(a != c * b for a, b in zip(y, x)):
                return None
            q = _root_of_unity_exponent(c, bound)
            if q is None:
                return None
            values.append((-q) % 1)
        s[k] = tuple(values)
    return s


def search_certificate(
    L: MultiloopLieAlgebra, L_prime: MultiloopLieAlgebra, bound: Optional[int] = None
) -> Optional[IsoCertificate]:
    """
    First verified certificate with P entries and phi word length within
    ``bound``; None means not found (inconclusive).
    """
    bound = get_settings().certificate_bound if bound is None else bound
    if L.base.dim != L_prime.base.dim or L.n != L_prime.n:
        logger.info(f"search {L!r} -> {L_prime!r}: dimension precheck fails")
        return None
    if L.base is not L_prime.base and L.base.structure_triples() != L_prime.base.structure_triples():
        logger.info(f"search {L!r} -> {L_prime!r}: different structure tables")
        return None
    candidates_p = lattice.unimodular_matrices(L.n, bound)
    phis = phi_candidates(L, L_prime, bound)
    logger.info(f"search {L!r} -> {L_prime!r}: {len(phis)} phi x {len(candidates_p)} P candidates")
    sigma_inverse = [a.inverse().matrix for a in L.sigma]
    eye = identity_matrix(L.base.dim)
    for phi in phis:
        phi_inv = inverse(phi)
        is_identity = mat_equal(phi, eye)
        pulled = AutTuple(
            [Automorphism(L.base, mat_mul(mat_mul(phi_inv, a.matrix), phi), a.order) for a in L_prime.sigma]
        )
        for p in candidates_p:
            back = gl_action(pulled, lattice.int_inverse(p))
            tau = [mat_mul(b.matrix, si) for b, si in zip(back, sigma_inverse)]
            s = _read_s(L, tau)
            if s is None:
                continue
            cert = IsoCertificate(s=s, P=p, phi=None if is_identity else phi)
            if verify_supp_certificate(L, L_prime, cert).passed:
                logger.info(f"certificate found: P={p}, s={s}, phi={'identity' if is_identity else 'word'}")
                return cert
    logger.info(f"no certificate within bound {bound}")
    return None


__all__ = [
    "CertificateChain",
    "ChainStep",
    "IsoCertificate",
    "SupportMap",
    "apply_regrade",
    "chain_from_certificate",
    "check_regrade_support",
    "invert_certificate",
    "phi_candidates",
    "search_certificate",
    "support_map",
    "verify_supp_certificate",
    "verify_zn_certificate",
]
