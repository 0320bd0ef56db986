"""
Characteristic polynomials and exact eigen-decompositions.

Eigenvalues are searched among numbers u * s with u a root of unity of a
candidate cyclotomic order and s rational: p(u s) is split into rational
coordinate polynomials whose gcd carries the rational roots. This covers the
gradings (roots of unity) and the root decompositions (rational multiples of
roots of unity); anything else raises FieldTooSmallError.
"""

import logging
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import sympy

from app.core.config import get_settings
from app.core.exceptions import FieldTooSmallError, NotDiagonalizableError
from app.services.cycfield import ONE, ZERO, CycNum, common_order, lcm
from app.services.linalg import (
    CoordinateSolver,
    Matrix,
    Vector,
    identity_matrix,
    mat_mul,
    mat_sub,
    mat_vec,
    mat_scale,
    nullspace,
    vec_combine,
)

logger = logging.getLogger(__name__)

_S = sympy.Symbol("s")

Polynomial = List[CycNum]  # coefficients, lowest degree first

_EXTENSION_FACTORS = (1, 4, 3, 8, 6, 12, 5, 10, 24, 16, 20, 48)


def characteristic_polynomial(a: Sequence[Sequence[CycNum]]) -> Polynomial:
    """Faddeev-LeVerrier: det(t I - A), monic, lowest degree first."""
    n = len(a)
    coeffs: Polynomial = [ZERO] * (n + 1)
    coeffs[n] = ONE
    m: Matrix = [tuple(ZERO for _ in range(n)) for _ in range(n)]
    eye = identity_matrix(n)
    for k in range(1, n + 1):
        m = mat_mul(a, m)
        c = coeffs[n - k + 1]
        if c:
            m = [tuple(x + c * y if y else x for x, y in zip(row, erow)) for row, erow in zip(m, eye)]
        am = mat_mul(a, m)
        trace = ZERO
        for i in range(n):
            trace = trace + am[i][i]
        coeffs[n - k] = -trace / k
    return coeffs


def evaluate(poly: Sequence[CycNum], x: CycNum) -> CycNum:
    value = ZERO
    for c in reversed(poly):
        value = value * x + c
    return value


def divide_linear(poly: Sequence[CycNum], root: CycNum) -> Tuple[Polynomial, CycNum]:
    """Synthetic division by (t - root): quotient and remainder."""
    n = len(poly) - 1
    quotient: Polynomial = [ZERO] * n
    carry = ZERO
    for k in range(n, 0, -1):
        carry = poly[k] + carry * root
        quotient[k - 1] = carry
    remainder = poly[0] + carry * root
    return quotient, remainder


def multiplicity(poly: Sequence[CycNum], root: CycNum) -> int:
    count = 0
    current = list(poly)
    while len(current) > 1:
        quotient, remainder = divide_linear(current, root)
        if remainder:
            break
        count += 1
        current = quotient
    return count


def _rational_roots_of_coordinates(poly: Sequence[CycNum], order: int) -> List[Fraction]:
    """Rational s with poly(s) = 0, poly having coefficients in Q(zeta_order)."""
    lifted = [c.lift(order) for c in poly]
    width = len(lifted[0].coeffs)
    components = []
    for r in range(width):
        coeffs = [sympy.Rational(c.coeffs[r].numerator, c.coeffs[r].denominator) for c in lifted]
        if any(coeffs):
            components.append(sympy.Poly(list(reversed(coeffs)), _S, domain=sympy.QQ))
    if not components:
        return []
    common = components[0]
    for component in components[1:]:
        common = sympy.gcd(common, component)
    if common.degree() < 1:
        return []
    roots = []
    _, factors = sympy.factor_list(common.as_expr(), _S)
    for factor, _ in factors:
        fp = sympy.Poly(factor, _S)
        if fp.degree() == 1:
            a, b = fp.all_coeffs()
            value = sympy.Rational(-b, a)
            roots.append(Fraction(int(value.p), int(value.q)))
    return roots


def _candidate_orders(base: int) -> List[int]:
    settings = get_settings()
    if not settings.auto_extend_field:
        return [base]
    orders: List[int] = []
    for k in _EXTENSION_FACTORS:
        order = lcm(base, k)
        if order <= max(base, settings.max_field_order) and order not in orders:
            orders.append(order)
    return orders


def eigenvalues(a: Sequence[Sequence[CycNum]], base_order: Optional[int] = None) -> List[Tuple[CycNum, int]]:
    """
    Eigenvalues with algebraic multiplicities.

    Raises:
        FieldTooSmallError: if the found roots do not account for the full degree
    """
    n = len(a)
    if n == 0:
        return []
    poly = characteristic_polynomial(a)
    # entries may live in a larger field than the grading periods suggest
    order = lcm(base_order or 1, common_order(poly))
    found: List[Tuple[CycNum, int]] = []
    total = 0
    for candidate in _candidate_orders(order):
        for k in range(candidate):
            unit = CycNum.zeta(candidate, k)
            scaled = [c * unit ** j for j, c in enumerate(poly)]
            for s in _rational_roots_of_coordinates(scaled, candidate):
                value = unit * s
                if any(value == v for v, _ in found):
                    continue
                mult = multiplicity(poly, value)
                if mult:
                    found.append((value, mult))
                    total += mult
            if total == n:
                return found
    raise FieldTooSmallError(
        "characteristic polynomial does not split into root-of-unity multiples of rationals",
        order=order,
        debug_info={
            "degree": n,
            "found": [str(v) for v, _ in found],
            "characteristic_polynomial": [str(c) for c in poly],
        },
    )


def eigenspaces(a: Sequence[Sequence[CycNum]], base_order: Optional[int] = None) -> List[Tuple[CycNum, List[Vector]]]:
    """Eigenvalue / eigenvector-basis pairs; raises if A is not diagonalizable."""
    n = len(a)
    out = []
    total = 0
    for value, _ in eigenvalues(a, base_order):
        shifted = mat_sub(a, mat_scale(value, identity_matrix(n)))
        basis = nullspace(shifted)
        out.append((value, basis))
        total += len(basis)
    if total != n:
        raise NotDiagonalizableError(
            "eigenspace dimensions do not sum to the size",
            witness={"size": n, "eigenspace_total": total},
        )
    return out


def restrict(a: Sequence[Sequence[CycNum]], basis: Sequence[Vector]) -> Matrix:
    """Matrix of A on an A-invariant subspace, in the coordinates of ``basis``."""
    n = len(a)
    solver = CoordinateSolver(basis, n)
    columns = []
    for b in basis:
        coords = solver.coordinates(mat_vec(a, b))
        if coords is None:
            raise NotDiagonalizableError("subspace is not invariant under the operator")
        columns.append(coords)
    k = len(basis)
    return [tuple(columns[j][i] for j in range(k)) for i in range(k)]


def simultaneous_eigenspaces(
    operators: Sequence[Sequence[Sequence[CycNum]]],
    dim: int,
    base_order: Optional[int] = None,
    start: Optional[Sequence[Vector]] = None,
) -> List[Tuple[Tuple[CycNum, ...], List[Vector]]]:
    """
    Joint eigenspace decomposition of commuting operators.

    Refines one operator at a time, working with the restricted matrix on each
    block found so far.
    """
    initial = list(start) if start is not None else identity_matrix(dim)
    blocks: List[Tuple[Tuple[CycNum, ...], List[Vector]]] = [((), initial)]
    for op in operators:
        refined = []
        for values, basis in blocks:
            if not basis:
                continue
            local = restrict(op, basis)
            for value, coords in eigenspaces(local, base_order):
                vectors = [vec_combine(zip(c, basis), dim) for c in coords]
                refined.append((values + (value,), vectors))
        blocks = refined
    return blocks
