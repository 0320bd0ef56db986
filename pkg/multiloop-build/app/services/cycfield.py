"""
Exact arithmetic in cyclotomic fields Q(zeta_N).

Elements are stored in the power basis 1, zeta_N, ..., zeta_N^(d-1) of
Q[x]/(Phi_N), d = deg Phi_N, so equality is coefficient-wise. Roots of unity
of different orders are compatible: zeta_{MN}^M = zeta_N, which is realized by
``lift``. Mixed-order operands are lifted to the lcm of their orders.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, List, Sequence, Tuple, Union

import sympy

from app.core.exceptions import DivisionByZeroError, NotDivisibleError, ParseError

logger = logging.getLogger(__name__)

_X = sympy.Symbol("x")

Scalar = Union["CycNum", int, Fraction]


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@lru_cache(maxsize=None)
def cyclotomic_coefficients(order: int) -> Tuple[int, ...]:
    """Integer coefficients of Phi_order, lowest degree first."""
    if order < 1:
        raise NotDivisibleError(f"cyclotomic order must be positive, got {order}")
    poly = sympy.Poly(sympy.cyclotomic_poly(order, _X), _X)
    return tuple(int(c) for c in reversed(poly.all_coeffs()))


def cyclotomic_degree(order: int) -> int:
    return len(cyclotomic_coefficients(order)) - 1


@lru_cache(maxsize=None)
def _power_table(order: int) -> Tuple[Tuple[Fraction, ...], ...]:
    """Coordinates of x^e mod Phi_order for 0 <= e < order."""
    phi = cyclotomic_coefficients(order)
    d = len(phi) - 1
    current = [Fraction(0)] * d
    current[0] = Fraction(1)
    rows = []
    for _ in range(order):
        rows.append(tuple(current))
        top = current[-1]
        shifted = [Fraction(0)] + current[:-1]
        if top:
            for k in range(d):
                shifted[k] -= top * phi[k]
        current = shifted
    return tuple(rows)


@lru_cache(maxsize=None)
def _unit_trace(order: int, power: int) -> Fraction:
    """Normalized trace of zeta_order^power: mu(M) / phi(M) with M = order / gcd(order, power)."""
    m = order // gcd(order, power)
    return Fraction(int(sympy.mobius(m)), int(sympy.totient(m)))


@lru_cache(maxsize=8192)
def _inverse_coeffs(order: int, coeffs: Tuple[Fraction, ...]) -> Tuple[Fraction, ...]:
    phi = sympy.Poly(list(reversed(cyclotomic_coefficients(order))), _X, domain=sympy.QQ)
    poly = sympy.Poly(
        [sympy.Rational(c.numerator, c.denominator) for c in reversed(coeffs)],
        _X,
        domain=sympy.QQ,
    )
    inverse = poly.invert(phi)
    values = [sympy.Rational(c) for c in reversed(inverse.all_coeffs())]
    out = [Fraction(0)] * len(coeffs)
    for k, c in enumerate(values):
        out[k] = Fraction(int(c.p), int(c.q))
    return tuple(out)


class CycNum:
    """Immutable element of Q(zeta_order)."""

    __slots__ = ("order", "coeffs")

    order: int
    coeffs: Tuple[Fraction, ...]

    def __init__(self, order: int, coeffs: Iterable[Union[int, Fraction]]):
        values = tuple(Fraction(c) for c in coeffs)
        degree = cyclotomic_degree(order)
        if len(values) != degree:
            raise ParseError(
                f"expected {degree} coefficients for order {order}, got {len(values)}",
                field="coeffs",
            )
        self.order = order
        self.coeffs = values

    # -- constructors -------------------------------------------------------

    @classmethod
    def rational(cls, value: Union[int, Fraction, str]) -> "CycNum":
        return cls(1, (Fraction(value),))

    @classmethod
    def zeta(cls, order: int, power: int = 1) -> "CycNum":
        return cls(order, _power_table(order)[power % order])

    @classmethod
    def coerce(cls, value: Scalar) -> "CycNum":
        if isinstance(value, CycNum):
            return value
        if isinstance(value, (int, Fraction)):
            return cls.rational(value)
        raise TypeError(f"cannot interpret {value!r} as a cyclotomic number")

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def is_one(self) -> bool:
        return self.is_rational() and self.coeffs[0] == 1

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    # -- field embedding ----------------------------------------------------

    def lift(self, order: int) -> "CycNum":
        """Image under Q(zeta_N) -> Q(zeta_M), zeta_N -> zeta_M^(M/N)."""
        if self.is_rational():
            # Q sits in every Q(zeta_M), whatever order the value was stored at
            return CycNum(order, (self.coeffs[0],) + (Fraction(0),) * (cyclotomic_degree(order) - 1))
        if order % self.order:
            raise NotDivisibleError(
                f"{self.order} does not divide {order}",
                order=order,
                debug_info={"source_order": self.order},
            )
        if order == self.order:
            return self
        step = order // self.order
        table = _power_table(order)
        out = [Fraction(0)] * cyclotomic_degree(order)
        for k, c in enumerate(self.coeffs):
            if c:
                row = table[(k * step) % order]
                for j, r in enumerate(row):
                    if r:
                        out[j] += c * r
        return CycNum(order, out)

    def _aligned(self, other: "CycNum") -> Tuple["CycNum", "CycNum"]:
        if self.order == other.order:
            return self, other
        if other.is_rational():
            return self, other.lift(self.order)
        if self.is_rational():
            return self.lift(other.order), other
        common = lcm(self.order, other.order)
        return self.lift(common), other.lift(common)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: Scalar) -> "CycNum":
        if not isinstance(other, (CycNum, int, Fraction)):
            return NotImplemented
        a, b = self._aligned(CycNum.coerce(other))
        return CycNum(a.order, (x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> "CycNum":
        return CycNum(self.order, (-c for c in self.coeffs))

    def __sub__(self, other: Scalar) -> "CycNum":
        if not isinstance(other, (CycNum, int, Fraction)):
            return NotImplemented
        return self + (-CycNum.coerce(other))

    def __rsub__(self, other: Scalar) -> "CycNum":
        return CycNum.coerce(other) - self

    def __mul__(self, other: Scalar) -> "CycNum":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return CycNum(self.order, (0,) * len(self.coeffs))
            return CycNum(self.order, (c * other for c in self.coeffs))
        if not isinstance(other, CycNum):
            return NotImplemented
        if other.is_rational():
            return self * other.coeffs[0]
        if self.is_rational():
            return other * self.coeffs[0]
        a, b = self._aligned(other)
        order = a.order
        d = len(a.coeffs)
        product = [Fraction(0)] * (2 * d - 1)
        for i, x in enumerate(a.coeffs):
            if not x:
                continue
            for j, y in enumerate(b.coeffs):
                if y:
                    product[i + j] += x * y
        out = product[:d]
        if len(product) > d:
            table = _power_table(order)
            for k in range(d, len(product)):
                c = product[k]
                if c:
                    for j, r in enumerate(table[k % order]):
                        if r:
                            out[j] += c * r
        return CycNum(order, out)

    __rmul__ = __mul__

    def inverse(self) -> "CycNum":
        if self.is_zero():
            raise DivisionByZeroError("inverse of zero", order=self.order)
        if self.is_rational():
            inv = 1 / self.coeffs[0]
            return CycNum(self.order, (inv,) + self.coeffs[1:])
        return CycNum(self.order, _inverse_coeffs(self.order, self.coeffs))

    def __truediv__(self, other: Scalar) -> "CycNum":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise DivisionByZeroError("division by rational zero", order=self.order)
            return self * (1 / Fraction(other))
        if not isinstance(other, CycNum):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other: Scalar) -> "CycNum":
        return CycNum.coerce(other) * self.inverse()

    def __pow__(self, exponent: int) -> "CycNum":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = CycNum(self.order, (1,) + (0,) * (len(self.coeffs) - 1))
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    # -- comparison and hashing ----------------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        if not isinstance(other, CycNum):
            return NotImplemented
        a, b = self._aligned(other)
        return a.coeffs == b.coeffs

    def __hash__(self) -> int:
        # must agree across lifts; Galois conjugates collide
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash(self.normalized_trace())

    def normalized_trace(self) -> Fraction:
        """Tr(x) / [Q(zeta_N):Q], unchanged by lifting."""
        return sum((c * _unit_trace(self.order, k) for k, c in enumerate(self.coeffs) if c), Fraction(0))

    def __bool__(self) -> bool:
        return not self.is_zero()

    # -- text forms ----------------------------------------------------------

    def to_json(self) -> List[str]:
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, value: Union[str, int, Sequence[Union[str, int]]], order: int) -> "CycNum":
        """Parse ``"p/q"`` (rational) or a list of power-basis coordinates."""
        try:
            if isinstance(value, (str, int)):
                return cls.rational(Fraction(value)).lift(order)
            return cls(order, (Fraction(v) for v in value))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad cyclotomic number {value!r}: {exc}") from exc

    def __str__(self) -> str:
        if self.is_rational():
            return str(self.coeffs[0])
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            if k == 0:
                terms.append(str(c))
                continue
            power = f"z{self.order}" if k == 1 else f"z{self.order}^{k}"
            if c == 1:
                terms.append(power)
            elif c == -1:
                terms.append(f"-{power}")
            else:
                terms.append(f"{c}*{power}")
        return " + ".join(terms).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"CycNum({self})"


ZERO = CycNum.rational(0)
ONE = CycNum.rational(1)


def lift(x: CycNum, order: int) -> CycNum:
    return x.lift(order)


def root_of_unity(q: Union[Fraction, int, str]) -> CycNum:
    """zeta^q := zeta_b^a for q = a/b in lowest terms."""
    value = Fraction(q)
    return CycNum.zeta(value.denominator, value.numerator)


def common_order(values: Iterable[CycNum]) -> int:
    order = 1
    for value in values:
        if not value.is_rational():
            order = lcm(order, value.order)
    return order
