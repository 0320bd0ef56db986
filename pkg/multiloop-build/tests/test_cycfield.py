"""
Tests for exact cyclotomic arithmetic.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.exceptions import DivisionByZeroError, NotDivisibleError, ParseError
from app.services.cycfield import (
    ONE,
    ZERO,
    CycNum,
    common_order,
    cyclotomic_degree,
    lift,
    root_of_unity,
)

small = st.fractions(min_value=-5, max_value=5, max_denominator=4)


def elements(order: int):
    return st.lists(small, min_size=cyclotomic_degree(order), max_size=cyclotomic_degree(order)).map(
        lambda cs: CycNum(order, cs)
    )


def test_degrees():
    assert [cyclotomic_degree(n) for n in (1, 2, 3, 4, 6, 8, 12)] == [1, 1, 2, 2, 2, 4, 4]


def test_roots_of_unity_have_their_order():
    for n in (2, 3, 4, 5, 6, 8, 12):
        z = CycNum.zeta(n)
        assert z**n == ONE
        assert all(z**k != ONE for k in range(1, n))


def test_lift_of_zeta3_into_order_6():
    """zeta_3 = zeta_6^2 = zeta_6 - 1."""
    lifted = lift(CycNum.zeta(3), 6)
    assert lifted.order == 6
    assert lifted.coeffs == (Fraction(-1), Fraction(1))
    assert lifted == CycNum.zeta(3)


def test_lift_requires_divisibility():
    with pytest.raises(NotDivisibleError):
        CycNum.zeta(4).lift(6)


def test_rationals_lift_from_any_order():
    minus_one = CycNum.zeta(4, 2)
    assert minus_one.order == 4
    lifted = minus_one.lift(6)
    assert lifted.order == 6
    assert lifted == -1
    assert CycNum.zeta(2, 1) + CycNum.zeta(3) == CycNum.zeta(3) - 1
    assert (CycNum.zeta(2, 1) * CycNum.zeta(5)).order == 5


def test_mixed_orders_meet_in_the_lcm():
    total = CycNum.zeta(3) + CycNum.zeta(4)
    assert total.order == 12
    assert total == CycNum.zeta(12, 4) + CycNum.zeta(12, 3)
    assert common_order([CycNum.zeta(3), CycNum.rational(2), CycNum.zeta(4)]) == 12


def test_root_of_unity_reduces_the_fraction():
    assert root_of_unity("2/6") == CycNum.zeta(3)
    assert root_of_unity(Fraction(-1, 3)) == CycNum.zeta(3) ** 2
    assert root_of_unity(0) == ONE


def test_equal_values_hash_alike_across_lifts():
    a = CycNum.zeta(3) + 2
    b = a.lift(12)
    assert a == b
    assert hash(a) == hash(b)
    assert len({a, b, a.lift(6)}) == 1


def test_division_by_zero():
    with pytest.raises(DivisionByZeroError):
        ZERO.inverse()
    with pytest.raises(DivisionByZeroError):
        CycNum.zeta(5) / 0


def test_json_forms():
    assert CycNum.from_json("3/2", 4) == Fraction(3, 2)
    z = CycNum.zeta(4)
    assert CycNum.from_json(z.to_json(), 4) == z
    with pytest.raises(ParseError):
        CycNum.from_json(["1", "2", "3"], 4)
    with pytest.raises(ParseError):
        CycNum.from_json("one", 4)


def test_sqrt_minus_three():
    """(2 zeta_3 + 1)^2 = -3."""
    s = 2 * CycNum.zeta(3) + 1
    assert s * s == -3


@settings(max_examples=60, deadline=None)
@given(elements(12), elements(12), elements(12))
def test_ring_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == ZERO


@settings(max_examples=60, deadline=None)
@given(elements(8))
def test_inverses(a):
    if a.is_zero():
        return
    assert a * a.inverse() == ONE
    assert (a**-2) * a * a == ONE


FIELD_ORDERS = [n for n in range(1, 25) if cyclotomic_degree(n) <= 8]


@st.composite
def same_field_triples(draw):
    order = draw(st.sampled_from(FIELD_ORDERS))
    return tuple(draw(elements(order)) for _ in range(3))


@pytest.mark.slow
@settings(max_examples=200, deadline=None)
@given(same_field_triples())
def test_field_identities_across_orders(triple):
    """Five exact identities per draw, a thousand in total, for N up to 24."""
    a, b, c = triple
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a + b - b == a
    assert a * b == b * a
    if not b.is_zero():
        assert (a / b) * b == a
