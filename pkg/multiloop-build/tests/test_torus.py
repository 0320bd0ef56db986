"""
Tests for the Lie torus conditions, the order-condition matrix search and
toralization.
"""

import pytest

from app.core.exceptions import SearchExhaustedError, ZeroFixedAlgebraError
from app.services import lattice
from app.services.autos import AutTuple, chevalley_involution, gl_action, group_order
from app.services.liecore import chevalley
from app.services.multiloop import MultiloopLieAlgebra
from app.services.supportiso import chain_from_certificate, verify_supp_certificate
from app.services.torus import check_torus, find_P_for_A3, toralize
from tests.conftest import load_algebra


def _product(values):
    out = 1
    for v in values:
        out *= v
    return out


@pytest.mark.parametrize("name", ["untwisted_sl2.json", "untwisted_sl2_n2.json", "b2_untwisted.json"])
def test_untwisted_algebras_are_tori(name):
    report = check_torus(load_algebra(name))
    assert report.is_torus


def test_torus_automorphism_of_order_three_fails_a1(sl2_torus3):
    """g^sigma = span{h} is abelian, so the grading is not yet toroidal."""
    report = check_torus(sl2_torus3)
    assert report.a0.passed
    assert not report.a1.passed
    assert not report.is_torus


def test_involution_fails_a1(sl2_involution):
    """g^sigma is one-dimensional, hence not simple."""
    report = check_torus(sl2_involution)
    assert report.a0.passed
    assert not report.a1.passed
    assert not report.is_torus


def test_oversized_m_fails_a0():
    g = chevalley("A", 1)
    L = MultiloopLieAlgebra(AutTuple([chevalley_involution(g)], [4]))
    report = check_torus(L)
    assert not report.a0.passed
    assert "m=[4]" in report.a0.detail


def test_a3_matrix_for_a_repeated_involution():
    g = chevalley("A", 1)
    omega = chevalley_involution(g)
    sigma = AutTuple([omega, omega])
    assert group_order(sigma) == 2
    p = find_P_for_A3(sigma, bound=2)
    assert lattice.is_unimodular(p)
    assert _product(gl_action(sigma, p).orders) == 2
    # the shear that turns (omega, omega) into (id, omega)
    assert _product(gl_action(sigma, ((1, 0), (1, 1))).orders) == 2


def test_a3_trivial_cases():
    g = chevalley("A", 1)
    omega = chevalley_involution(g)
    assert find_P_for_A3(AutTuple([omega])) == ((1,),)


def test_a3_search_can_be_exhausted():
    g = chevalley("A", 1)
    omega = chevalley_involution(g)
    sigma = AutTuple([omega, omega])
    with pytest.raises(SearchExhaustedError):
        find_P_for_A3(sigma, bound=0)


@pytest.mark.parametrize(
    "name",
    ["sl2_involution.json", "sl2_torus3.json", "sl3_diagram.json", "sl3_diagram_torus.json", "untwisted_sl2.json"],
)
def test_toralize_produces_a_certified_torus(name):
    L = load_algebra(name)
    cert = toralize(L)
    assert cert.report.is_torus
    assert verify_supp_certificate(L, cert.result, cert.certificate).passed
    assert chain_from_certificate(cert.certificate, L, cert.result).verify(2).passed


def test_toralize_the_involution_shifts_by_the_root_class(sl2_involution):
    cert = toralize(sl2_involution)
    ((alpha, lam),) = cert.lambda_choices.items()
    assert sl2_involution.root_component(alpha, lam)
    assert cert.result.m == cert.result.sigma.orders


def test_toralize_needs_a_fixed_point(zero_fixed):
    with pytest.raises(ZeroFixedAlgebraError):
        toralize(zero_fixed)
