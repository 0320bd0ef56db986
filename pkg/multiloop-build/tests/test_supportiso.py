"""
Tests for support-isomorphism certificates: verification, chains,
inversion, the induced map on loop elements and the bounded search.
"""

from fractions import Fraction

import pytest

from app.api.commands import load_certificate
from app.core.exceptions import CertificateInvalidError, DomainMismatchError, NotMonomorphismError
from app.services import lattice
from app.services.multiloop import LoopElement, Regrade, loop_bracket
from app.services.supportiso import (
    IsoCertificate,
    apply_regrade,
    chain_from_certificate,
    check_regrade_support,
    invert_certificate,
    search_certificate,
    support_map,
    verify_supp_certificate,
    verify_zn_certificate,
)
from app.services.torus import toralize
from tests.conftest import corpus_path, load_algebra

SWAP = IsoCertificate(s={}, P=((0, 1), (1, 0)))
NEGATE = IsoCertificate(s={}, P=((-1,),))


@pytest.fixture(scope="module")
def swapped():
    return load_algebra("pairs/sl3_torus_diagram.json")


@pytest.fixture(scope="module")
def sl2_torus3_inverse():
    return load_algebra("pairs/sl2_torus3_inverse.json")


def test_certificate_files_parse():
    _, cert = load_certificate(corpus_path("pairs/swap_certificate.json"), 3)
    assert cert.P == SWAP.P
    assert cert.phi is None
    assert cert.s_is_zero()
    assert cert.to_file().P == [[0, 1], [1, 0]]


def test_swap_certificate(sl3_diagram_torus, swapped):
    assert verify_supp_certificate(sl3_diagram_torus, swapped, SWAP).passed
    chain = chain_from_certificate(SWAP, sl3_diagram_torus, swapped)
    assert [step.name for step in chain.steps] == ["rho2"]
    assert chain.verify(2).passed


def test_zn_certificate_for_the_swap(sl3_diagram_torus, swapped):
    assert verify_zn_certificate(sl3_diagram_torus, swapped, SWAP.P).passed
    assert not verify_zn_certificate(sl3_diagram_torus, swapped, ((1, 0), (0, 1))).passed


def test_wrong_matrix_fails_with_a_witness(sl3_diagram_torus, swapped):
    result = verify_supp_certificate(sl3_diagram_torus, swapped, IsoCertificate(s={}, P=((1, 0), (0, 1))))
    assert not result.passed
    assert result.step == "conjugation"
    assert result.witness["index"] in (1, 2)
    with pytest.raises(CertificateInvalidError):
        chain_from_certificate(IsoCertificate(s={}, P=((1, 0), (0, 1))), sl3_diagram_torus, swapped)


def test_negating_the_grading(sl2_torus3, sl2_torus3_inverse):
    assert verify_supp_certificate(sl2_torus3, sl2_torus3_inverse, NEGATE).passed
    assert chain_from_certificate(NEGATE, sl2_torus3, sl2_torus3_inverse).verify(3).passed


def test_non_unimodular_matrix_is_rejected(sl2_torus3, sl2_torus3_inverse):
    result = verify_supp_certificate(sl2_torus3, sl2_torus3_inverse, IsoCertificate(s={}, P=((2,),)))
    assert not result.passed
    assert result.step == "unimodular"


def test_explicit_matrix_equals_the_named_involution(sl2_involution):
    explicit = load_algebra("pairs/sl2_involution_explicit.json")
    trivial = IsoCertificate(s={}, P=((1,),))
    assert verify_supp_certificate(sl2_involution, explicit, trivial).passed


def test_inversion_of_a_toralization_certificate(sl2_involution):
    toral = toralize(sl2_involution)
    back = invert_certificate(toral.certificate, sl2_involution, toral.result)
    assert back.P == lattice.int_inverse(toral.P)
    assert verify_supp_certificate(toral.result, sl2_involution, back).passed


def test_support_map_is_a_homomorphism(sl2_involution):
    toral = toralize(sl2_involution)
    L, T = sl2_involution, toral.result
    psi = support_map(toral.certificate, L, T)
    pieces = [
        LoopElement.monomial(x, degree)
        for degree in [(0,), (1,), (-1,), (2,)]
        for x in L.component(degree)
    ]
    for a in pieces:
        for b in pieces:
            image = psi.apply(loop_bracket(L, a, b))
            assert image == loop_bracket(T, psi.apply(a), psi.apply(b))


def test_support_map_moves_degrees_by_the_shift(sl2_involution):
    toral = toralize(sl2_involution)
    psi = support_map(toral.certificate, sl2_involution, toral.result)
    (alpha, lam), = toral.lambda_choices.items()
    # the chosen root class lands in degree zero
    assert psi.degree(lam, alpha) == (0,)


def test_search_finds_the_negation(sl2_torus3, sl2_torus3_inverse):
    cert = search_certificate(sl2_torus3, sl2_torus3_inverse, bound=2)
    assert cert is not None
    assert verify_supp_certificate(sl2_torus3, sl2_torus3_inverse, cert).passed


def test_search_finds_the_swap(sl3_diagram_torus, swapped):
    cert = search_certificate(sl3_diagram_torus, swapped, bound=1)
    assert cert is not None
    assert verify_supp_certificate(sl3_diagram_torus, swapped, cert).passed


def test_search_recovers_the_trivial_certificate(sl2_involution):
    explicit = load_algebra("pairs/sl2_involution_explicit.json")
    cert = search_certificate(sl2_involution, explicit, bound=1)
    assert cert is not None
    assert verify_supp_certificate(sl2_involution, explicit, cert).passed


def test_search_is_inconclusive_across_dimensions(sl2_torus3, sl3_diagram):
    assert search_certificate(sl2_torus3, sl3_diagram, bound=1) is None


def test_regrading_by_a_scaling(sl2_torus3):
    view = apply_regrade(sl2_torus3, Regrade.from_rho(lattice.diagonal([2])))
    assert view.component((2,)) == sl2_torus3.component((1,))
    assert not view.component((1,))
    assert check_regrade_support(view, 2).passed


def test_regrading_rejects_singular_and_fractional_maps(sl2_torus3, zero_fixed):
    with pytest.raises(NotMonomorphismError):
        apply_regrade(sl2_torus3, Regrade.from_rho(lattice.diagonal([0])))
    with pytest.raises(DomainMismatchError):
        apply_regrade(sl2_torus3, Regrade.from_rho(lattice.diagonal([Fraction(1, 2)])))
    with pytest.raises(DomainMismatchError):
        apply_regrade(zero_fixed, Regrade.shift({0: (1, 0)}))
