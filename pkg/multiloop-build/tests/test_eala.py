"""
Tests for the EALA construction E(L, D, tau): frames, the bracket and form,
the axiom checks, uniqueness of the form and the equivalence probe.
"""

import pytest

from app.core.exceptions import (
    CertificateRequiredError,
    CocycleInvalidError,
    EvNotInjectiveError,
    FrameMismatchError,
    ZeroFixedAlgebraError,
)
from app.models.schemas import TauEntry
from app.services.cycfield import ONE, CycNum
from app.services.eala import (
    DegreeDerivation,
    EalaElement,
    build_frame,
    eala_bracket,
    eala_equivalence_probe,
    eala_form,
    form_uniqueness,
    invariance_residual,
    scder_bracket,
    verify_axioms,
)
from app.services.linalg import unit_vector
from app.services.multiloop import loop_form
from app.services.supportiso import IsoCertificate
from tests.conftest import load_algebra

E, H, F = (unit_vector(3, i) for i in range(3))
AXIOMS = {"EA1", "EA2", "EA3", "EA4", "EA5", "EA6", "jacobi"}


def c(x):
    return CycNum.rational(x)


@pytest.fixture(scope="module")
def sl2_frame(untwisted_sl2):
    return build_frame(untwisted_sl2)


@pytest.fixture(scope="module")
def sl2_n2():
    return load_algebra("untwisted_sl2_n2.json")


def test_degree_derivations():
    d = DegreeDerivation((0, 1), (c(1), c(0)))
    assert d.in_scder()
    assert not DegreeDerivation((1, 0), (c(1), c(0))).in_scder()
    # [t^(0,1) d_1, t^(1,0) d_2] = t^(1,1) (d_2 - d_1)
    bracket = scder_bracket(d, DegreeDerivation((1, 0), (c(0), c(1))))
    assert bracket == DegreeDerivation((1, 1), (c(-1), c(1)))
    assert scder_bracket(d, d) is None


def test_degree_zero_frame(sl2_frame):
    described = sl2_frame.describe()
    assert described["dim_H"] == 3
    assert described["ev_injective"]
    assert described["tau_entries"] == 0
    assert sl2_frame.C_basis == [((0,), 0)]


def test_bracket_of_loop_elements(sl2_frame):
    """[e t, f t^-1] = h + (e t | f t^-1) c with c dual to d."""
    a = EalaElement.loop(E, (1,))
    b = EalaElement.loop(F, (-1,))
    expected = EalaElement.loop(H, (0,)) + EalaElement.central((0,), [c(4)])
    assert eala_bracket(sl2_frame, a, b, check=True) == expected


def test_derivation_measures_degree(sl2_frame):
    d = EalaElement.derivation((0,), (ONE,))
    x = EalaElement.loop(E, (2,))
    assert eala_bracket(sl2_frame, d, x) == x.scale(c(2))
    assert eala_bracket(sl2_frame, x, d) == x.scale(c(-2))


def test_form_pairs_c_with_d(sl2_frame):
    d = EalaElement.derivation((0,), (ONE,))
    dual = sl2_frame.dual((0,), 0)
    assert eala_form(sl2_frame, d, dual) == 1
    assert eala_form(sl2_frame, dual, d) == 1
    assert eala_form(sl2_frame, dual, dual).is_zero()
    assert eala_form(sl2_frame, EalaElement.loop(E, (1,)), EalaElement.loop(F, (-1,))) == 4


def test_form_is_invariant_on_mixed_elements(sl2_frame):
    a = EalaElement.loop(E, (1,)) + EalaElement.derivation((0,), (ONE,))
    b = EalaElement.loop(H, (0,)) + sl2_frame.dual((0,), 0)
    x = EalaElement.loop(F, (-1,))
    lhs = eala_form(sl2_frame, eala_bracket(sl2_frame, a, b), x)
    rhs = eala_form(sl2_frame, a, eala_bracket(sl2_frame, b, x))
    assert lhs == rhs


def test_validation_rejects_foreign_pieces(sl2_frame):
    with pytest.raises(FrameMismatchError):
        eala_bracket(sl2_frame, EalaElement.derivation((1,), (ONE,)), EalaElement.loop(E, (0,)), check=True)
    with pytest.raises(FrameMismatchError):
        sl2_frame.validate(EalaElement.loop(E, (0, 0)))


@pytest.mark.slow
def test_axioms_for_the_affine_algebra(sl2_frame):
    report = verify_axioms(sl2_frame, window=1, samples=25, seed=0)
    assert set(report.checks) == AXIOMS
    assert report.passed, {k: v.detail for k, v in report.checks.items() if not v.passed}


@pytest.mark.slow
def test_axioms_on_the_default_window(sl2_frame):
    report = verify_axioms(sl2_frame)
    assert report.window == 3
    assert report.passed


@pytest.mark.slow
def test_axioms_with_skew_centroidal_derivations(sl2_n2):
    frame = build_frame(sl2_n2, "scder_window:1")
    assert frame.describe()["dim_H"] == 5
    report = verify_axioms(frame, window=1, samples=10, seed=1)
    assert report.passed, {k: v.detail for k, v in report.checks.items() if not v.passed}


def test_form_is_unique_up_to_scalar(untwisted_sl2, sl2_torus3):
    assert form_uniqueness(untwisted_sl2, window=1) == 1
    assert form_uniqueness(sl2_torus3, window=1) == 1


@pytest.mark.slow
@pytest.mark.parametrize(
    "name", ["untwisted_sl2.json", "sl2_involution.json", "sl2_torus3.json", "sl3_diagram.json"]
)
def test_form_is_unique_on_the_default_window(name):
    assert form_uniqueness(load_algebra(name)) == 1


def test_degree_zero_diagonal_is_not_forced_to_vanish(untwisted_sl2):
    """The Killing form has kappa(h, h) = 8 on the degree-zero block."""
    assert form_uniqueness(untwisted_sl2, window=0) == 1


def test_loop_form_passes_the_invariance_residual(sl2_torus3):
    assert invariance_residual(sl2_torus3, lambda a, b: loop_form(sl2_torus3, a, b), window=1) is None


def test_degenerate_pairing_fails_the_invariance_residual(untwisted_sl2):
    def lopsided(a, b):
        # only pairs starting in degree zero
        if any(any(d) for d in a.terms):
            return CycNum.rational(0)
        return loop_form(untwisted_sl2, a, b)

    assert invariance_residual(untwisted_sl2, lopsided, window=1) is not None


def test_ev_must_be_injective(sl2_n2):
    with pytest.raises(EvNotInjectiveError):
        build_frame(sl2_n2, [{"mu": [0, 0], "theta": ["1", "0"]}])


def test_explicit_derivations_must_be_skew(sl2_n2):
    with pytest.raises(FrameMismatchError):
        build_frame(
            sl2_n2,
            [
                {"mu": [0, 0], "theta": ["1", "0"]},
                {"mu": [0, 0], "theta": ["0", "1"]},
                {"mu": [1, 0], "theta": ["1", "0"]},
            ],
        )


def test_unknown_d_spec(untwisted_sl2):
    with pytest.raises(FrameMismatchError):
        build_frame(untwisted_sl2, "everything")


def test_cocycle_table_must_be_skew(untwisted_sl2):
    with pytest.raises(CocycleInvalidError):
        build_frame(untwisted_sl2, "degree0", [TauEntry(i=0, j=0, k=0, value="1")])


def test_cocycle_must_vanish_on_degree_zero(sl2_n2):
    frame = build_frame(sl2_n2, "scder_window:1")
    zero = frame.index_of((0, 0), 0)
    mu = frame.index_of((1, 0))
    minus = frame.index_of((-1, 0))
    with pytest.raises(CocycleInvalidError):
        build_frame(sl2_n2, "scder_window:1", [TauEntry(i=zero, j=mu, k=minus, value="1")])


def test_zero_fixed_algebra_has_no_frame(zero_fixed):
    with pytest.raises(ZeroFixedAlgebraError):
        build_frame(zero_fixed)


def test_probe_needs_a_certificate(sl2_torus3):
    inverse = load_algebra("pairs/sl2_torus3_inverse.json")
    with pytest.raises(CertificateRequiredError):
        eala_equivalence_probe(sl2_torus3, inverse, None)
    with pytest.raises(CertificateRequiredError):
        eala_equivalence_probe(sl2_torus3, inverse, IsoCertificate(s={}, P=((1,),)))


@pytest.mark.slow
def test_probe_along_the_negation(sl2_torus3):
    inverse = load_algebra("pairs/sl2_torus3_inverse.json")
    report = eala_equivalence_probe(sl2_torus3, inverse, IsoCertificate(s={}, P=((-1,),)), window=1)
    assert report.passed, [ch for ch in report.checks if not ch.passed]
    assert report.scalar is not None
