"""
Tests for multiloop algebras: eigenspace gradings, loop brackets, the loop
form, supports, the central grading group and isograded realizations.
"""

import pytest

from app.core.exceptions import CertificateInvalidError, GradeViolationError
from app.services.autos import AutTuple, chevalley_involution
from app.services.cycfield import CycNum
from app.services.liecore import chevalley
from app.services.linalg import identity_matrix, unit_vector, vec_add, vec_sub
from app.services.multiloop import (
    LoopElement,
    MultiloopLieAlgebra,
    admissible,
    admissible_matrix,
    central_grading_group,
    compare_on_window,
    eigengrade,
    loop_bracket,
    loop_form,
    normalize_to_orders,
    realization_iso,
    root_support,
    support_group,
    zn_support,
)
from app.services.supportiso import apply_regrade
from tests.conftest import load_algebra

E, H, F = (unit_vector(3, i) for i in range(3))


def test_untwisted_grading(untwisted_sl2):
    assert untwisted_sl2.m == (1,)
    assert untwisted_sl2.dimensions() == {(0,): 3}
    assert support_group(untwisted_sl2) == [(1,)]
    assert len(zn_support(untwisted_sl2, 2)) == 5


def test_involution_grading(sl2_involution):
    """omega fixes e - f and negates h and e + f."""
    L = sl2_involution
    assert L.dimensions() == {(0,): 1, (1,): 2}
    assert L.contains(vec_sub(E, F), (0,))
    assert L.contains(vec_add(E, F), (3,))
    assert L.contains(H, (-1,))
    assert not L.contains(E, (0,))
    assert support_group(L) == [(1,)]


@pytest.mark.parametrize(
    "name", ["sl2_torus3.json", "sl3_diagram.json", "sl3_diagram_torus.json", "b2_untwisted.json"]
)
def test_components_decompose_g(name):
    L = load_algebra(name)
    assert sum(L.dimensions().values()) == L.base.dim


def test_loop_bracket(untwisted_sl2):
    a = LoopElement.monomial(E, (1,))
    b = LoopElement.monomial(F, (-1,))
    assert loop_bracket(untwisted_sl2, a, b) == LoopElement.monomial(H, (0,))
    assert loop_bracket(untwisted_sl2, a, a).is_zero()


def test_loop_bracket_checks_the_grading(sl2_involution):
    with pytest.raises(GradeViolationError):
        loop_bracket(sl2_involution, LoopElement.monomial(E, (0,)), LoopElement.monomial(H, (1,)))


def test_loop_form(untwisted_sl2):
    """(e t | f t^-1) = kappa(e, f) = 4; mismatched degrees pair to zero."""
    a = LoopElement.monomial(E, (1,))
    assert loop_form(untwisted_sl2, a, LoopElement.monomial(F, (-1,))) == 4
    assert loop_form(untwisted_sl2, a, LoopElement.monomial(F, (-2,))).is_zero()
    h = LoopElement.monomial(H, (0,))
    assert loop_form(untwisted_sl2, h, h) == 8


def test_loop_form_is_invariant(sl2_involution):
    L = sl2_involution
    x = LoopElement.monomial(vec_add(E, F), (1,))
    y = LoopElement.monomial(H, (1,))
    z = LoopElement.monomial(vec_sub(E, F), (-2,))
    assert loop_form(L, loop_bracket(L, x, y), z) == loop_form(L, x, loop_bracket(L, y, z))


def test_central_grading_group(sl2_involution, sl3_diagram_torus):
    generators, dims = central_grading_group(sl2_involution, verify=True)
    assert generators == [(2,)]
    assert dims == {(0,): 1, (1,): 0}
    generators, dims = central_grading_group(sl3_diagram_torus, verify=True)
    assert generators == [(2, 0), (0, 3)]
    assert dims[(0, 0)] == 1
    assert all(d == 0 for mu, d in dims.items() if mu != (0, 0))


@pytest.mark.parametrize(
    "name",
    [
        "untwisted_sl2.json",
        "untwisted_sl2_n2.json",
        "sl2_involution.json",
        "sl2_torus3.json",
        "sl3_diagram.json",
        "sl3_diagram_torus.json",
    ],
)
def test_central_grading_group_matches_the_centroid(name):
    L = load_algebra(name)
    generators, dims = central_grading_group(L, verify=True)
    n = len(L.m)
    assert generators == [tuple(L.m[i] if i == j else 0 for j in range(n)) for i in range(n)]
    zero = (0,) * n
    assert dims[zero] == 1
    assert all(d == 0 for mu, d in dims.items() if mu != zero)


def test_admissibility():
    swap = ((0, 1), (1, 0))
    assert admissible(swap, (3, 2), (2, 3))
    assert not admissible(((1, 0), (0, 1)), (3, 2), (2, 3))
    assert admissible_matrix(swap, (3, 2), (2, 3)) == ((0, 1), (1, 0))


def test_realization_of_a_swapped_tuple(sl3_diagram_torus):
    swapped = load_algebra("pairs/sl3_torus_diagram.json")
    phi = identity_matrix(8)
    realization = realization_iso(sl3_diagram_torus, swapped, phi, ((0, 1), (1, 0)), radius=1)
    assert realization.degree((1, 0)) == (0, 1)
    x = sl3_diagram_torus.component((1, 2))[0]
    image = realization.apply(LoopElement.monomial(x, (1, 2)))
    assert swapped.contains(image.terms[(2, 1)], (2, 1))


def test_realization_rejects_a_wrong_matrix(sl3_diagram_torus):
    swapped = load_algebra("pairs/sl3_torus_diagram.json")
    with pytest.raises(CertificateInvalidError):
        realization_iso(sl3_diagram_torus, swapped, identity_matrix(8), ((1, 0), (0, 1)))


def test_scaling_a_monomial():
    two = CycNum.rational(2)
    a = LoopElement.monomial(E, (1,)).scale(two)
    assert a == LoopElement.monomial(tuple(two * x for x in E), (1,))


def test_eigengrade_of_a_pair():
    g = chevalley("A", 1)
    grading = eigengrade(AutTuple([chevalley_involution(g)]))
    assert {k: len(v) for k, v in grading.items()} == {(0,): 1, (1,): 2}


def test_normalizing_an_oversized_period():
    """m = 4 for an involution only uses the even degrees."""
    g = chevalley("A", 1)
    L = MultiloopLieAlgebra(AutTuple([chevalley_involution(g)], [4]))
    assert L.dimensions() == {(0,): 1, (1,): 0, (2,): 2, (3,): 0}
    target, regrade = normalize_to_orders(L)
    assert target.m == (2,)
    assert compare_on_window(apply_regrade(L, regrade), target, 2) is None


def test_root_support(untwisted_sl2, sl2_involution):
    """Untwisted: every root at every degree; twisted: root spaces alternate with the degree parity."""
    assert len(root_support(untwisted_sl2, 1)) == 9
    support = root_support(sl2_involution, 1)
    assert all(len(alpha) == 1 for alpha, _ in support)
    assert ((0,), (0,)) in support
    assert ((0,), (1,)) not in support
