"""
Tests for eigenvalues of finite-order matrices over cyclotomic fields.
"""

from app.services.cycfield import ONE, ZERO, CycNum
from app.services.spectra import eigenspaces, eigenvalues
from tests.conftest import load_algebra


def _diagonal(*values):
    n = len(values)
    return [[values[i] if i == j else ZERO for j in range(n)] for i in range(n)]


def _as_set(pairs):
    return {(value, mult) for value, mult in pairs}


def test_minus_one_stored_at_order_two():
    minus_one = CycNum.zeta(2, 1)
    assert minus_one.order == 2
    found = eigenvalues(_diagonal(minus_one, ONE))
    assert _as_set(found) == {(CycNum.rational(-1), 1), (ONE, 1)}


def test_rational_entries_at_a_larger_order():
    # zeta_4^2 = -1 is rational but carries order 4
    found = eigenvalues(_diagonal(CycNum.zeta(4, 2), CycNum.zeta(4, 2), ONE))
    assert _as_set(found) == {(CycNum.rational(-1), 2), (ONE, 1)}


def test_entries_finer_than_the_base_order():
    # base order 2 from the grading periods; t^2 - (1 + i) t + i needs order 4
    found = eigenvalues(_diagonal(CycNum.zeta(4), ONE), base_order=2)
    assert _as_set(found) == {(CycNum.zeta(4), 1), (ONE, 1)}


def test_eigenspaces_of_a_permutation():
    swap = [[ZERO, ONE], [ONE, ZERO]]
    spaces = dict((value, basis) for value, basis in eigenspaces(swap))
    assert len(spaces[ONE]) == 1
    assert len(spaces[CycNum.rational(-1)]) == 1


def test_involution_spec_builds():
    L = load_algebra("sl2_involution.json")
    assert L.dimensions() == {(0,): 1, (1,): 2}
