"""
Tests for automorphisms: validation, the named families, tuples and the
GL_n(Z) action.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.exceptions import (
    GradeViolationError,
    NotBracketPreservingError,
    NotCommutingError,
    NotInvertibleError,
    UnsupportedError,
)
from app.services import lattice
from app.services.autos import (
    AutTuple,
    chevalley_involution,
    check_automorphism,
    diagram,
    from_named,
    gl_action,
    group_order,
    identity,
    relation_set,
    tau_twist,
    torus,
)
from app.services.cycfield import CycNum
from app.services.liecore import chevalley
from app.services.linalg import identity_matrix, mat_equal, mat_scale, mat_vec, vec_scale


def rational_matrix(rows):
    return [tuple(CycNum.rational(x) for x in row) for row in rows]


@pytest.fixture(scope="module")
def sl2():
    return chevalley("A", 1)


@pytest.fixture(scope="module")
def sl3():
    return chevalley("A", 2)


def test_chevalley_involution_matches_explicit_matrix(sl2):
    omega = chevalley_involution(sl2)
    assert omega.order == 2
    explicit = check_automorphism(sl2, rational_matrix([[0, 0, -1], [0, -1, 0], [-1, 0, 0]]), "explicit")
    assert omega == explicit


def test_torus_orders(sl2, sl3):
    assert torus(sl2, ["1/3"]).order == 3
    assert torus(sl2, ["1/2"]).order == 2
    assert torus(sl3, ["1/3", "1/3"]).order == 3
    assert torus(sl3, ["0", "0"]).is_identity()


def test_diagram_automorphisms(sl3):
    pi = diagram(sl3, [2, 1])
    assert pi.order == 2
    assert from_named(sl3, "diagram", [2, 1]) == pi
    with pytest.raises(UnsupportedError):
        diagram(sl3, [1, 1])
    with pytest.raises(UnsupportedError):
        diagram(chevalley("B", 2), [2, 1])


def test_unknown_named_automorphism(sl2):
    with pytest.raises(UnsupportedError):
        from_named(sl2, "frobenius")


def test_validation_rejects_non_automorphisms(sl2):
    doubled = mat_scale(CycNum.rational(2), identity_matrix(3))
    with pytest.raises(NotBracketPreservingError):
        check_automorphism(sl2, doubled)
    with pytest.raises(NotInvertibleError):
        check_automorphism(sl2, rational_matrix([[0] * 3] * 3))


def test_tuples_must_commute(sl2):
    omega = chevalley_involution(sl2)
    with pytest.raises(NotCommutingError):
        AutTuple([omega, torus(sl2, ["1/4"])])
    assert AutTuple([omega, torus(sl2, ["1/2"])]).orders == (2, 2)


def test_m_must_be_a_multiple_of_the_order(sl2):
    omega = chevalley_involution(sl2)
    assert AutTuple([omega], [4]).m == (4,)
    with pytest.raises(GradeViolationError):
        AutTuple([omega], [3])


def test_gl_action_is_a_right_action(sl3):
    sigma = AutTuple([diagram(sl3, [2, 1]), torus(sl3, ["1/3", "1/3"])])
    p = ((1, 1), (0, 1))
    q = ((1, 0), (1, 1))
    pq = lattice.as_int_matrix(lattice.mat_mul(p, q))
    left = gl_action(gl_action(sigma, p), q)
    right = gl_action(sigma, pq)
    assert all(mat_equal(a.matrix, b.matrix) for a, b in zip(left, right))
    assert gl_action(sigma, lattice.identity(2)).orders == sigma.orders


def test_group_order_and_relations(sl2):
    omega = chevalley_involution(sl2)
    sigma = AutTuple([omega, omega])
    assert group_order(sigma) == 2
    orders, kernel = relation_set(sigma)
    assert orders == (2, 2)
    assert kernel == {(0, 0), (1, 1)}
    assert group_order(AutTuple([identity(sl2)])) == 1


def test_inverse_and_power(sl3):
    t = torus(sl3, ["1/3", "0"])
    assert t.compose(t.inverse()).is_identity()
    assert t.power(3).is_identity()
    assert t.power(2) == t.inverse()


SMALL_GL2 = lattice.unimodular_matrices(2, 1)


@settings(max_examples=25, deadline=None)
@given(p=st.sampled_from(SMALL_GL2), q=st.sampled_from(SMALL_GL2))
def test_gl_action_composes_on_the_right(p, q):
    g = chevalley("A", 1)
    sigma = AutTuple([chevalley_involution(g), torus(g, ["1/2"])])
    left = gl_action(gl_action(sigma, p), q)
    right = gl_action(sigma, lattice.as_int_matrix(lattice.mat_mul(p, q)))
    assert all(mat_equal(a.matrix, b.matrix) for a, b in zip(left, right))


def test_tau_twist_negates_the_root_spaces(untwisted_sl2):
    rd = untwisted_sl2.rootdatum
    (tau,) = tau_twist(untwisted_sl2.base, rd, {0: [1]}, m=[2])
    assert tau.order == 2
    minus = CycNum.rational(-1)
    for alpha in rd.roots:
        for x in rd.root_spaces[alpha]:
            assert mat_vec(tau.matrix, x) == vec_scale(minus, x)
    for h in rd.zero_space:
        assert mat_vec(tau.matrix, h) == tuple(h)
