"""
Tests for Cartan subalgebras of fixed-point algebras, root decompositions,
sl2-triples and inner reflections.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.services.autos import inner_reflection
from app.services.cycfield import CycNum
from app.services.liecore import chevalley
from app.services.linalg import identity_matrix, mat_vec, vec_scale
from app.services.roots import (
    cartan_subalgebra,
    classify,
    coroot_and_triple,
    fixed_subalgebra,
    indivisible_and_enlarged,
    reflect,
    root_decomposition,
    rootdatum_for,
    verify_root_system,
)
from app.services.torus import check_reflections, check_root_components
from tests.conftest import load_algebra

EXPECTED = [
    ("untwisted_sl2.json", "A1", 2),
    ("sl2_involution.json", "A1", 2),
    ("sl2_torus3.json", "A1", 2),
    ("sl3_diagram.json", "BC1", 4),
    ("sl3_diagram_torus.json", "BC1", 4),
    ("b2_untwisted.json", "B2", 8),
    ("g2_untwisted.json", "G2", 12),
]


@pytest.mark.parametrize("name,cartan_type,count", EXPECTED)
def test_root_systems_of_the_corpus(name, cartan_type, count):
    L = load_algebra(name)
    rd = L.rootdatum
    assert rd is not None
    report = verify_root_system(rd)
    assert report.passed, [c for c in report.checks if not c.passed]
    assert report.cartan_type == cartan_type
    assert len(rd.roots) == count


@pytest.mark.parametrize("name", ["sl2_involution.json", "sl3_diagram.json", "sl3_diagram_torus.json"])
def test_root_components_and_reflections(name):
    L = load_algebra(name)
    assert check_root_components(L).passed
    assert check_reflections(L).passed


def test_zero_fixed_algebra_has_no_root_grading(zero_fixed):
    assert zero_fixed.fixed == []
    assert zero_fixed.rootdatum is None
    assert not check_reflections(zero_fixed).passed


def test_inner_reflection_negates_the_coroot():
    g = chevalley("A", 2)
    rd = rootdatum_for(g, [])
    minus = CycNum.rational(-1)
    for alpha in rd.positive_roots:
        triple = coroot_and_triple(rd, alpha)
        theta = inner_reflection(g, triple)
        assert mat_vec(theta.matrix, triple.h_alpha) == vec_scale(minus, triple.h_alpha)


def test_reflections_permute_the_roots():
    rd = rootdatum_for(chevalley("G", 2), [])
    roots = set(rd.roots)
    for alpha in rd.roots:
        assert reflect(rd, alpha, alpha) == tuple(-x for x in alpha)
        assert {reflect(rd, alpha, beta) for beta in rd.roots} == roots


def test_bc1_indivisible_and_enlarged(sl3_diagram):
    rd = sl3_diagram.rootdatum
    assert classify(rd) == "BC1"
    indivisible, enlarged = indivisible_and_enlarged(rd)
    assert sorted(indivisible) == [(-1,), (1,)]
    assert sorted(enlarged) == sorted(rd.roots)


def test_type_a1_is_enlarged_like_b1(untwisted_sl2):
    rd = untwisted_sl2.rootdatum
    _, enlarged = indivisible_and_enlarged(rd)
    assert sorted(enlarged) == [(-2,), (-1,), (1,), (2,)]


def test_fixed_subalgebra_of_the_diagram_involution(sl3_diagram):
    """The diagram involution of sl3 fixes a copy of so3."""
    matrices = [a.matrix for a in sl3_diagram.sigma]
    assert len(fixed_subalgebra(sl3_diagram.base, matrices)) == 3


B2_ROOTS = rootdatum_for(chevalley("C", 2), []).roots


@settings(max_examples=40, deadline=None)
@given(alpha=st.sampled_from(B2_ROOTS), beta=st.sampled_from(B2_ROOTS))
def test_reflections_are_involutions(alpha, beta):
    rd = rootdatum_for(chevalley("C", 2), [])
    assert reflect(rd, alpha, reflect(rd, alpha, beta)) == beta


def test_cartan_subalgebra_and_decomposition_of_sl3():
    g = chevalley("A", 2)
    h = cartan_subalgebra(g, identity_matrix(g.dim))
    assert len(h) == 2
    rd = root_decomposition(g, h)
    assert rd.rank == 2
    assert len(rd.roots) == 6
    assert all(len(rd.root_spaces[a]) == 1 for a in rd.roots)
