"""
Tests for finite-dimensional Lie algebras: Chevalley bases, the Killing
form, simplicity and the centroid.
"""

import pytest

from app.core.exceptions import DimensionMismatchError, UnsupportedError
from app.services.cycfield import CycNum
from app.services.liecore import (
    LieAlgebra,
    abelian,
    centralizer,
    centroid_dimension,
    chevalley,
    direct_sum,
    generating_set,
    ideal_closure,
    is_simple,
    subalgebra,
    subalgebra_closure,
)
from app.services.linalg import determinant, unit_vector, vec_scale

DIMENSIONS = {("A", 1): 3, ("A", 2): 8, ("A", 3): 15, ("B", 2): 10, ("C", 2): 10, ("G", 2): 14}

CARTAN = {
    ("A", 2): ((2, -1), (-1, 2)),
    ("B", 2): ((2, -2), (-1, 2)),
    ("G", 2): ((2, -3), (-1, 2)),
}


@pytest.mark.parametrize("cartan_type,rank", sorted(DIMENSIONS))
def test_chevalley_dimensions_and_jacobi(cartan_type, rank):
    g = chevalley(cartan_type, rank)
    assert g.dim == DIMENSIONS[(cartan_type, rank)]
    assert g.jacobi_violation() is None
    assert not determinant(g.killing_form()).is_zero()


@pytest.mark.parametrize("cartan_type,rank", sorted(CARTAN))
def test_cartan_matrices_up_to_transpose(cartan_type, rank):
    a = chevalley(cartan_type, rank).chevalley.cartan_matrix
    expected = CARTAN[(cartan_type, rank)]
    assert a == expected or a == tuple(zip(*expected))


def test_sl2_relations():
    """Basis (e, h, f) with [e, f] = h, [h, e] = 2e, [h, f] = -2f."""
    g = chevalley("A", 1)
    e, h, f = (unit_vector(3, i) for i in range(3))
    two = CycNum.rational(2)
    assert g.bracket(e, f) == h
    assert g.bracket(h, e) == vec_scale(two, e)
    assert g.bracket(h, f) == vec_scale(-two, f)
    assert g.labels == ["e", "h", "f"]


def test_unsupported_type():
    with pytest.raises(UnsupportedError):
        chevalley("E", 8)


def test_simplicity():
    sl2 = chevalley("A", 1)
    assert is_simple(sl2)
    assert is_simple(chevalley("G", 2))
    assert not is_simple(direct_sum(sl2, sl2))
    assert not is_simple(abelian(1))


def test_centroid():
    sl2 = chevalley("A", 1)
    assert centroid_dimension(sl2) == 1
    assert centroid_dimension(direct_sum(sl2, sl2)) == 2


def test_generators_close_up():
    g = chevalley("A", 2)
    assert len(subalgebra_closure(g, generating_set(g))) == g.dim
    e1 = unit_vector(g.dim, g.chevalley.e[0])
    assert len(ideal_closure(g, [e1])) == g.dim


def test_from_triples_is_skew():
    one = CycNum.rational(1)
    # the Heisenberg algebra [x, y] = z
    heis = LieAlgebra.from_triples(3, [(0, 1, 2, one)], ["x", "y", "z"])
    x, y, z = (unit_vector(3, i) for i in range(3))
    assert heis.bracket(x, y) == z
    assert heis.bracket(y, x) == vec_scale(-one, z)
    assert heis.jacobi_violation() is None
    assert not is_simple(heis)


def test_bad_labels():
    with pytest.raises(DimensionMismatchError):
        LieAlgebra(2, {}, ["only-one"])


def test_centralizer_of_the_torus():
    g = chevalley("A", 2)
    torus = [unit_vector(g.dim, i) for i in g.chevalley.h]
    assert len(centralizer(g, torus)) == 2
    assert len(centralizer(g, [])) == g.dim


def test_subalgebra_structure():
    g = chevalley("A", 2)
    c = g.chevalley
    triple = [unit_vector(g.dim, c.e[0]), unit_vector(g.dim, c.h[0]), unit_vector(g.dim, c.f[0])]
    sl2 = subalgebra(g, triple)
    assert sl2.dim == 3
    assert is_simple(sl2)
    with pytest.raises(DimensionMismatchError):
        subalgebra(g, [unit_vector(g.dim, c.e[0]), unit_vector(g.dim, c.e[1])])
