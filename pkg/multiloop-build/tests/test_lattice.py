"""
Tests for integer lattices, unimodular enumeration and dense linear algebra.
"""

from fractions import Fraction

import pytest

from app.core.exceptions import NotUnimodularError
from app.services import lattice
from app.services.cycfield import ONE, ZERO, CycNum
from app.services.linalg import (
    IncrementalBasis,
    SparseEliminator,
    determinant,
    identity_matrix,
    inverse,
    mat_mul,
    nullspace,
    rank,
    solve,
)


def c(x):
    return CycNum.rational(x)


def test_lattice_index_and_rank():
    assert lattice.lattice_index([(2, 0), (0, 3)], 2) == 6
    assert lattice.lattice_index([(1, 1), (1, -1)], 2) == 2
    assert lattice.lattice_index([(1, 1), (2, 2)], 2) is None
    assert lattice.lattice_rank([(1, 1), (2, 2)], 2) == 1
    assert lattice.invariant_factors([(2, 0), (0, 4), (2, 2)], 2) == [2, 2]


def test_membership():
    basis = lattice.lattice_basis([(2, 0), (0, 3)], 2)
    assert lattice.contains(basis, (4, -3))
    assert not lattice.contains(basis, (1, 0))
    assert lattice.same_lattice(basis, [(2, 3), (0, 3)], 2)


def test_unimodular_enumeration_starts_at_identity():
    for n in (1, 2, 3):
        candidates = lattice.unimodular_matrices(n, 1)
        assert candidates[0] == lattice.identity(n)
        assert all(lattice.is_unimodular(p) for p in candidates)
    assert sorted(lattice.unimodular_matrices(1, 3)) == [((-1,),), ((1,),)]


def test_rank_two_enumeration_contains_the_shears():
    candidates = lattice.unimodular_matrices(2, 1)
    assert ((1, 0), (1, 1)) in candidates
    assert ((0, 1), (1, 0)) in candidates
    assert len(candidates) == len(set(candidates))


def test_require_unimodular():
    assert lattice.require_unimodular([[1, 2], [0, 1]]) == ((1, 2), (0, 1))
    with pytest.raises(NotUnimodularError):
        lattice.require_unimodular([[2, 0], [0, 1]])
    with pytest.raises(NotUnimodularError):
        lattice.require_unimodular([[Fraction(1, 2), 0], [0, 2]])


def test_integer_inverse():
    p = ((2, 1), (1, 1))
    assert lattice.mat_mul(p, lattice.int_inverse(p)) == lattice.diagonal([1, 1])


def test_boxes():
    assert len(list(lattice.box(1, 2))) == 9
    assert list(lattice.fundamental_box((2, 3)))[-1] == (1, 2)
    assert lattice.reduce_mod((-1, 7), (2, 3)) == (1, 1)


def test_dense_linear_algebra_over_cyclotomics():
    z = CycNum.zeta(3)
    a = [[ONE, z], [z, ONE]]
    assert determinant(a) == ONE - z * z
    assert mat_mul(a, inverse(a)) == identity_matrix(2)
    x = solve(a, [ONE, ZERO])
    assert x is not None
    assert a[0][0] * x[0] + a[0][1] * x[1] == ONE
    singular = [[c(1), c(2)], [c(2), c(4)]]
    assert rank(singular) == 1
    (kernel,) = nullspace(singular, 2)
    assert kernel[0] + 2 * kernel[1] == ZERO


def test_incremental_basis():
    basis = IncrementalBasis(3)
    assert basis.add([c(1), c(0), c(1)])
    assert basis.add([c(0), c(1), c(0)])
    assert not basis.add([c(2), c(3), c(2)])
    assert basis.contains([c(1), c(1), c(1)])
    assert len(basis) == 2


def test_sparse_eliminator():
    system = SparseEliminator()
    system.add({0: c(1), 1: c(-1)})
    system.add({1: c(1), 2: c(-1)})
    assert not system.add({0: c(1), 2: c(-1)})
    assert system.rank == 2
    assert system.solution_dimension(3) == 1
