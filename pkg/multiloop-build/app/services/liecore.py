"""
Finite-dimensional Lie algebras over cyclotomic numbers.

A ``LieAlgebra`` is a sparse structure-constant table. The split simple
algebras are generated from faithful matrix realizations: the simple root
vectors of sl_n, so_n (antidiagonal symmetric form), sp_2n (antidiagonal
skew form) and G2 (triality-fixed part of so_8) are bracketed breadth-first,
and every root vector remembers the bracket that produced it. Those
recorded paths fix the sign convention and let automorphisms defined on the
generators be extended to the whole basis.
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from app.core.exceptions import DimensionMismatchError, UnsupportedError
from app.services.cycfield import ONE, ZERO, CycNum
from app.services.linalg import (
    CoordinateSolver,
    IncrementalBasis,
    Matrix,
    Vector,
    determinant,
    dot,
    SparseEliminator,
    identity_matrix,
    mat_mul,
    mat_scale,
    mat_sub,
    mat_vec,
    nullspace,
    unit_vector,
    vec_add,
    vec_combine,
    vec_scale,
)

logger = logging.getLogger(__name__)

RootCoords = Tuple[int, ...]

SUPPORTED_TYPES = {("A", 1), ("A", 2), ("A", 3), ("B", 2), ("C", 2), ("D", 4), ("G", 2)}


# ---------------------------------------------------------------------------
# Structure constants
# ---------------------------------------------------------------------------


class LieAlgebra:
    """Lie algebra given by [e_i, e_j] = sum_k c[i][j][k] e_k."""

    def __init__(
        self,
        dim: int,
        structure: Mapping[Tuple[int, int], Mapping[int, CycNum]],
        labels: Optional[Sequence[str]] = None,
        name: str = "",
        chevalley: Optional["ChevalleyData"] = None,
    ):
        if dim < 1:
            raise DimensionMismatchError(f"dimension must be positive, got {dim}")
        self.dim = dim
        self.labels = list(labels) if labels is not None else [f"x{i}" for i in range(dim)]
        if len(self.labels) != dim:
            raise DimensionMismatchError(f"{len(self.labels)} labels for dimension {dim}")
        self.name = name or f"lie({dim})"
        self.chevalley = chevalley
        self._table: List[List[Dict[int, CycNum]]] = [[{} for _ in range(dim)] for _ in range(dim)]
        for (i, j), column in structure.items():
            if i == j:
                continue
            for k, c in column.items():
                if not c:
                    continue
                self._table[i][j][k] = c
                self._table[j][i][k] = -c
        self._ad: Dict[int, Matrix] = {}
        self._killing: Optional[Matrix] = None

    @classmethod
    def from_triples(
        cls,
        dim: int,
        triples: Iterable[Tuple[int, int, int, CycNum]],
        labels: Optional[Sequence[str]] = None,
        name: str = "",
    ) -> "LieAlgebra":
        structure: Dict[Tuple[int, int], Dict[int, CycNum]] = {}
        for i, j, k, c in triples:
            if i < j:
                structure.setdefault((i, j), {})[k] = c
            elif j < i:
                structure.setdefault((j, i), {})[k] = -c
        return cls(dim, structure, labels, name)

    def structure_triples(self) -> List[Tuple[int, int, int, CycNum]]:
        out = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k in sorted(self._table[i][j]):
                    out.append((i, j, k, self._table[i][j][k]))
        return out

    def structure_constant(self, i: int, j: int, k: int) -> CycNum:
        return self._table[i][j].get(k, ZERO)

    def basis_vector(self, i: int) -> Vector:
        return unit_vector(self.dim, i)

    def _check(self, x: Sequence[CycNum]) -> None:
        if len(x) != self.dim:
            raise DimensionMismatchError(f"vector of length {len(x)} in algebra of dim {self.dim}")

    def bracket_basis(self, i: int, j: int) -> Vector:
        out = [ZERO] * self.dim
        for k, c in self._table[i][j].items():
            out[k] = c
        return tuple(out)

    def bracket(self, x: Sequence[CycNum], y: Sequence[CycNum]) -> Vector:
        self._check(x)
        self._check(y)
        out = [ZERO] * self.dim
        ys = [(j, b) for j, b in enumerate(y) if b]
        for i, a in enumerate(x):
            if not a:
                continue
            row = self._table[i]
            for j, b in ys:
                column = row[j]
                if not column:
                    continue
                ab = a * b
                for k, c in column.items():
                    out[k] = out[k] + ab * c
        return tuple(out)

    def ad_basis(self, i: int) -> Matrix:
        cached = self._ad.get(i)
        if cached is None:
            rows = [[ZERO] * self.dim for _ in range(self.dim)]
            for j in range(self.dim):
                for k, c in self._table[i][j].items():
                    rows[k][j] = c
            cached = [tuple(r) for r in rows]
            self._ad[i] = cached
        return cached

    def ad(self, x: Sequence[CycNum]) -> Matrix:
        """Matrix of ad x: column j holds [x, e_j]."""
        self._check(x)
        rows = [[ZERO] * self.dim for _ in range(self.dim)]
        for i, a in enumerate(x):
            if not a:
                continue
            for j in range(self.dim):
                for k, c in self._table[i][j].items():
                    rows[k][j] = rows[k][j] + a * c
        return [tuple(r) for r in rows]

    def killing_form(self) -> Matrix:
        if self._killing is None:
            n = self.dim
            gram = [[ZERO] * n for _ in range(n)]
            for i in range(n):
                for j in range(i, n):
                    total = ZERO
                    for l in range(n):
                        for k, c in self._table[i][l].items():
                            d = self._table[j][k].get(l)
                            if d is not None:
                                total = total + c * d
                    gram[i][j] = total
                    gram[j][i] = total
            self._killing = [tuple(r) for r in gram]
        return self._killing

    def kappa(self, x: Sequence[CycNum], y: Sequence[CycNum]) -> CycNum:
        return dot(x, mat_vec(self.killing_form(), y))

    def jacobi_violation(self) -> Optional[Tuple[int, int, int]]:
        """First basis triple on which the Jacobi identity fails, if any."""
        n = self.dim
        for i in range(n):
            ei = self.basis_vector(i)
            for j in range(i + 1, n):
                ej = self.basis_vector(j)
                eij = self.bracket_basis(i, j)
                for k in range(j + 1, n):
                    ek = self.basis_vector(k)
                    total = self.bracket(eij, ek)
                    total = tuple(a + b for a, b in zip(total, self.bracket(self.bracket_basis(j, k), ei)))
                    total = tuple(a + b for a, b in zip(total, self.bracket(self.bracket_basis(k, i), ej)))
                    if any(total):
                        return (i, j, k)
        return None

    def __repr__(self) -> str:
        return f"LieAlgebra({self.name}, dim={self.dim})"


def bracket(g: LieAlgebra, x: Sequence[CycNum], y: Sequence[CycNum]) -> Vector:
    return g.bracket(x, y)


def killing_form(g: LieAlgebra) -> Matrix:
    return g.killing_form()


# ---------------------------------------------------------------------------
# Subspaces, closures and the centroid
# ---------------------------------------------------------------------------


def centralizer(g: LieAlgebra, elements: Sequence[Sequence[CycNum]]) -> List[Vector]:
    """Basis of {y in g : [s, y] = 0 for all s in elements}."""
    if not elements:
        return identity_matrix(g.dim)
    rows: List[Vector] = []
    for s in elements:
        rows.extend(g.ad(s))
    return nullspace(rows)


def subalgebra_closure(g: LieAlgebra, vectors: Sequence[Sequence[CycNum]]) -> List[Vector]:
    """Basis of the subalgebra generated by ``vectors``."""
    span = IncrementalBasis(g.dim)
    for v in vectors:
        span.add(v)
    done = 0
    while done < len(span.vectors):
        x = span.vectors[done]
        for y in span.vectors[: done + 1]:
            span.add(g.bracket(x, y))
        done += 1
    return list(span.vectors)


def generating_set(g: LieAlgebra) -> List[Vector]:
    """Small set of elements generating g as a Lie algebra."""
    if g.chevalley is not None:
        data = g.chevalley
        return [g.basis_vector(i) for i in data.e + data.f]
    gens: List[Vector] = []
    span = IncrementalBasis(g.dim)
    for i in range(g.dim):
        e = g.basis_vector(i)
        if span.contains(e):
            continue
        gens.append(e)
        span = IncrementalBasis(g.dim)
        for v in subalgebra_closure(g, gens):
            span.add(v)
        if len(span) == g.dim:
            break
    return gens


def ideal_closure(
    g: LieAlgebra,
    vectors: Sequence[Sequence[CycNum]],
    generators: Optional[Sequence[Vector]] = None,
) -> List[Vector]:
    """Smallest ad-invariant subspace containing ``vectors``."""
    gens = list(generators) if generators is not None else generating_set(g)
    span = IncrementalBasis(g.dim)
    for v in vectors:
        span.add(v)
    done = 0
    while done < len(span.vectors):
        x = span.vectors[done]
        for y in gens:
            span.add(g.bracket(y, x))
        done += 1
    return list(span.vectors)


def _cyclic_centroid_dimension(g: LieAlgebra, gens: Sequence[Vector], start: int) -> Optional[int]:
    """
    dim End_g(g) through a cyclic vector: a module endomorphism is fixed by
    the image w of e_start, the images of the spanning words are linear in w,
    and every recorded relation gives linear equations on w.
    """
    n = g.dim
    span = IncrementalBasis(n)
    words: List[Vector] = [g.basis_vector(start)]
    span.add(words[0])
    images: List[Matrix] = [identity_matrix(n)]
    ad_gens = [g.ad(y) for y in gens]
    relations: List[Tuple[int, int]] = []
    done = 0
    while done < len(words):
        for a, ad_y in enumerate(ad_gens):
            z = mat_vec(ad_y, words[done])
            if span.add(z):
                words.append(z)
                images.append(mat_mul(ad_y, images[done]))
            else:
                relations.append((a, done))
        done += 1
    if len(words) < n:
        return None
    solver = CoordinateSolver(words, n)
    equations = IncrementalBasis(n)
    for a, k in relations:
        if len(equations) == n - 1:
            break
        coords = solver.coordinates(mat_vec(ad_gens[a], words[k]), check=False)
        assert coords is not None
        lhs = mat_scale(ZERO, images[0])
        for c, image in zip(coords, images):
            if c:
                lhs = [vec_add(r1, vec_scale(c, r2)) for r1, r2 in zip(lhs, image)]
        for row in mat_sub(lhs, mat_mul(ad_gens[a], images[k])):
            equations.add(row)
    return n - len(equations)


def centroid_dimension(g: LieAlgebra) -> int:
    """Dimension of the centroid (linear maps commuting with every ad x)."""
    gens = generating_set(g)
    for start in range(g.dim):
        result = _cyclic_centroid_dimension(g, gens, start)
        if result is not None:
            return result
    # no cyclic basis vector: solve C ad(y) = ad(y) C directly
    n = g.dim
    system = SparseEliminator()
    for y in gens:
        ad_y = g.ad(y)
        for a in range(n):
            for b in range(n):
                equation: Dict[int, CycNum] = {}
                for k in range(n):
                    if ad_y[k][b]:
                        equation[a * n + k] = equation.get(a * n + k, ZERO) + ad_y[k][b]
                    if ad_y[a][k]:
                        equation[k * n + b] = equation.get(k * n + b, ZERO) - ad_y[a][k]
                system.add(equation)
    return system.solution_dimension(n * n)


def is_simple(g: LieAlgebra) -> bool:
    """Killing form nondegenerate and adjoint representation irreducible."""
    if determinant(g.killing_form()).is_zero():
        logger.debug(f"{g.name}: Killing form degenerate")
        return False
    gens = generating_set(g)
    for i in range(g.dim):
        if len(ideal_closure(g, [g.basis_vector(i)], gens)) < g.dim:
            logger.debug(f"{g.name}: basis vector {i} generates a proper ideal")
            return False
    return centroid_dimension(g) == 1


def subalgebra(g: LieAlgebra, basis: Sequence[Sequence[CycNum]], name: str = "") -> LieAlgebra:
    """The Lie algebra structure on a bracket-closed subspace, in coordinates of ``basis``."""
    basis = [tuple(b) for b in basis]
    if not basis:
        raise DimensionMismatchError("empty subspace has no Lie algebra structure")
    solver = CoordinateSolver(basis, g.dim)
    structure: Dict[Tuple[int, int], Dict[int, CycNum]] = {}
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            coords = solver.coordinates(g.bracket(basis[i], basis[j]))
            if coords is None:
                raise DimensionMismatchError(
                    "subspace is not closed under the bracket", witness={"pair": [i, j]}
                )
            structure[(i, j)] = {k: c for k, c in enumerate(coords) if c}
    return LieAlgebra(len(basis), structure, name=name or f"sub({g.name})")


def direct_sum(a: LieAlgebra, b: LieAlgebra) -> LieAlgebra:
    structure: Dict[Tuple[int, int], Dict[int, CycNum]] = {}
    for i, j, k, c in a.structure_triples():
        structure.setdefault((i, j), {})[k] = c
    for i, j, k, c in b.structure_triples():
        structure.setdefault((a.dim + i, a.dim + j), {})[a.dim + k] = c
    labels = [f"{x}'" for x in a.labels] + [f"{x}''" for x in b.labels]
    return LieAlgebra(a.dim + b.dim, structure, labels, name=f"{a.name}+{b.name}")


def abelian(dim: int) -> LieAlgebra:
    return LieAlgebra(dim, {}, name=f"abelian({dim})")


# ---------------------------------------------------------------------------
# Split simple algebras
# ---------------------------------------------------------------------------

SparseMatrix = Dict[Tuple[int, int], Fraction]


@dataclass(frozen=True)
class PathStep:
    """How a basis vector was produced: scale * [generator, parent]."""

    sign: int  # +1: bracket with E_i, -1: bracket with F_i
    generator: int
    parent: int
    scale: Fraction = Fraction(1)


@dataclass
class ChevalleyData:
    """Chevalley generators and bracket paths of a split simple algebra."""

    cartan_type: str
    rank: int
    cartan_matrix: Tuple[Tuple[int, ...], ...]
    e: Tuple[int, ...]
    f: Tuple[int, ...]
    h: Tuple[int, ...]
    roots: Dict[int, RootCoords]
    paths: Dict[int, PathStep] = field(default_factory=dict)

    def root_index(self, coords: RootCoords) -> int:
        for index, value in self.roots.items():
            if value == coords:
                return index
        raise KeyError(coords)


def _sp_mul(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    rows: Dict[int, List[Tuple[int, Fraction]]] = {}
    for (k, j), y in b.items():
        rows.setdefault(k, []).append((j, y))
    out: SparseMatrix = {}
    for (i, k), x in a.items():
        for j, y in rows.get(k, ()):
            out[(i, j)] = out.get((i, j), Fraction(0)) + x * y
    return {key: v for key, v in out.items() if v}


def _sp_add(a: SparseMatrix, b: SparseMatrix, scale: Fraction = Fraction(1)) -> SparseMatrix:
    out = dict(a)
    for key, v in b.items():
        out[key] = out.get(key, Fraction(0)) + scale * v
    return {key: v for key, v in out.items() if v}


def _sp_scale(a: SparseMatrix, scale: Fraction) -> SparseMatrix:
    return {key: scale * v for key, v in a.items()} if scale else {}


def _sp_commutator(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    return _sp_add(_sp_mul(a, b), _sp_mul(b, a), Fraction(-1))


def _sp_transpose(a: SparseMatrix) -> SparseMatrix:
    return {(j, i): v for (i, j), v in a.items()}


def _eigen_ratio(image: SparseMatrix, x: SparseMatrix) -> Fraction:
    """c with image = c * x (x nonzero, image known to be proportional)."""
    key = next(iter(sorted(x)))
    return image.get(key, Fraction(0)) / x[key]


def _form(kind: str, size: int) -> Optional[SparseMatrix]:
    if kind == "sl":
        return None
    half = size // 2
    form: SparseMatrix = {}
    for a in range(size):
        sign = 1 if kind == "so" or a < half else -1
        form[(a, size - 1 - a)] = Fraction(sign)
    return form


def _project(a: SparseMatrix, form: Optional[SparseMatrix]) -> SparseMatrix:
    """A - J^{-1} A^T J, the component of A in the algebra preserving J."""
    if form is None:
        return a
    inv = _sp_transpose(form)  # J is orthogonal
    return _sp_add(a, _sp_mul(_sp_mul(inv, _sp_transpose(a)), form), Fraction(-1))


def _unit(i: int, j: int) -> SparseMatrix:
    return {(i, j): Fraction(1)}


def _realization(cartan_type: str, rank: int) -> Tuple[int, List[SparseMatrix]]:
    """Matrix size and simple root vectors of a faithful realization."""
    if cartan_type == "A":
        return rank + 1, [_unit(i, i + 1) for i in range(rank)]
    if cartan_type in ("B", "C", "D"):
        size = 2 * rank + 1 if cartan_type == "B" else 2 * rank
        form = _form("sp" if cartan_type == "C" else "so", size)
        raw = [_unit(i, i + 1) for i in range(rank - 1)]
        raw.append(_unit(rank - 2, rank) if cartan_type == "D" else _unit(rank - 1, rank))
        return size, [_project(a, form) for a in raw]
    if cartan_type == "G" and rank == 2:
        size, d4 = _realization("D", 4)
        short = _sp_add(_sp_add(d4[0], d4[2]), d4[3])
        return size, [short, d4[1]]
    raise UnsupportedError(f"no realization for type {cartan_type}{rank}")


def _flatten(a: SparseMatrix, size: int) -> Vector:
    out = [ZERO] * (size * size)
    for (i, j), v in a.items():
        out[i * size + j] = CycNum.rational(v)
    return tuple(out)


def _root_label(prefix: str, coords: RootCoords) -> str:
    return prefix + "".join(str(c) for c in coords)


@lru_cache(maxsize=None)
def chevalley(cartan_type: str, rank: int) -> LieAlgebra:
    """
    The split simple Lie algebra of the given type in a Chevalley-type basis.

    Basis order: positive root vectors by height, then h_1..h_r, then the
    negative root vectors in the same order. For rank 1 this is (e, h, f).

    Raises:
        UnsupportedError: for types outside A1-A3, B2, C2, D4, G2
    """
    cartan_type = cartan_type.upper()
    if (cartan_type, rank) not in SUPPORTED_TYPES:
        raise UnsupportedError(
            f"type {cartan_type}{rank} is not supported",
            witness={"supported": sorted(f"{t}{r}" for t, r in SUPPORTED_TYPES)},
        )
    size, simple = _realization(cartan_type, rank)

    e_mats: List[SparseMatrix] = []
    f_mats: List[SparseMatrix] = []
    h_mats: List[SparseMatrix] = []
    for x in simple:
        xt = _sp_transpose(x)
        c = _eigen_ratio(_sp_commutator(_sp_commutator(x, xt), x), x)
        y = _sp_scale(xt, Fraction(2) / c)
        e_mats.append(x)
        f_mats.append(y)
        h_mats.append(_sp_commutator(x, y))

    cartan_matrix = tuple(
        tuple(int(_eigen_ratio(_sp_commutator(h_mats[i], e_mats[j]), e_mats[j])) for j in range(rank))
        for i in range(rank)
    )

    # positive roots breadth-first
    simple_coords = [tuple(1 if k == i else 0 for k in range(rank)) for i in range(rank)]
    positive: Dict[RootCoords, SparseMatrix] = {c: m for c, m in zip(simple_coords, e_mats)}
    origin: Dict[RootCoords, Tuple[int, RootCoords]] = {}
    queue = list(simple_coords)
    while queue:
        beta = queue.pop(0)
        for i in range(rank):
            y = _sp_commutator(e_mats[i], positive[beta])
            if not y:
                continue
            gamma = tuple(b + (1 if k == i else 0) for k, b in enumerate(beta))
            if gamma not in positive:
                positive[gamma] = y
                origin[gamma] = (i, beta)
                queue.append(gamma)
    order = sorted(positive, key=lambda c: (sum(c), c))

    negative: Dict[RootCoords, SparseMatrix] = {}
    neg_scale: Dict[RootCoords, Fraction] = {}
    for beta in order:
        if beta in origin:
            i, parent = origin[beta]
            y = _sp_commutator(f_mats[i], negative[parent])
            h = _sp_commutator(positive[beta], y)
            value = _eigen_ratio(_sp_commutator(h, positive[beta]), positive[beta])
            scale = Fraction(2) / value
            negative[beta] = _sp_scale(y, scale)
            neg_scale[beta] = scale
        else:
            negative[beta] = f_mats[simple_coords.index(beta)]

    matrices = [positive[b] for b in order] + h_mats + [negative[b] for b in order]
    p = len(order)
    index_pos = {b: k for k, b in enumerate(order)}
    index_neg = {b: p + rank + k for k, b in enumerate(order)}
    labels = [_root_label("e", b) for b in order]
    labels += [f"h{i + 1}" for i in range(rank)]
    labels += [_root_label("f", b) for b in order]
    if rank == 1:
        labels = ["e", "h", "f"]

    flat = [_flatten(m, size) for m in matrices]
    solver = CoordinateSolver(flat, size * size)
    dim = len(matrices)
    structure: Dict[Tuple[int, int], Dict[int, CycNum]] = {}
    for i in range(dim):
        for j in range(i + 1, dim):
            product = _sp_commutator(matrices[i], matrices[j])
            if not product:
                continue
            coords = solver.coordinates(_flatten(product, size), check=False)
            assert coords is not None
            structure[(i, j)] = {k: c for k, c in enumerate(coords) if c}

    roots: Dict[int, RootCoords] = {}
    paths: Dict[int, PathStep] = {}
    for b in order:
        roots[index_pos[b]] = b
        roots[index_neg[b]] = tuple(-x for x in b)
        if b in origin:
            i, parent = origin[b]
            paths[index_pos[b]] = PathStep(1, i, index_pos[parent])
            paths[index_neg[b]] = PathStep(-1, i, index_neg[parent], neg_scale[b])
    data = ChevalleyData(
        cartan_type=cartan_type,
        rank=rank,
        cartan_matrix=cartan_matrix,
        e=tuple(index_pos[c] for c in simple_coords),
        f=tuple(index_neg[c] for c in simple_coords),
        h=tuple(range(p, p + rank)),
        roots=roots,
        paths=paths,
    )
    g = LieAlgebra(dim, structure, labels, name=f"{cartan_type}{rank}", chevalley=data)
    logger.debug(f"built {g.name}: dim {dim}, {len(order)} positive roots")
    return g


def extend_from_generators(
    g: LieAlgebra,
    e_images: Sequence[Vector],
    f_images: Sequence[Vector],
) -> Matrix:
    """
    Matrix of the linear map fixed by images of the Chevalley generators and
    extended along the recorded bracket paths (columns are images of e_j).
    """
    data = g.chevalley
    if data is None:
        raise UnsupportedError(f"{g.name} has no Chevalley generators")
    images: Dict[int, Vector] = {}
    for i in range(data.rank):
        images[data.e[i]] = tuple(e_images[i])
        images[data.f[i]] = tuple(f_images[i])
        images[data.h[i]] = g.bracket(e_images[i], f_images[i])
    for index in sorted(data.paths, key=lambda k: sum(abs(x) for x in data.roots[k])):
        step = data.paths[index]
        generator = e_images[step.generator] if step.sign > 0 else f_images[step.generator]
        value = g.bracket(generator, images[step.parent])
        if step.scale != 1:
            value = tuple(x * step.scale for x in value)
        images[index] = value
    columns = [images[j] for j in range(g.dim)]
    return [tuple(col[i] for col in columns) for i in range(g.dim)]


def random_element(g: LieAlgebra, rng: random.Random, basis: Optional[Sequence[Vector]] = None) -> Vector:
    """Pseudorandom small-integer combination (``rng`` is a random.Random)."""
    vectors = list(basis) if basis is not None else identity_matrix(g.dim)
    coeffs = [CycNum.rational(rng.randint(-3, 3)) for _ in vectors]
    return vec_combine(zip(coeffs, vectors), g.dim)


__all__ = [
    "ONE",
    "ChevalleyData",
    "LieAlgebra",
    "abelian",
    "bracket",
    "centralizer",
    "centroid_dimension",
    "chevalley",
    "direct_sum",
    "extend_from_generators",
    "generating_set",
    "ideal_closure",
    "is_simple",
    "killing_form",
    "random_element",
    "subalgebra",
    "subalgebra_closure",
]
