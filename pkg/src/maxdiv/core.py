"""Domain types, validation and matrix builders.

Indices are 0-based everywhere in the library.  The CLI converts to and from
1-based indices at its boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from maxdiv.errors import (
    AsymmetryBeyondTol,
    BadDiagonal,
    EmptySubset,
    EntryOutOfRange,
    IndexOutOfBounds,
    InvalidDistribution,
    InvalidOrder,
    NonSquare,
    NotReflexive,
    NotSymmetric,
    NotUltrametric,
    ZeroMassOnSubset,
)

VALIDATION_TOL = 1e-9
SUPPORT_TOL = 1e-12

INF = math.inf


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Symmetric matrix with entries in [0, 1] and unit diagonal.

    The constructor checks structure exactly.  Use :func:`validate_similarity`
    for floating-point input that is only approximately symmetric.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = _frozen(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NonSquare(f"similarity matrix must be square, got shape {a.shape}")
        if a.shape[0] < 1:
            raise NonSquare("similarity matrix must have n >= 1")
        if not np.all(np.isfinite(a)):
            raise EntryOutOfRange("similarity matrix has non-finite entries")
        if not np.array_equal(a, a.T):
            raise AsymmetryBeyondTol("similarity matrix is not symmetric")
        bad = np.argwhere((a < 0) | (a > 1))
        if len(bad):
            i, j = bad[0]
            raise EntryOutOfRange(
                f"entry ({i + 1},{j + 1}) = {float(a[i, j])!r} outside [0, 1]"
            )
        if not np.all(np.diag(a) == 1.0):
            i = int(np.flatnonzero(np.diag(a) != 1.0)[0])
            raise BadDiagonal(f"diagonal entry {i + 1} = {float(a[i, i])!r} is not 1")
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, SimilarityMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"SimilarityMatrix(n={self.n})"


@dataclass(frozen=True, eq=False)
class Distribution:
    """Point of the probability simplex.

    Entries within ``tol`` of zero from below are clipped to zero; the total
    must be 1 within ``tol``.
    """

    p: np.ndarray
    tol: float = field(default=VALIDATION_TOL, repr=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=float).reshape(-1)
        if p.size == 0:
            raise InvalidDistribution("distribution must have at least one entry")
        if not np.all(np.isfinite(p)):
            raise InvalidDistribution("distribution has non-finite entries")
        if np.any(p < -self.tol):
            i = int(np.argmin(p))
            raise InvalidDistribution(f"entry {i + 1} = {float(p[i])!r} is negative")
        p = np.maximum(p, 0.0)
        total = p.sum()
        if abs(total - 1.0) > self.tol:
            raise InvalidDistribution(f"entries sum to {float(total)!r}, not 1")
        if not np.any(p > SUPPORT_TOL):
            raise InvalidDistribution("distribution has empty support")
        object.__setattr__(self, "p", _frozen(p))

    @property
    def n(self) -> int:
        return self.p.size

    def __array__(self, dtype=None, copy=None):
        return self.p if dtype is None else self.p.astype(dtype)

    def __len__(self):
        return self.p.size

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash(self.p.tobytes())

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        return cls(np.full(n, 1.0 / n))


@dataclass(frozen=True, order=True)
class SubsetMask:
    """Sorted set of 0-based indices into ``range(n)``."""

    members: tuple[int, ...]
    n: int

    def __post_init__(self):
        members = tuple(sorted({int(i) for i in self.members}))
        if len(members) != len(tuple(self.members)):
            raise IndexOutOfBounds(f"duplicate indices in {self.members!r}")
        if members and (members[0] < 0 or members[-1] >= self.n):
            raise IndexOutOfBounds(f"indices {members!r} not within 0..{self.n - 1}")
        object.__setattr__(self, "members", members)

    @classmethod
    def full(cls, n: int) -> "SubsetMask":
        return cls(tuple(range(n)), n)

    @classmethod
    def from_bits(cls, bits: int, n: int) -> "SubsetMask":
        return cls(tuple(i for i in range(n) if bits >> i & 1), n)

    @property
    def bits(self) -> int:
        return sum(1 << i for i in self.members)

    @property
    def index(self) -> np.ndarray:
        return np.array(self.members, dtype=int)

    def sort_key(self) -> tuple:
        """Popcount first, then lexicographic order of the members."""
        return (len(self.members), self.members)

    def one_based(self) -> list[int]:
        return [i + 1 for i in self.members]

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, i):
        return i in self.members


def check_order(q: float) -> float:
    """Validate an order ``q`` in [0, inf]; infinity is ``math.inf``."""
    q = float(q)
    if math.isnan(q) or q < 0:
        raise InvalidOrder(f"order q must lie in [0, inf], got {q!r}")
    return q


def parse_order(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "∞"):
        return INF
    try:
        value = float(t)
    except ValueError:
        raise InvalidOrder(f"cannot parse order {text!r}") from None
    if math.isinf(value):
        raise InvalidOrder(f"write infinity as 'inf', got {text!r}")
    return check_order(value)


def validate_similarity(raw, tol: float = VALIDATION_TOL) -> SimilarityMatrix:
    """Check ``raw`` against the similarity-matrix invariants within ``tol``.

    Symmetry is enforced by averaging with the transpose and the diagonal is
    snapped to exactly 1, so downstream code sees exact structure.
    """
    a = np.array(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NonSquare(f"matrix must be square and nonempty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise EntryOutOfRange("matrix has non-finite entries")
    asym = np.abs(a - a.T)
    if asym.max() > tol:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise AsymmetryBeyondTol(
            f"entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) differ by {asym[i, j]:.3g}"
        )
    a = 0.5 * (a + a.T)
    bad = np.argwhere((a < -tol) | (a > 1 + tol))
    if len(bad):
        i, j = bad[0]
        raise EntryOutOfRange(f"entry ({i + 1},{j + 1}) = {float(a[i, j])!r} outside [0, 1]")
    diag_err = np.abs(np.diag(a) - 1.0)
    if diag_err.max() > tol:
        i = int(np.argmax(diag_err))
        raise BadDiagonal(f"diagonal entry {i + 1} = {float(a[i, i])!r} is not 1")
    a = np.clip(a, 0.0, 1.0)
    np.fill_diagonal(a, 1.0)
    return SimilarityMatrix(a)


def from_distance_matrix(d, tol: float = VALIDATION_TOL) -> SimilarityMatrix:
    """``Z[i][j] = exp(-d[i][j])``.  The triangle inequality is not checked."""
    d = np.array(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
        raise NonSquare(f"distance matrix must be square, got shape {d.shape}")
    if np.any(np.isnan(d)):
        raise EntryOutOfRange("distance matrix has NaN entries")
    neg = np.argwhere(d < -tol)
    if len(neg):
        i, j = neg[0]
        raise EntryOutOfRange(f"distance ({i + 1},{j + 1}) = {float(d[i, j])!r} is negative")
    diag = np.abs(np.diag(d))
    if diag.max() > tol:
        i = int(np.argmax(diag))
        raise BadDiagonal(f"distance diagonal entry {i + 1} = {float(d[i, i])!r} is not 0")
    return validate_similarity(np.exp(-np.maximum(d, 0.0)), tol)


def from_reflexive_graph(adjacency) -> SimilarityMatrix:
    """0/1 similarity matrix of a reflexive, symmetric relation.

    ``adjacency`` is an n×n boolean-like array whose diagonal must be set.
    """
    a = np.array(adjacency)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NonSquare(f"adjacency must be square, got shape {a.shape}")
    a = a.astype(bool)
    missing = np.flatnonzero(~np.diag(a))
    if missing.size:
        raise NotReflexive(f"vertex {missing[0] + 1} has no loop")
    asym = np.argwhere(a != a.T)
    if len(asym):
        i, j = asym[0]
        raise NotSymmetric(f"edge ({i + 1},{j + 1}) present but not its reverse")
    return SimilarityMatrix(a.astype(float))


def graph_from_edges(n: int, edges: Iterable[tuple[int, int]]) -> SimilarityMatrix:
    """Reflexive graph on ``range(n)`` from an undirected edge list."""
    a = np.eye(n, dtype=bool)
    for i, j in edges:
        a[i, j] = a[j, i] = True
    return from_reflexive_graph(a)


def from_taxonomy(
    lineages: Sequence[Sequence], level_similarities: Sequence[float]
) -> SimilarityMatrix:
    """Similarity matrix from a taxonomic classification.

    ``lineages[i]`` lists the ranks of species ``i`` from coarsest to finest,
    e.g. ``("Felidae", "Panthera")``.  Two distinct species sharing exactly
    the first ``k`` ranks get similarity ``level_similarities[k]``, so the
    list has one more entry than the lineage depth and should be
    non-decreasing.

    >>> from_taxonomy([("F", "G"), ("F", "G")], [0.0, 0.6, 0.8]).entries[0, 1]
    0.8
    """
    from maxdiv.weighting import is_ultrametric

    n = len(lineages)
    if n == 0:
        raise NonSquare("taxonomy needs at least one species")
    depth = len(lineages[0])
    if any(len(lin) != depth for lin in lineages):
        raise NotUltrametric("all lineages must have the same depth")
    if len(level_similarities) != depth + 1:
        raise NotUltrametric(
            f"need {depth + 1} level similarities for lineage depth {depth}"
        )
    z = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            k = 0
            while k < depth and lineages[i][k] == lineages[j][k]:
                k += 1
            z[i, j] = z[j, i] = level_similarities[k]
    Z = validate_similarity(z)
    if not is_ultrametric(Z):
        raise NotUltrametric(
            "taxonomic similarities do not give an ultrametric matrix; "
            "level similarities must be non-decreasing and below 1"
        )
    return Z


def restrict(Z: SimilarityMatrix, B: SubsetMask) -> SimilarityMatrix:
    """Principal submatrix ``Z_B`` in the sorted order of ``B``."""
    if len(B) == 0:
        raise EmptySubset("cannot restrict to the empty subset")
    if B.n != Z.n:
        raise IndexOutOfBounds(f"mask is over {B.n} indices, matrix has {Z.n}")
    idx = B.index
    return SimilarityMatrix(Z.entries[np.ix_(idx, idx)])


def extend_by_zero(r: Distribution, B: SubsetMask, n: int | None = None) -> Distribution:
    n = B.n if n is None else n
    if len(r) != len(B):
        raise InvalidDistribution(f"distribution has {len(r)} entries, mask has {len(B)}")
    if n != B.n:
        raise IndexOutOfBounds(f"mask is over {B.n} indices, not {n}")
    p = np.zeros(n)
    p[B.index] = r.p
    return Distribution(p)


def restrict_distribution(p: Distribution, B: SubsetMask) -> Distribution:
    if len(B) == 0:
        raise EmptySubset("cannot restrict to the empty subset")
    mass = p.p[B.index]
    total = mass.sum()
    if not total > SUPPORT_TOL:
        raise ZeroMassOnSubset(f"distribution has no mass on {B.one_based()}")
    return Distribution(mass / total)


def support(p: Distribution, tol: float = SUPPORT_TOL) -> SubsetMask:
    return SubsetMask(tuple(np.flatnonzero(p.p > tol).tolist()), p.n)


def as_similarity(Z) -> SimilarityMatrix:
    return Z if isinstance(Z, SimilarityMatrix) else validate_similarity(Z)


def as_distribution(p) -> Distribution:
    return p if isinstance(p, Distribution) else Distribution(p)
