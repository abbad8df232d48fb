"""Exact maximum diversity of a similarity matrix.

The maximum of ``D_q^Z`` over distributions is the same for every q and
equals the largest magnitude ``|Z_B|`` over subsets ``B`` whose restriction
admits a non-negative weighting ("good" subsets).  The maximizing
distributions are the normalised non-negative weightings on the maximal good
subsets, extended by zero.

The search runs per connected component (maximum diversities of blocks with
zero similarity between them add up) and skips the subset enumeration when a
component is ultrametric, scattered, or positive definite with a positive
weighting, since its full magnitude is then the answer.
"""
from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from maxdiv.core import (
    Distribution,
    SimilarityMatrix,
    SubsetMask,
    as_distribution,
    as_similarity,
    check_order,
)
from maxdiv.errors import ComponentTooLarge
from maxdiv.means import diversity, diversity_to_entropy
from maxdiv.weighting import (
    NONNEG_TOL,
    WeightingStatus,
    _phase_one,
    is_positive_definite,
    is_scattered,
    is_ultrametric,
    lu_solve_batch,
    nonneg_weighting_vertices,
    solve_weighting,
)

DEFAULT_SUBSET_BUDGET = 2**25
_CHUNK = 2048


class Method(str, enum.Enum):
    EXHAUSTIVE = "Exhaustive"
    DECOMPOSITION = "ComponentDecomposition"
    POSITIVE_DEFINITE = "PositiveDefiniteFastPath"
    SCATTERED = "ScatteredFastPath"
    ULTRAMETRIC = "UltrametricFastPath"


@dataclass(frozen=True)
class MaximizeOptions:
    tie_tol: float = 1e-9
    fast_paths: bool = True
    subset_budget: int = DEFAULT_SUBSET_BUDGET
    jobs: int = 1
    entropy_orders: tuple = (0.0, 0.5, 1.0, 2.0)
    # singular maximal subsets up to this size get all polytope vertices listed
    vertex_enum_max: int = 12


@dataclass(frozen=True, eq=False)
class GoodSubset:
    mask: SubsetMask
    magnitude: float
    weighting: np.ndarray

    def distribution(self) -> Distribution:
        """The weighting normalised and extended by zero to all species."""
        p = np.zeros(self.mask.n)
        p[self.mask.index] = self.weighting / self.weighting.sum()
        return Distribution(p)


@dataclass(frozen=True)
class ComponentResult:
    mask: SubsetMask
    dmax: float
    method: Method


@dataclass(frozen=True, eq=False)
class MaximizationReport:
    dmax: float
    maximal_subsets: list[GoodSubset]
    maximizing_distributions: list[Distribution]
    method: Method
    components: list[ComponentResult]
    sup_entropies: dict = field(default_factory=dict)

    def sup_entropy(self, q: float) -> float:
        """Supremum of the entropy of order ``q`` (finite) over all distributions."""
        return diversity_to_entropy(self.dmax, q)


def connected_components(Z) -> list[SubsetMask]:
    """Classes of the equivalence relation generated by ``Z_ij > 0``.

    Distinct components are complementary: every similarity between them is 0.
    """
    A = as_similarity(Z).entries
    n = A.shape[0]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in zip(*np.nonzero(np.triu(A, 1) > 0)):
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [SubsetMask(tuple(g), n) for g in sorted(groups.values())]


def _chunks(m: int) -> Iterator[np.ndarray]:
    """Subsets of ``range(m)`` by increasing size, lexicographic within a
    size, in fixed-size blocks of index arrays."""
    for size in range(1, m + 1):
        combos = itertools.combinations(range(m), size)
        while True:
            block = list(itertools.islice(combos, _CHUNK))
            if not block:
                break
            yield np.array(block, dtype=np.intp)


def _keep_near_max(cands, tie_tol):
    if not cands:
        return cands
    best = max(c[1] for c in cands)
    return [c for c in cands if c[1] >= best - tie_tol * best]


def _scan(A: np.ndarray, tie_tol: float, jobs: int, worker: int):
    """Evaluate every chunk assigned to ``worker``; return near-maximal good
    subsets as ``(members, magnitude, weighting)``."""
    cands = []
    for c, idx in enumerate(_chunks(A.shape[0])):
        if c % jobs != worker:
            continue
        subs = A[idx[:, :, None], idx[:, None, :]]
        x, singular = lu_solve_batch(subs)
        good = ~singular & (x.min(axis=1) >= -NONNEG_TOL)
        found = [(tuple(idx[k].tolist()), float(x[k].sum()), x[k]) for k in np.flatnonzero(good)]
        for k in np.flatnonzero(singular):
            w = _phase_one(subs[k])
            if w is not None:
                found.append((tuple(idx[k].tolist()), float(w.sum()), w))
        cands = _keep_near_max(cands + found, tie_tol)
    return cands


def _scan_job(args):
    return _scan(*args)


def _exhaustive(A: np.ndarray, opts: MaximizeOptions):
    m = A.shape[0]
    if 2**m - 1 > opts.subset_budget:
        raise ComponentTooLarge(
            f"component of size {m} needs {2**m - 1} subsets, budget is {opts.subset_budget}"
        )
    n_chunks = sum(math.ceil(math.comb(m, s) / _CHUNK) for s in range(1, m + 1))
    jobs = max(1, min(opts.jobs, n_chunks))
    if jobs == 1:
        cands = _scan(A, opts.tie_tol, 1, 0)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_scan_job, [(A, opts.tie_tol, jobs, k) for k in range(jobs)])
            cands = [c for part in parts for c in part]
    cands = _keep_near_max(cands, opts.tie_tol)
    cands.sort(key=lambda c: (len(c[0]), c[0]))
    return cands


def _fast_path(A: np.ndarray):
    """Return a method tag if the whole block is known to be optimal."""
    checks = (
        (Method.ULTRAMETRIC, is_ultrametric),
        (Method.SCATTERED, is_scattered),
        (Method.POSITIVE_DEFINITE, is_positive_definite),
    )
    Z = SimilarityMatrix(A)
    for method, test in checks:
        if test(Z):
            res = solve_weighting(Z)
            # Only strictly positive weightings make the full set the unique optimum.
            if res.status is WeightingStatus.UNIQUE and res.representative.min() > NONNEG_TOL:
                return method, res.representative
    return None, None


def _component_weightings(A, members, w, opts) -> list[np.ndarray]:
    """Non-negative weightings on a maximal subset to report."""
    sub = A[np.ix_(members, members)]
    x, singular = lu_solve_batch(sub[None])
    if not singular[0]:
        return [w]
    if len(members) <= opts.vertex_enum_max:
        return nonneg_weighting_vertices(SimilarityMatrix(sub)) or [w]
    return [w]


def _solve_component(A: np.ndarray, opts: MaximizeOptions):
    """Return ``(method, [(local members, magnitude, [weightings])])``."""
    m = A.shape[0]
    if opts.fast_paths:
        method, w = _fast_path(A)
        if method is not None:
            return method, [(tuple(range(m)), float(w.sum()), [w])]
    cands = _exhaustive(A, opts)
    return Method.EXHAUSTIVE, [
        (members, mag, _component_weightings(A, list(members), w, opts))
        for members, mag, w in cands
    ]


def _dedupe(dists: Sequence[np.ndarray], tol=1e-9) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for p in dists:
        if not any(np.abs(p - q).max() <= tol for q in out):
            out.append(p)
    return out


def maximize(Z, opts: MaximizeOptions | None = None, **kwargs) -> MaximizationReport:
    """Maximum diversity of ``Z`` with its maximal good subsets and
    maximizing distributions.

    Keyword arguments override fields of :class:`MaximizeOptions`.

    Raises
    ------
    ComponentTooLarge
        If a component needs exhaustive search over more subsets than
        ``opts.subset_budget``.
    """
    Z = as_similarity(Z)
    opts = opts or MaximizeOptions()
    if kwargs:
        opts = MaximizeOptions(**{**opts.__dict__, **kwargs})
    n = Z.n
    comps = connected_components(Z)

    solved = []
    for comp in comps:
        idx = comp.index
        method, entries = _solve_component(Z.entries[np.ix_(idx, idx)], opts)
        solved.append((comp, method, entries))

    comp_dmax = [max(e[1] for e in entries) for _, _, entries in solved]
    dmax = float(sum(comp_dmax))

    # A maximal subset of Z picks one maximal subset per component; on it the
    # concatenated weighting normalises to mass dmax(C)/dmax on component C.
    combined = []
    for choice in itertools.product(*(entries for _, _, entries in solved)):
        members = []
        w_full = np.zeros(n)
        per_comp = []
        for (comp, _, _), (local, mag, ws) in zip(solved, choice):
            glob = comp.index[list(local)]
            members.extend(glob.tolist())
            w_full[glob] = ws[0]
            per_comp.append((glob, ws))
        mask = SubsetMask(tuple(members), n)
        good = GoodSubset(mask, float(sum(c[1] for c in choice)), w_full[mask.index])
        dists = []
        for combo in itertools.product(*(ws for _, ws in per_comp)):
            p = np.zeros(n)
            for (glob, _), w in zip(per_comp, combo):
                p[glob] = w
            dists.append(p / p.sum())
        combined.append((good, dists))
    combined.sort(key=lambda c: c[0].mask.sort_key())

    distributions = _dedupe([p for _, ds in combined for p in ds])
    method = solved[0][1] if len(solved) == 1 else Method.DECOMPOSITION
    orders = [check_order(q) for q in opts.entropy_orders if not math.isinf(q)]
    return MaximizationReport(
        dmax=dmax,
        maximal_subsets=[g for g, _ in combined],
        maximizing_distributions=[Distribution(p) for p in distributions],
        method=method,
        components=[
            ComponentResult(comp, d, meth) for (comp, meth, _), d in zip(solved, comp_dmax)
        ],
        sup_entropies={q: diversity_to_entropy(dmax, q) for q in orders},
    )


def check_q_maximizing(Z, p, q: float, report: MaximizationReport, tol: float = 1e-8) -> bool:
    """Whether ``p`` attains the maximum diversity of order ``q``.

    For q > 0 this is equivalent to ``p`` maximizing the diversity of every
    order.  At q = 0 it is weaker: with ``Z = I`` every distribution of full
    support has ``D_0 = n``.
    """
    return diversity(as_similarity(Z), as_distribution(p), q) >= report.dmax - tol
