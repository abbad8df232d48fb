"""Brute-force oracles for cross-checking the exact maximizer.

Nothing here uses weightings or magnitudes: the order-2 maximum comes from
local search on the quadratic form, the order-0 maximum from a simplex grid,
and the graph case from counting discrete sets.  Used by the tests and by
``maxdiv verify``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from maxdiv.core import Distribution, as_similarity
from maxdiv.errors import DimensionTooLarge, NotAGraphMatrix

GRID_MAX_N = 4
GRAPH_MAX_N = 25


@dataclass(frozen=True)
class OracleResult:
    value: float
    argmax: Distribution
    restarts: int
    converged: bool


def project_simplex_rows(V: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row of ``V`` onto the probability simplex."""
    n = V.shape[1]
    U = -np.sort(-V, axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    k = np.arange(1, n + 1)
    rho = np.count_nonzero(U - css / k > 0, axis=1)
    theta = css[np.arange(V.shape[0]), rho - 1] / rho
    return np.maximum(V - theta[:, None], 0.0)


def oracle_max_d2(
    Z, restarts: int = 50, seed: int = 0, max_iter: int = 100_000, tol: float = 1e-12
) -> OracleResult:
    """Maximum of ``D_2 = 1/(p^T Z p)`` by multistart projected gradient.

    ``p^T Z p`` need not be convex on the simplex, so all restarts (Dirichlet(1)
    starting points drawn from ``seed``) run as one batch and the lowest final
    objective wins, ties going to the lowest restart index.
    """
    A = as_similarity(Z).entries
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(n), size=restarts)
    lam = np.abs(np.linalg.eigvalsh(A)).max()
    step = 1.0 / (2.0 * lam)
    active = np.ones(restarts, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        cur = P[idx]
        nxt = project_simplex_rows(cur - step * 2.0 * cur @ A)
        P[idx] = nxt
        active[idx] = np.abs(nxt - cur).sum(axis=1) >= tol
    f = np.einsum("ij,jk,ik->i", P, A, P)
    best = int(np.argmin(f))
    return OracleResult(
        value=float(1.0 / f[best]),
        argmax=Distribution(P[best] / P[best].sum()),
        restarts=restarts,
        converged=not active[best],
    )


def simplex_grid(n: int, resolution: int) -> np.ndarray:
    """All distributions with entries in ``{0, 1/resolution, ..., 1}``."""
    if n > GRID_MAX_N:
        raise DimensionTooLarge(f"simplex grid limited to n <= {GRID_MAX_N}, got {n}")
    pts = [
        c + (resolution - sum(c),)
        for c in itertools.product(range(resolution + 1), repeat=n - 1)
        if sum(c) <= resolution
    ]
    return np.array(pts, dtype=float) / resolution


def _grid_best(values: np.ndarray, grid: np.ndarray) -> OracleResult:
    best = int(np.argmax(values))
    return OracleResult(float(values[best]), Distribution(grid[best]), grid.shape[0], True)


def oracle_max_d0_grid(Z, resolution: int) -> OracleResult:
    """Maximum of ``D_0(p) = sum_{p_i > 0} p_i / (Zp)_i`` over a simplex grid,
    boundary faces included."""
    A = as_similarity(Z).entries
    grid = simplex_grid(A.shape[0], resolution)
    X = grid @ A
    pos = grid > 0
    d0 = np.where(pos, grid / np.where(pos, X, 1.0), 0.0).sum(axis=1)
    return _grid_best(d0, grid)


def oracle_max_entropy_grid(Z, q: float, resolution: int) -> OracleResult:
    """Maximum of the order-``q`` entropy (finite q) over a simplex grid."""
    A = as_similarity(Z).entries
    grid = simplex_grid(A.shape[0], resolution)
    X = grid @ A
    pos = grid > 0
    Xs = np.where(pos, X, 1.0)
    if q == 1:
        h = -np.where(pos, grid * np.log(Xs), 0.0).sum(axis=1)
    else:
        h = (1.0 - np.where(pos, grid * Xs ** (q - 1.0), 0.0).sum(axis=1)) / (q - 1.0)
    return _grid_best(h, grid)


def independence_number(Z) -> int:
    """Size of the largest discrete set of a reflexive graph matrix: a set of
    vertices with zero similarity between any two of its members."""
    A = as_similarity(Z).entries
    n = A.shape[0]
    if not np.all((A == 0) | (A == 1)):
        raise NotAGraphMatrix("independence number needs a 0/1 similarity matrix")
    if n > GRAPH_MAX_N:
        raise DimensionTooLarge(f"independence number limited to n <= {GRAPH_MAX_N}")
    closed = [sum(1 << j for j in range(n) if A[i, j]) for i in range(n)]
    best = 0

    def branch(cand: int, size: int):
        nonlocal best
        if size + cand.bit_count() <= best:
            return
        if cand == 0:
            best = size
            return
        # branch on a candidate of maximum degree within cand
        v = max(
            (i for i in range(n) if cand >> i & 1),
            key=lambda i: (closed[i] & cand).bit_count(),
        )
        branch(cand & ~closed[v], size + 1)
        branch(cand & ~(1 << v), size)

    branch((1 << n) - 1, 0)
    return best


def discrete_sets(Z) -> list[tuple[int, ...]]:
    """All maximum-size discrete sets, by plain enumeration (n <= 20)."""
    A = as_similarity(Z).entries
    n = A.shape[0]
    if n > 20:
        raise DimensionTooLarge("discrete set enumeration limited to n <= 20")
    d = independence_number(Z)
    return [
        s
        for s in itertools.combinations(range(n), d)
        if not np.any(A[np.ix_(s, s)] - np.eye(d))
    ]

