"""Weightings, magnitude and structural tests on similarity matrices.

A weighting on ``Z`` is any ``w`` with ``Zw = (1, ..., 1)^T``; all weightings
have the same sum, the magnitude ``|Z|``.  Invertible matrices have exactly
one.  For singular matrices the weightings form an affine family, and whether
that family meets the non-negative orthant is an LP feasibility question,
settled here by a phase-1 simplex with Bland's rule.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from maxdiv.core import Distribution, SimilarityMatrix, as_similarity

PIVOT_TOL = 1e-10
NONNEG_TOL = 1e-9
RESIDUAL_TOL = 1e-8
_LP_PIVOT_TOL = 1e-12
_LP_FEAS_TOL = 1e-9


class WeightingStatus(str, enum.Enum):
    UNIQUE = "UniqueWeighting"
    AFFINE_FEASIBLE = "AffineFamilyFeasible"
    AFFINE_INFEASIBLE = "AffineFamilyInfeasibleNonneg"
    NONE = "NoWeighting"


@dataclass(frozen=True, eq=False)
class WeightingResult:
    status: WeightingStatus
    representative: Optional[np.ndarray]
    magnitude: Optional[float]
    nonneg: bool

    @property
    def exists(self) -> bool:
        return self.status is not WeightingStatus.NONE

    @property
    def has_nonneg(self) -> bool:
        """Whether some non-negative weighting exists (not just the representative)."""
        return self.status is WeightingStatus.AFFINE_FEASIBLE or (
            self.status is WeightingStatus.UNIQUE and self.nonneg
        )


def lu_solve_batch(A: np.ndarray, pivot_tol: float = PIVOT_TOL):
    """Solve ``A[k] x[k] = 1`` for a stack of square matrices.

    Gaussian elimination with partial pivoting, vectorised over the stack.
    Returns ``(x, singular)``; a system is flagged singular when some pivot
    falls below ``pivot_tol`` times the largest entry of its matrix, and its
    row of ``x`` is then meaningless.
    """
    A = np.array(A, dtype=float)
    N, m, _ = A.shape
    b = np.ones((N, m))
    rows = np.arange(N)
    thresh = pivot_tol * np.abs(A).reshape(N, -1).max(axis=1)
    singular = np.zeros(N, dtype=bool)
    for k in range(m):
        piv = np.argmax(np.abs(A[:, k:, k]), axis=1) + k
        if np.any(piv != k):
            top = A[rows, k].copy()
            A[rows, k] = A[rows, piv]
            A[rows, piv] = top
            tb = b[rows, k].copy()
            b[rows, k] = b[rows, piv]
            b[rows, piv] = tb
        pivot = A[:, k, k]
        small = np.abs(pivot) < thresh
        singular |= small
        pivot = np.where(small, 1.0, pivot)
        A[:, k, k] = pivot
        if k + 1 < m:
            factor = A[:, k + 1 :, k] / pivot[:, None]
            A[:, k + 1 :, k:] -= factor[:, :, None] * A[:, None, k, k:]
            b[:, k + 1 :] -= factor * b[:, k, None]
    x = np.zeros((N, m))
    for k in range(m - 1, -1, -1):
        acc = b[:, k] - (A[:, k, k + 1 :] * x[:, k + 1 :]).sum(axis=1)
        x[:, k] = acc / A[:, k, k]
    return x, singular


def _phase_one(A: np.ndarray) -> Optional[np.ndarray]:
    """Find a vertex of ``{w >= 0 : A w = 1}`` or return None if empty.

    Dense tableau simplex minimising the sum of artificial variables.
    Bland's rule (lowest index enters, lowest basic index leaves on ties)
    prevents cycling and keeps the result deterministic.
    """
    m, n = A.shape
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = 1.0
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -float(m)
    basis = list(range(n, n + m))

    for _ in range(50 * (n + m) + 100):
        negative = np.flatnonzero(T[m, :-1] < -_LP_PIVOT_TOL)
        if negative.size == 0:
            break
        entering = negative[0]
        col = T[:m, entering]
        rows = np.flatnonzero(col > _LP_PIVOT_TOL)
        if rows.size == 0:  # unbounded cannot happen in phase 1
            break
        ratios = T[rows, -1] / col[rows]
        tied = rows[ratios <= ratios.min() + 1e-14]
        r = min(tied, key=basis.__getitem__)
        T[r] /= T[r, entering]
        factors = T[:, entering].copy()
        factors[r] = 0.0
        T -= np.outer(factors, T[r])
        basis[r] = entering

    if -T[m, -1] > _LP_FEAS_TOL * m:
        return None
    w = np.zeros(n)
    for i, j in enumerate(basis):
        if j < n:
            w[j] = max(T[i, -1], 0.0)
    # Re-solve on the basic columns to shed tableau round-off.
    cols = [j for j in basis if j < n and w[j] > 0]
    if cols:
        sol, *_ = np.linalg.lstsq(A[:, cols], np.ones(m), rcond=None)
        if sol.min() >= -NONNEG_TOL:
            polished = np.zeros(n)
            polished[cols] = np.maximum(sol, 0.0)
            if np.abs(A @ polished - 1).max() <= np.abs(A @ w - 1).max():
                w = polished
    if np.abs(A @ w - 1.0).max() > RESIDUAL_TOL:
        return None
    return w


def nonneg_weighting_exists(Z) -> tuple[bool, Optional[np.ndarray]]:
    """Decide whether ``Z`` admits a non-negative weighting.

    Returns ``(True, w)`` with ``w`` a vertex of the feasible polytope, or
    ``(False, None)``.
    """
    Z = as_similarity(Z)
    w = _phase_one(Z.entries)
    return (w is not None), w


def nonneg_weighting_vertices(Z) -> list[np.ndarray]:
    """All vertices of ``{w >= 0 : Zw = 1}`` by exhaustive basis enumeration.

    A vertex is a feasible point whose support columns are linearly
    independent, so every column subset of full column rank is tried.
    Exponential in n; intended for the small singular blocks met by the
    maximizer.
    """
    Z = as_similarity(Z)
    A = Z.entries
    n = Z.n
    rank = np.linalg.matrix_rank(A)
    found: list[np.ndarray] = []
    for size in range(1, rank + 1):
        for cols in itertools.combinations(range(n), size):
            sub = A[:, cols]
            if np.linalg.matrix_rank(sub) < size:
                continue
            sol, *_ = np.linalg.lstsq(sub, np.ones(n), rcond=None)
            if sol.min() < -NONNEG_TOL or np.abs(sub @ sol - 1).max() > RESIDUAL_TOL:
                continue
            w = np.zeros(n)
            w[list(cols)] = np.maximum(sol, 0.0)
            if not any(np.abs(w - v).max() <= 1e-9 for v in found):
                found.append(w)
    return found


def solve_weighting(Z) -> WeightingResult:
    Z = as_similarity(Z)
    x, singular = lu_solve_batch(Z.entries[None])
    if not singular[0]:
        w = x[0]
        return WeightingResult(
            WeightingStatus.UNIQUE, w, float(w.sum()), bool(w.min() >= -NONNEG_TOL)
        )
    ok, w = nonneg_weighting_exists(Z)
    if ok:
        return WeightingResult(WeightingStatus.AFFINE_FEASIBLE, w, float(w.sum()), True)
    w, *_ = np.linalg.lstsq(Z.entries, np.ones(Z.n), rcond=None)
    if np.abs(Z.entries @ w - 1.0).max() <= RESIDUAL_TOL:
        return WeightingResult(
            WeightingStatus.AFFINE_INFEASIBLE, w, float(w.sum()), bool(w.min() >= -NONNEG_TOL)
        )
    return WeightingResult(WeightingStatus.NONE, None, None, False)


def magnitude(Z) -> Optional[float]:
    """Sum of any weighting on ``Z``; None when ``Z`` has no weighting.

    For invertible ``Z`` this is the sum of all entries of ``Z^{-1}``.
    """
    return solve_weighting(Z).magnitude


def weight_distribution(Z) -> Optional[Distribution]:
    """``w / |Z|`` for a non-negative weighting ``w``, or None if there is none.

    The result ``p`` has ``(Zp)_i = 1/|Z|`` for every i.
    """
    res = solve_weighting(Z)
    if not res.has_nonneg:
        return None
    w = np.maximum(res.representative, 0.0)
    return Distribution(w / w.sum())


def cholesky_pivots(Z) -> np.ndarray:
    """Diagonal pivots ``d_k`` of the LDL^T factorisation, stopping early at
    the first non-positive one."""
    A = np.array(as_similarity(Z).entries)
    n = A.shape[0]
    L = np.zeros_like(A)
    pivots = []
    for j in range(n):
        d = A[j, j] - np.dot(L[j, :j], L[j, :j])
        pivots.append(d)
        if d <= 0:
            break
        L[j, j] = np.sqrt(d)
        L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return np.array(pivots)


def is_positive_definite(Z, pivot_tol: float = PIVOT_TOL) -> bool:
    Z = as_similarity(Z)
    piv = cholesky_pivots(Z)
    return len(piv) == Z.n and bool(np.all(piv > pivot_tol))


def is_ultrametric(Z, tol: float = 1e-12) -> bool:
    """``min(Z_ij, Z_jk) <= Z_ik`` for all triples and ``Z_ij < 1`` off the diagonal."""
    A = as_similarity(Z).entries
    n = A.shape[0]
    if n > 1 and A[~np.eye(n, dtype=bool)].max() >= 1.0:
        return False
    # lhs[i, j, k] = min(Z_ij, Z_jk)
    lhs = np.minimum(A[:, :, None], A[None, :, :])
    return bool(np.all(lhs <= A[:, None, :] + tol))


def is_scattered(Z) -> bool:
    """Every off-diagonal entry is strictly below ``1/(n-1)``."""
    A = as_similarity(Z).entries
    n = A.shape[0]
    if n == 1:
        return True
    return bool(A[~np.eye(n, dtype=bool)].max() < 1.0 / (n - 1))
