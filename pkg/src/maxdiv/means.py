"""Power means and the similarity-sensitive diversity and entropy of order q.

For a similarity matrix ``Z`` and distribution ``p``, the reciprocal of the
diversity of order ``q`` is the power mean of order ``q - 1`` of the values
``(Zp)_i`` over the support of ``p``, weighted by ``p``.  With ``Z = I`` the
diversities are the Hill numbers and ``log D`` is the Renyi entropy; those are
not exposed separately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from maxdiv.core import (
    SUPPORT_TOL,
    Distribution,
    SimilarityMatrix,
    as_distribution,
    as_similarity,
    check_order,
)
from maxdiv.errors import BadWeights, InvalidOrder, NonPositiveValue

# |t| below this uses the geometric mean, avoiding the 0/0 in the exponent 1/t.
GEOMETRIC_WINDOW = 1e-6


@dataclass(frozen=True)
class ProfilePoint:
    q: float
    diversity: float
    entropy: Optional[float]


def _log_power_mean(log_x: np.ndarray, w: np.ndarray, t: float) -> float:
    if math.isinf(t):
        return float(log_x.max() if t > 0 else log_x.min())
    if abs(t) < GEOMETRIC_WINDOW:
        return float(np.dot(w, log_x))
    a = t * log_x
    if np.abs(a).max() < 1.0:
        # sum(w) == 1, so log sum w e^a == log1p(sum w expm1(a)) without cancellation
        return float(math.log1p(np.dot(w, np.expm1(a))) / t)
    m = a.max()
    return float((m + math.log(np.dot(w, np.exp(a - m)))) / t)


def power_mean(x, weights, t: float) -> float:
    """Weighted power mean of order ``t`` of positive values ``x``.

    Evaluated in log space; ``t = 0`` is the weighted geometric mean and
    ``t = ±inf`` gives the max/min.

    >>> power_mean([2, 8], [0.5, 0.5], 0)
    4.0
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if x.shape != w.shape or x.size == 0:
        raise BadWeights(f"need equally many values and weights, got {x.size} and {w.size}")
    if not np.all(x > 0):
        raise NonPositiveValue(f"power mean needs positive values, got min {x.min()!r}")
    if not np.all(w > 0) or abs(w.sum() - 1.0) > 1e-9:
        raise BadWeights("weights must be positive and sum to 1")
    if math.isnan(t):
        raise InvalidOrder("power mean order is NaN")
    return math.exp(_log_power_mean(np.log(x), w, float(t)))


def ordinariness(Z, p) -> np.ndarray:
    """The vector ``Zp``; entry i is how ordinary species i is under ``p``."""
    return as_similarity(Z).entries @ as_distribution(p).p


def diversity(Z: SimilarityMatrix, p: Distribution, q: float) -> float:
    """Diversity of order ``q`` in [0, inf] of ``p`` under similarity ``Z``.

    Computed as the reciprocal of the power mean of order ``q - 1`` of
    ``(Zp)_i`` over the support, so that ``q = 1`` (geometric) and
    ``q = inf`` (``1 / max (Zp)_i``) need no special formulas.
    """
    Z = as_similarity(Z)
    p = as_distribution(p)
    q = check_order(q)
    if p.n != Z.n:
        raise BadWeights(f"distribution has {p.n} entries, matrix is {Z.n}x{Z.n}")
    supp = p.p > SUPPORT_TOL
    x = (Z.entries @ p.p)[supp]
    w = p.p[supp]
    return math.exp(-_log_power_mean(np.log(x), w, q - 1.0))


def diversity_to_entropy(d: float, q: float) -> float:
    """Map a diversity of order ``q`` (finite) to the entropy of the same order."""
    q = check_order(q)
    if math.isinf(q):
        raise InvalidOrder("entropy of order infinity is not defined")
    if abs(q - 1.0) < GEOMETRIC_WINDOW:
        return math.log(d)
    return -math.expm1((1.0 - q) * math.log(d)) / (q - 1.0)


def entropy_to_diversity(h: float, q: float) -> float:
    """Inverse of :func:`diversity_to_entropy`."""
    q = check_order(q)
    if math.isinf(q):
        raise InvalidOrder("entropy of order infinity is not defined")
    if abs(q - 1.0) < GEOMETRIC_WINDOW:
        return math.exp(h)
    return math.exp(math.log1p(-(q - 1.0) * h) / (1.0 - q))


def entropy(Z: SimilarityMatrix, p: Distribution, q: float) -> float:
    """Entropy of order ``q`` in [0, inf).

    Always equal to ``diversity_to_entropy(diversity(Z, p, q), q)``; ``q = 1``
    gives ``-sum p_i log (Zp)_i`` and ``q = 2`` gives Rao's quadratic entropy
    ``1 - p^T Z p``.
    """
    q = check_order(q)
    if math.isinf(q):
        raise InvalidOrder("entropy of order infinity is not defined")
    return diversity_to_entropy(diversity(Z, p, q), q)


def diversity_profile(Z, p, qs: Iterable[float]) -> list[ProfilePoint]:
    Z = as_similarity(Z)
    p = as_distribution(p)
    qs = [check_order(q) for q in qs]
    if not qs:
        raise InvalidOrder("need at least one order q")
    points = []
    for q in qs:
        d = diversity(Z, p, q)
        h = None if math.isinf(q) else diversity_to_entropy(d, q)
        points.append(ProfilePoint(q, d, h))
    return points


def is_invariant(Z, p, tol: float = 1e-9) -> bool:
    """True iff ``(Zp)_i`` is constant over the support of ``p``, within a
    relative tolerance.  Such distributions have the same diversity for all q.
    """
    Z = as_similarity(Z)
    p = as_distribution(p)
    x = (Z.entries @ p.p)[p.p > SUPPORT_TOL]
    return bool(x.max() - x.min() <= tol * x.max())
