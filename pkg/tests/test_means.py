import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxdiv import (
    Distribution,
    SubsetMask,
    diversity,
    diversity_profile,
    entropy,
    extend_by_zero,
    is_invariant,
    magnitude,
    power_mean,
    restrict,
    validate_similarity,
    weight_distribution,
)
from maxdiv.errors import BadWeights, InvalidOrder, NonPositiveValue
from maxdiv.means import diversity_to_entropy, entropy_to_diversity

from generators import random_distribution, random_similarity

INF = math.inf
Z08 = validate_similarity([[1, 0.8], [0.8, 1]])


def naive_diversity(Z, p, q):
    """Textbook formula, summed over the support with plain floats."""
    x = Z @ p
    terms = [(p[i], x[i]) for i in range(len(p)) if p[i] > 1e-12]
    if q == INF:
        return 1 / max(xi for _, xi in terms)
    if q == 1:
        return math.prod(xi ** (-pi) for pi, xi in terms)
    return sum(pi * xi ** (q - 1) for pi, xi in terms) ** (1 / (1 - q))


class TestPowerMean:
    def test_arithmetic(self):
        assert power_mean([2, 8], [0.5, 0.5], 1) == pytest.approx(5, abs=1e-14)

    def test_geometric(self):
        assert power_mean([2, 8], [0.5, 0.5], 0) == pytest.approx(4, abs=1e-14)

    def test_harmonic(self):
        # 1 / (0.5/2 + 0.5/8) = 3.2
        assert power_mean([2, 8], [0.5, 0.5], -1) == pytest.approx(3.2, abs=1e-14)

    def test_extremes(self):
        assert power_mean([2, 8, 3], [0.2, 0.3, 0.5], INF) == pytest.approx(8, rel=1e-15)
        assert power_mean([2, 8, 3], [0.2, 0.3, 0.5], -INF) == pytest.approx(2, rel=1e-15)

    def test_large_order_no_overflow(self):
        assert power_mean([1e-10, 0.5], [0.5, 0.5], 5000) == pytest.approx(0.5 * 0.5 ** (1 / 5000))

    def test_errors(self):
        with pytest.raises(NonPositiveValue):
            power_mean([0, 1], [0.5, 0.5], 1)
        with pytest.raises(BadWeights):
            power_mean([1, 1], [0.5, 0.6], 1)
        with pytest.raises(BadWeights):
            power_mean([1, 1], [1.0], 1)

    @settings(max_examples=100, deadline=None)
    # the direct formula itself is inaccurate for tiny nonzero t
    @given(
        st.integers(0, 2**32 - 1),
        st.one_of(st.just(0.0), st.floats(0.01, 6), st.floats(-3, -0.01)),
    )
    def test_matches_direct_formula(self, seed, t):
        rng = np.random.default_rng(seed)
        x = rng.uniform(0.05, 1, size=5)
        w = rng.dirichlet(np.ones(5))
        direct = np.exp(w @ np.log(x)) if t == 0 else (w @ x**t) ** (1 / t)
        assert power_mean(x, w, t) == pytest.approx(direct, rel=1e-9)


class TestDiversity:
    @pytest.mark.parametrize("q", [0, 0.5, 1, 2, 7.5, INF])
    def test_identity_uniform(self, q):
        assert diversity(np.eye(4), Distribution.uniform(4), q) == pytest.approx(4, rel=1e-14)

    @pytest.mark.parametrize("q", [0, 1, 2, INF])
    def test_all_ones(self, q):
        assert diversity(np.ones((3, 3)), [0.2, 0.3, 0.5], q) == pytest.approx(1, abs=1e-15)

    def test_order_two_is_inverse_quadratic_form(self):
        # p^T Z p = 0.25 + 0.25 + 2 * 0.25 * 0.8 = 0.9
        assert diversity(Z08, [0.5, 0.5], 2) == pytest.approx(1 / 0.9, rel=1e-14)

    def test_infinity_rejects_entropy(self):
        with pytest.raises(InvalidOrder):
            entropy(Z08, [0.5, 0.5], INF)

    def test_negative_order_rejected(self):
        with pytest.raises(InvalidOrder):
            diversity(Z08, [0.5, 0.5], -0.5)

    @settings(max_examples=200, deadline=None)
    @given(
        st.integers(1, 7),
        st.integers(0, 2**32 - 1),
        st.sampled_from([0, 0.3, 1, 1.7, 2, 4, 12, INF]),
        st.booleans(),
    )
    def test_matches_naive_formula(self, n, seed, q, sparse):
        rng = np.random.default_rng(seed)
        Z = random_similarity(rng, n)
        p = random_distribution(rng, n, sparse)
        assert diversity(Z, p, q) == pytest.approx(naive_diversity(Z.entries, p, q), rel=1e-10)


class TestEntropy:
    def test_shannon_uniform(self):
        assert entropy(np.eye(5), Distribution.uniform(5), 1) == pytest.approx(math.log(5), rel=1e-14)

    @pytest.mark.parametrize("q", [0, 0.5, 1, 2, 3])
    def test_all_ones_zero(self, q):
        assert entropy(np.ones((3, 3)), [0.1, 0.6, 0.3], q) == pytest.approx(0, abs=1e-14)

    def test_rao_quadratic(self):
        assert entropy(Z08, [0.5, 0.5], 2) == pytest.approx(0.1, abs=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(0, 10))
    def test_transform_is_shared(self, n, seed, q):
        rng = np.random.default_rng(seed)
        Z = random_similarity(rng, n)
        p = random_distribution(rng, n, sparse=True)
        d = diversity(Z, p, q)
        assert entropy(Z, p, q) == diversity_to_entropy(d, q)
        assert entropy_to_diversity(entropy(Z, p, q), q) == pytest.approx(d, rel=1e-10)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_order_two_identity(self, n, seed):
        rng = np.random.default_rng(seed)
        Z = random_similarity(rng, n)
        p = random_distribution(rng, n)
        assert abs(entropy(Z, p, 2) - (1 - 1 / diversity(Z, p, 2))) <= 1e-12

    def test_matches_definition(self):
        rng = np.random.default_rng(3)
        Z = random_similarity(rng, 4)
        p = random_distribution(rng, 4)
        x = Z.entries @ p
        assert entropy(Z, p, 1) == pytest.approx(-(p * np.log(x)).sum(), rel=1e-12)
        assert entropy(Z, p, 3) == pytest.approx((1 - (p * x**2).sum()) / 2, rel=1e-12)


class TestProfileProperties:
    QS = [0, 0.25, 0.5, 1, 1.5, 2, 3, 5, 8, INF]

    @settings(max_examples=150, deadline=None)
    @given(st.integers(1, 7), st.integers(0, 2**32 - 1), st.booleans())
    def test_monotone_in_q(self, n, seed, sparse):
        rng = np.random.default_rng(seed)
        Z = random_similarity(rng, n)
        p = Distribution(random_distribution(rng, n, sparse))
        ds = [pt.diversity for pt in diversity_profile(Z, p, self.QS)]
        assert all(b <= a + 1e-12 for a, b in zip(ds, ds[1:]))
        if not is_invariant(Z, p, tol=1e-6):
            assert all(b < a for a, b in zip(ds, ds[1:]))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 7), st.integers(0, 2**32 - 1))
    def test_derivative_at_one(self, n, seed):
        # d/dq D_q at q = 1 equals -D_1 * Var_p(log Zp) / 2
        rng = np.random.default_rng(seed)
        Z = random_similarity(rng, n)
        p = random_distribution(rng, n)
        lx = np.log(Z.entries @ p)
        var = p @ (lx - p @ lx) ** 2
        d1 = diversity(Z, p, 1)
        h = 1e-4
        slope = (diversity(Z, p, 1 + h) - diversity(Z, p, 1 - h)) / (2 * h)
        assert slope == pytest.approx(-d1 * var / 2, rel=1e-5, abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 7), st.integers(0, 2**32 - 1))
    def test_continuity_at_one(self, n, seed):
        rng = np.random.default_rng(seed)
        Z = random_similarity(rng, n)
        p = random_distribution(rng, n)
        d1 = diversity(Z, p, 1)
        for q in (1 - 1e-7, 1 + 1e-7, 1 - 1e-5, 1 + 1e-5):
            assert abs(diversity(Z, p, q) - d1) <= 1e-6 * max(1, abs(q - 1) / 1e-7)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 7), st.integers(0, 2**32 - 1))
    def test_limit_at_infinity(self, n, seed):
        rng = np.random.default_rng(seed)
        Z = random_similarity(rng, n)
        p = random_distribution(rng, n)
        assert diversity(Z, p, 1e6) == pytest.approx(diversity(Z, p, INF), rel=1e-4)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.sampled_from([0, 1, 2, 3.5, INF]))
    def test_restriction_invariance(self, m, seed, q):
        rng = np.random.default_rng(seed)
        n = m + int(rng.integers(0, 4))
        Z = random_similarity(rng, n)
        B = SubsetMask(tuple(rng.choice(n, size=m, replace=False)), n)
        r = Distribution(random_distribution(rng, m))
        lhs = diversity(restrict(Z, B), r, q)
        assert abs(lhs - diversity(Z, extend_by_zero(r, B), q)) <= 1e-12 * max(1, lhs)


class TestProfile:
    def test_identity_two(self):
        prof = diversity_profile(np.eye(2), [0.5, 0.5], [0, 1, 2, INF])
        assert [pt.q for pt in prof] == [0, 1, 2, INF]
        np.testing.assert_allclose([pt.diversity for pt in prof], 2, rtol=1e-14)
        assert prof[-1].entropy is None

    def test_weight_distribution_is_flat_at_magnitude(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            Z = random_similarity(rng, 4)
            p = weight_distribution(Z)
            if p is None:
                continue
            ds = [pt.diversity for pt in diversity_profile(Z, p, [0, 0.5, 1, 2, 5, INF])]
            np.testing.assert_allclose(ds, magnitude(Z), rtol=1e-10)

    def test_non_invariant_strictly_decreasing(self):
        ds = [pt.diversity for pt in diversity_profile(np.eye(2), [0.9, 0.1], [0, 1, 2, INF])]
        assert ds[0] > ds[1] > ds[2] > ds[3]

    def test_entropy_filled(self):
        prof = diversity_profile(Z08, [0.5, 0.5], [2])
        assert prof[0].entropy == pytest.approx(0.1, abs=1e-14)

    def test_empty_orders(self):
        with pytest.raises(InvalidOrder):
            diversity_profile(Z08, [0.5, 0.5], [])


class TestInvariant:
    def test_identity_uniform(self):
        assert is_invariant(np.eye(3), Distribution.uniform(3))

    def test_identity_skewed(self):
        assert not is_invariant(np.eye(2), [0.9, 0.1])

    def test_extended_weight_distribution(self):
        rng = np.random.default_rng(2)
        found = 0
        for _ in range(30):
            n = 5
            Z = random_similarity(rng, n)
            B = SubsetMask(tuple(sorted(rng.choice(n, size=3, replace=False))), n)
            r = weight_distribution(restrict(Z, B))
            if r is None:
                continue
            found += 1
            assert is_invariant(Z, extend_by_zero(r, B))
        assert found > 5
