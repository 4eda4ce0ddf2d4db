import math

import numpy as np
import pytest
from scipy.stats import poisson

from tailbound import (
    DiscreteDistribution,
    DomainError,
    TransformQuery,
    build_model,
    chernoff_inf,
    g2_oracle,
    g_beta,
    hoeffding_closed,
    poisson_closed_bound,
    poisson_g2,
    truncated_poisson,
)
from tailbound.transform import chernoff_tilt

from oracles import brute_chernoff, brute_g_beta, random_centered_law

FAIR = DiscreteDistribution([-1.0, 1.0], [0.5, 0.5])


def tn(n, s2):
    return build_model(n, s2).distribution()


def random_law(rng):
    atoms, weights = random_centered_law(rng)
    return DiscreteDistribution.from_pairs(zip(atoms, weights))


class TestDistribution:
    def test_moments(self):
        d = DiscreteDistribution([-1.0, 0.0, 1.0], [0.25, 0.5, 0.25])
        assert (d.mean, d.variance, d.skewness, d.kurtosis) == (0.0, 0.5, 0.0, 2.0)
        assert d.tail(0.0) == 0.75

    @pytest.mark.parametrize(
        "atoms, weights",
        [([], []), ([1.0, 0.0], [0.5, 0.5]), ([0.0, 1.0], [0.5, 0.6]), ([0.0, 1.0], [-0.1, 1.1]), ([math.inf], [1.0])],
    )
    def test_rejects(self, atoms, weights):
        with pytest.raises(DomainError):
            DiscreteDistribution(atoms, weights)

    def test_from_pairs_merges(self):
        d = DiscreteDistribution.from_pairs([(1.0, 0.25), (-1.0, 0.5), (1.0, 0.25)])
        np.testing.assert_array_equal(d.atoms, [-1, 1])
        np.testing.assert_array_equal(d.weights, [0.5, 0.5])


class TestGBeta:
    def test_cantelli_fair(self):
        assert g_beta(FAIR, TransformQuery(1.0)) == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 4.0])
    def test_dominates_tail_fair(self, beta):
        assert g_beta(FAIR, TransformQuery(1.0, beta)) >= 0.5 - 1e-12

    def test_binomial_two(self):
        assert g_beta(tn(2, 1.0), TransformQuery(1.0)) == pytest.approx(2 / 3, rel=1e-12)

    def test_vacuous_and_beyond(self):
        assert g_beta(FAIR, TransformQuery(0.0)) == 1.0
        assert g_beta(FAIR, TransformQuery(1.5)) == 0.0

    @pytest.mark.parametrize("beta", [0.0, -1.0])
    def test_bad_beta(self, beta):
        with pytest.raises(DomainError):
            TransformQuery(1.0, beta)

    @pytest.mark.parametrize("beta", [1.0, 3.0])
    def test_general_beta_against_brute_force(self, beta):
        rng = np.random.default_rng(11)
        for _ in range(20):
            d = random_law(rng)
            x = float(d.atoms[-1] * rng.uniform(0.05, 1.0))
            ref = brute_g_beta(d.atoms, d.weights, x, beta)
            assert g_beta(d, TransformQuery(x, beta)) == pytest.approx(ref, rel=1e-6)

    def test_far_left_optimum(self):
        # x just above the mean pushes the optimal h far below the support
        d = tn(3, 1.0)
        x = 1e-3
        expected = 3.0 / (3.0 + x * x)
        assert g_beta(d, TransformQuery(x)) == pytest.approx(expected, rel=1e-10)

    def test_domination_random(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            d = random_law(rng)
            for x in d.atoms[d.atoms > d.mean]:
                for beta in (0.5, 2.0, 3.0):
                    assert g_beta(d, TransformQuery(float(x), beta)) >= d.tail(x) - 1e-12


class TestG2Oracle:
    @pytest.mark.parametrize(
        "dist, x, expected",
        [
            (tn(2, 1.0), 1.0, 2 / 3),
            (tn(1, 1.0), 0.5, 0.8),
            (tn(2, 1.0), 2.0, 0.25),
        ],
    )
    def test_pinned(self, dist, x, expected):
        assert g2_oracle(dist, x) == pytest.approx(expected, abs=1e-15)

    def test_optimum_location_t2(self):
        # Cantelli on the full law: h* = -Var/x = -2 at x = 1
        d = tn(2, 1.0)
        f = lambda h: float(np.dot(d.weights, np.clip(d.atoms - h, 0, None) ** 2)) / (1 - h) ** 2
        assert f(-2.0) == pytest.approx(2 / 3, abs=1e-15)
        assert f(-2.1) > f(-2.0) < f(-1.9)

    def test_vectorised(self):
        d = tn(4, 0.5)
        xs = np.linspace(0.1, 4, 7)
        np.testing.assert_array_equal(g2_oracle(d, xs), [g2_oracle(d, x) for x in xs])

    def test_random_against_brute_force(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            d = random_law(rng)
            x = float(d.atoms[-1] * rng.uniform(0.01, 1.0))
            assert g2_oracle(d, x) == pytest.approx(brute_g_beta(d.atoms, d.weights, x), rel=1e-7)

    def test_matches_g_beta(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            d = random_law(rng)
            x = float(rng.uniform(0.0, d.atoms[-1] * 1.05))
            assert g_beta(d, TransformQuery(x)) == pytest.approx(g2_oracle(d, x), rel=1e-9)


class TestChernoff:
    def test_pinned(self):
        assert chernoff_inf(tn(1, 1.0), 0.5) == pytest.approx(2 * 3 ** -0.75, rel=1e-14)

    def test_vacuous_and_edges(self):
        d = tn(2, 1.0)
        assert chernoff_inf(d, 0.0) == 1.0
        assert chernoff_inf(d, -1.0) == 1.0
        assert chernoff_inf(d, 2.0) == pytest.approx(0.25)
        assert chernoff_inf(d, 2.5) == 0.0

    @pytest.mark.parametrize("n", [1, 4, 9])
    @pytest.mark.parametrize("sigma2", [0.25, 1.0, 4.0])
    @pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
    def test_equals_hoeffding(self, n, sigma2, t):
        assert chernoff_inf(tn(n, sigma2), n * t) == pytest.approx(hoeffding_closed(sigma2, n, t), rel=1e-8)

    def test_against_brute_force(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            d = random_law(rng)
            x = float(d.atoms[-1] * rng.uniform(0.05, 0.95))
            assert chernoff_inf(d, x) == pytest.approx(brute_chernoff(d.atoms, d.weights, x), rel=1e-7)

    def test_stationarity_residual(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            d = random_law(rng)
            x = float(d.atoms[-1] * rng.uniform(0.05, 0.95))
            h = chernoff_tilt(d, x)
            w = d.weights * np.exp(h * (d.atoms - d.atoms[-1]))
            assert abs(np.dot(w, d.atoms) / w.sum() - x) <= 1e-10

    def test_g2_below_chernoff(self):
        for n in (1, 3, 8, 15):
            for s2 in (0.1, 0.5, 2.0):
                d = tn(n, s2)
                for x in np.linspace(0, n, 40)[1:]:
                    assert g2_oracle(d, x) <= chernoff_inf(d, x) + 1e-12


class TestPoisson:
    def test_truncation_point(self):
        d = truncated_poisson(1.0, 1e-12)
        k = len(d) - 1
        assert poisson.sf(k, 1.0) <= 1e-12 < poisson.sf(k - 1, 1.0)
        assert k == 14
        assert d.weights[0] == pytest.approx(math.exp(-1), rel=1e-11)
        assert d.atoms[0] == -1.0

    def test_small_lambda(self):
        d = truncated_poisson(1e-6, 1e-12)
        assert d.atoms[0] == -1e-6
        assert d.weights[0] == pytest.approx(1.0, abs=2e-6)

    def test_mean(self):
        assert abs(truncated_poisson(5.0, 1e-12).mean) <= 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            truncated_poisson(0.0)
        with pytest.raises(DomainError):
            truncated_poisson(1.0, 1e-3)

    def test_closed_bound_values(self):
        assert poisson_closed_bound(1.0, 1.0) == pytest.approx(math.e / 4, abs=1e-12)
        assert poisson_closed_bound(3.0, 0.0) == 1.0
        assert poisson_closed_bound(2.0, 2.0) == pytest.approx(math.e**2 / 16, rel=1e-14)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 4.0])
    @pytest.mark.parametrize("x", [0.5, 1.0, 3.0])
    def test_closed_bound_is_chernoff(self, lam, x):
        # truncation drops mass that the tilted mgf weights by exp(h k), so only one side is tight
        trunc = chernoff_inf(truncated_poisson(lam), x)
        closed = poisson_closed_bound(lam, x)
        assert trunc <= closed * (1 + 1e-9)
        assert trunc == pytest.approx(closed, rel=1e-3)
        deep = chernoff_inf(truncated_poisson(lam, 1e-30), x)
        assert deep == pytest.approx(closed, abs=1e-10)

    def test_deep_truncation(self):
        d = truncated_poisson(2.0, 1e-40)
        k = len(d) - 1
        assert poisson.sf(k, 2.0) <= 1e-40 < poisson.sf(k - 1, 2.0)

    def test_g2_values(self):
        assert poisson_g2(1.0, 1.0) == pytest.approx(0.5, abs=1e-6)
        assert poisson_g2(1.0, 1.0) >= 1 - 2 / math.e
        assert poisson_g2(2.0, 0.0) == 1.0
        assert poisson_g2(2.0, -1.0) == 1.0

    def test_dominates_binomial(self):
        for n in (1, 4, 10):
            for s2 in (0.25, 1.0, 4.0):
                d = tn(n, s2)
                for x in np.linspace(0, n, 15)[1:]:
                    assert g2_oracle(d, x) <= poisson_g2(n * s2, x) + 1e-9
