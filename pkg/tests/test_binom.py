import math

import numpy as np
import pytest

from tailbound import DomainError, build_model, g2_closed_form, g2_oracle, survival_at, survival_interp
from tailbound.binom import piece_index
from tailbound.errors import DegenerateError

from oracles import binomial_pmf_direct, brute_g_beta, exact_tn_law

SIGMA2_GRID = (0.1, 0.25, 0.5, 1.0, 2.0, 4.0)


@pytest.fixture(scope="module")
def m2():
    return build_model(2, 1.0)


class TestBuildModel:
    def test_pinned_n2(self, m2):
        assert m2.lam == 1.0
        np.testing.assert_allclose(m2.atoms, [-2, 0, 2], atol=1e-15)
        np.testing.assert_allclose(m2.pmf, [0.25, 0.5, 0.25], rtol=1e-14)
        np.testing.assert_allclose(m2.survival, [1, 0.75, 0.25], rtol=1e-14)
        np.testing.assert_allclose(m2.nu, [0, 2 / 3, 2], rtol=1e-14)
        np.testing.assert_allclose(m2.breakpoints, [0, 1, 2], rtol=1e-14)

    def test_single_fair(self):
        m = build_model(1, 1.0)
        np.testing.assert_array_equal(m.atoms, [-1, 1])
        np.testing.assert_allclose(m.survival, [1, 0.5], rtol=1e-15)

    @pytest.mark.parametrize("n", [1, 3, 7, 12])
    @pytest.mark.parametrize("sigma2", SIGMA2_GRID)
    def test_matches_exact_convolution(self, n, sigma2):
        atoms, pmf = exact_tn_law(n, sigma2)
        m = build_model(n, sigma2)
        np.testing.assert_allclose(m.atoms, [float(a) for a in atoms], rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(m.pmf, [float(w) for w in pmf], rtol=1e-12)
        np.testing.assert_allclose(m.pmf, [float(w) for w in binomial_pmf_direct(n, sigma2)], rtol=1e-12)
        tails = [float(sum(pmf[s:])) for s in range(n + 1)]
        np.testing.assert_allclose(m.survival, tails, rtol=1e-12)

    @pytest.mark.parametrize("n", range(1, 21))
    @pytest.mark.parametrize("sigma2", SIGMA2_GRID)
    def test_invariants(self, n, sigma2):
        m = build_model(n, sigma2)
        assert math.fsum(m.pmf) == pytest.approx(1.0, abs=1e-12)
        assert m.atoms[0] == -n * sigma2 and m.atoms[-1] == n
        assert m.survival[0] == 1.0
        assert m.nu[0] == 0.0
        s = np.arange(n + 1)
        np.testing.assert_allclose(m.nu, s * m.pmf / m.survival, rtol=1e-12)
        assert m.breakpoints[0] == 0 and m.breakpoints[-1] == n
        assert np.all(np.diff(m.breakpoints) > 0)

    def test_last_breakpoint_formula_hits_n(self):
        # the unused last value of the breakpoint formula lands on n
        for n, s2 in [(3, 0.5), (10, 2.0), (20, 0.1)]:
            m = build_model(n, s2)
            k = n - 1
            r = (m.lam - m.p * m.nu[k]) / (m.q * m.nu[k] + m.lam - k)
            assert r == pytest.approx(n, rel=1e-10)

    def test_large_n_stays_finite(self):
        m = build_model(10**6, 0.5)
        assert np.all(np.isfinite(m.log_pmf))
        assert np.all(np.isfinite(m.nu))
        assert math.fsum(m.pmf) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("n, s2", [(0, 1.0), (-1, 1.0), (2, 0.0), (2, math.inf)])
    def test_rejects(self, n, s2):
        with pytest.raises(DomainError):
            build_model(n, s2)

    def test_degenerate_p(self):
        with pytest.raises(DegenerateError):
            build_model(3, 1e-17)


class TestSurvival:
    @pytest.mark.parametrize("x, expected", [(0.0, 0.75), (2.5, 0.0), (-3.0, 1.0), (-2.0, 1.0), (0.1, 0.25), (2.0, 0.25)])
    def test_step(self, m2, x, expected):
        assert survival_at(m2, x) == expected

    @pytest.mark.parametrize("x, expected", [(1.0, math.sqrt(0.75 * 0.25)), (0.0, 0.75), (2.0, 0.25)])
    def test_interp(self, m2, x, expected):
        assert survival_interp(m2, x) == pytest.approx(expected, rel=1e-14)

    def test_interp_domain(self, m2):
        with pytest.raises(DomainError):
            survival_interp(m2, 2.5)

    def test_interp_agrees_at_atoms(self):
        m = build_model(9, 0.5)
        for a in m.atoms:
            assert survival_interp(m, a) == survival_at(m, a)


class TestClosedForm:
    def test_pinned(self, m2):
        assert g2_closed_form(m2, 1.0) == pytest.approx(2 / 3, abs=1e-15)
        assert g2_closed_form(m2, 2.0) == pytest.approx(0.25, abs=1e-15)

    def test_piece_one_needs_x_in_denominator(self, m2):
        # printed denominator without the factor x gives 1/6 at x = 2, below the tail 0.25
        s, nu, p, q, lam = 1, m2.nu[1], m2.p, m2.q, m2.lam
        base = lam + nu * (s - lam - p)
        literal = (base - q * nu * nu) / (q * 4.0 - 2 * q * nu + base) * m2.survival[1]
        assert literal == pytest.approx(1 / 6)
        assert literal < survival_at(m2, 2.0)
        assert g2_closed_form(m2, 2.0) >= survival_at(m2, 2.0)

    @pytest.mark.parametrize("x", np.linspace(0.02, 0.98, 25))
    def test_single_summand_is_cantelli(self, x):
        m = build_model(1, 1.0)
        assert g2_closed_form(m, x) == pytest.approx(1 / (1 + x * x), abs=1e-12)

    def test_cantelli_at_half(self):
        assert g2_closed_form(build_model(1, 1.0), 0.5) == pytest.approx(0.8, abs=1e-15)

    def test_clamps(self, m2):
        assert g2_closed_form(m2, 0.0) == 1.0
        assert g2_closed_form(m2, -1.0) == 1.0
        assert g2_closed_form(m2, 2.5) == 0.0

    @pytest.mark.parametrize("n", [1, 2, 4, 7])
    @pytest.mark.parametrize("sigma2", [0.25, 1.0, 4.0])
    def test_against_brute_force(self, n, sigma2):
        m = build_model(n, sigma2)
        for x in np.linspace(0, n, 13)[1:]:
            ref = brute_g_beta(m.atoms, m.pmf, x)
            assert g2_closed_form(m, x) == pytest.approx(ref, rel=1e-7)

    @pytest.mark.parametrize("n", [1, 5, 13, 20])
    @pytest.mark.parametrize("sigma2", SIGMA2_GRID)
    def test_properties(self, n, sigma2):
        m = build_model(n, sigma2)
        xs = np.linspace(0, n, 301)
        vals = np.array([g2_closed_form(m, x) for x in xs])
        assert vals[0] == 1.0
        assert vals[-1] == pytest.approx(m.p**n, rel=1e-9)
        assert np.all(np.diff(vals) <= 1e-15)
        tails = np.array([survival_at(m, x) for x in xs])
        assert np.all(vals >= tails - 1e-12)
        oracle = g2_oracle(m.distribution(), xs[1:])
        np.testing.assert_allclose(vals[1:], oracle, rtol=1e-9)

    @pytest.mark.parametrize("n", [2, 6, 15])
    @pytest.mark.parametrize("sigma2", SIGMA2_GRID)
    def test_continuous_at_breakpoints(self, n, sigma2):
        m = build_model(n, sigma2)
        for r in m.breakpoints[1:-1]:
            left = g2_closed_form(m, r * (1 - 1e-13))
            right = g2_closed_form(m, r * (1 + 1e-13))
            assert left == pytest.approx(right, rel=1e-9)

    @pytest.mark.parametrize("n", [3, 10, 20])
    @pytest.mark.parametrize("sigma2", SIGMA2_GRID)
    def test_e2_over_2_at_atoms(self, n, sigma2):
        m = build_model(n, sigma2)
        for s, d in enumerate(m.atoms):
            if d >= 0 and m.survival[s] > 0:
                assert g2_closed_form(m, d) <= math.e**2 / 2 * m.survival[s] * (1 + 1e-9)

    def test_piece_index(self, m2):
        assert piece_index(m2, 0.5) == 0
        assert piece_index(m2, 1.5) == 1
        assert piece_index(m2, 2.0) == 1
