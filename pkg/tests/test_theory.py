import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aggrlim.mixing import h_tilde, make_mixing_law
from aggrlim.processes import AR, INAR, Ar1Params, Inar1Params
from aggrlim.theory import (EULER_GAMMA, N_FIRST, CovKernel, LimitSpec, QuadratureError,
                            exact_prelimit_cov, harmonic_double_sum, harmonic_number,
                            lag_covariances, lag_weights, levy_tail, limit_cov_matrix,
                            limit_variance_constant, n_FIRST, normalize_regime, stable_cf,
                            stationary_cov, truncated_slope_mean)


def _brute_double_sum(m1, m2):
    k = np.arange(1, m1 + 1)[:, None]
    l = np.arange(1, m2 + 1)[None, :]
    return math.fsum((1.0 / (np.abs(k - l) + 1)).ravel())


def _brute_prelimit(model, m1, m2, params, law):
    cov = [stationary_cov(model, d, params, law) for d in range(max(m1, m2))]
    return math.fsum(cov[abs(k - l)] for k in range(m1) for l in range(m2))


def _ar_I(kmax):
    """I_k = int_0^1 a^k / (1 + a) da by the recurrence, carried in 50 digits."""
    mp.mp.dps = 50
    out = [mp.log(2)]
    for k in range(1, kmax + 1):
        out.append(mp.mpf(1) / k - out[-1])
    return [float(v) for v in out]


def _stable_exponent_mpmath(theta):
    """Exponent per unit psi1 * lam, by two numerical integrals."""
    mp.mp.dps = 30
    th = mp.mpf(theta)
    re = (mp.quad(lambda x: (mp.cos(th * x) - 1) / x ** 2, [0, 1])
          + mp.quadosc(lambda x: mp.cos(th * x) / x ** 2, [1, mp.inf], omega=th) - 1)
    im = (mp.quad(lambda x: (mp.sin(th * x) - th * x) / x ** 2, [0, 1])
          + mp.quadosc(lambda x: mp.sin(th * x) / x ** 2, [1, mp.inf], omega=th))
    return complex(re, im)


class TestLimitConstants:
    @pytest.mark.parametrize("model,regime,scale,expected", [
        (INAR, N_FIRST, 1.0, 4.0), (INAR, n_FIRST, 1.0, 2.0),
        (AR, N_FIRST, 1.0, 2.0), (AR, n_FIRST, 1.0, 1.0), (INAR, N_FIRST, 3.0, 12.0)])
    def test_constants(self, model, regime, scale, expected):
        assert limit_variance_constant(LimitSpec(model, regime, scale, 2.0)) == expected

    def test_regime_spelling(self):
        assert normalize_regime("N-first") == N_FIRST
        assert normalize_regime("n_first") == n_FIRST
        with pytest.raises(ValueError):
            normalize_regime("sideways")

    @pytest.mark.parametrize("kw", [dict(scale=0.0), dict(psi1=-1.0), dict(psi1=math.inf),
                                    dict(model="ARMA")])
    def test_spec_validation(self, kw):
        args = dict(model=INAR, regime=N_FIRST, scale=1.0, psi1=2.0)
        args.update(kw)
        with pytest.raises(ValueError):
            LimitSpec(**args)

    def test_matrix_example(self):
        np.testing.assert_array_equal(limit_cov_matrix((0.5, 1.0), 4.0), [[2, 2], [2, 4]])
        np.testing.assert_array_equal(CovKernel(4.0).matrix((0.5, 1.0)), [[2, 2], [2, 4]])
        assert CovKernel(3.0)(0.2, 0.7) == pytest.approx(0.6)

    def test_zero_time_row(self):
        M = limit_cov_matrix((0.0, 0.3, 2.0), 1.7)
        np.testing.assert_array_equal(M[0], 0.0)
        np.testing.assert_array_equal(M[:, 0], 0.0)

    @given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=12, unique=True),
           st.floats(0.01, 100.0))
    @settings(max_examples=1000)
    def test_positive_definite(self, times, c):
        grid = sorted(times)
        if any(b - a < 1e-6 * b for a, b in zip(grid, grid[1:])):
            return
        M = limit_cov_matrix(grid, c)
        np.testing.assert_array_equal(M, M.T)
        np.linalg.cholesky(M)

    @pytest.mark.parametrize("grid", [(), (1.0, 0.5), (-1.0, 1.0)])
    def test_matrix_rejects_bad_grid(self, grid):
        with pytest.raises(ValueError):
            limit_cov_matrix(grid, 1.0)


class TestStationaryCov:
    def test_examples(self, law, inar, ar):
        assert stationary_cov(INAR, 1, inar, law) == pytest.approx(1.0, rel=1e-10)
        assert stationary_cov(AR, 0, ar, law) == pytest.approx(2 * math.log(2), rel=1e-10)
        assert stationary_cov(AR, 2, ar, law) == pytest.approx(2 * (math.log(2) - 0.5),
                                                               rel=1e-10)

    def test_closed_forms(self, law, inar, ar):
        I = _ar_I(60)
        for k in range(61):
            assert stationary_cov(INAR, k, inar, law) == pytest.approx(2 / (k + 1), rel=1e-8)
            assert stationary_cov(AR, k, ar, law) == pytest.approx(2 * I[k], rel=1e-8)

    def test_divergent_law(self, inar, ar):
        flat = make_mixing_law("constant", 0.0)
        assert stationary_cov(INAR, 0, inar, flat) == math.inf
        assert stationary_cov(AR, 3, ar, flat) == math.inf

    @pytest.mark.parametrize("model", [INAR, AR])
    def test_decreasing_in_lag(self, model, law, inar, ar):
        p = inar if model == INAR else ar
        c = lag_covariances(model, p, law, 1000)
        assert np.all(np.diff(c) < 0) and np.all(c > 0)
        assert c[-1] < 0.01 * c[0]

    @pytest.mark.parametrize("profile,beta", [("constant", 1.0), ("constant", 0.4),
                                              ({"poly": [1.0, 2.0]}, 1.5),
                                              ({"grid": [[0, 1.0], [0.6, 3.0]],
                                                "psi1_raw": 2.0}, 0.8)])
    @pytest.mark.parametrize("model", [INAR, AR])
    def test_vectorized_matches_quadrature(self, model, profile, beta, inar, ar):
        law = make_mixing_law(profile, beta)
        p = inar if model == INAR else ar
        lags = [0, 1, 2, 7, 50, 511, 512, 513, 1500]
        c = lag_covariances(model, p, law, max(lags))
        ref = [stationary_cov(model, k, p, law) for k in lags]
        np.testing.assert_allclose(c[lags], ref, rtol=1e-8)


class TestHarmonic:
    @pytest.mark.parametrize("m", [0, 1, 2, 10, 9999, 10_000, 10_001, 123_456, 10**9, 10**15])
    def test_harmonic_number(self, m):
        mp.mp.dps = 40
        assert harmonic_number(m) == pytest.approx(float(mp.harmonic(m)), rel=2e-15, abs=0)

    def test_euler_gamma(self):
        assert EULER_GAMMA == float(mp.euler)

    def test_examples(self):
        assert harmonic_double_sum(1, 1) == pytest.approx(1.0, rel=1e-15)
        assert harmonic_double_sum(3, 3) == pytest.approx(17 / 3, rel=1e-15)
        m = 10**6
        assert abs(harmonic_double_sum(m, m) / (m * math.log(m)) / 2 - 1) < 0.1

    @given(st.integers(1, 200), st.integers(1, 200))
    @settings(max_examples=300)
    def test_against_brute_force(self, m1, m2):
        ref = _brute_double_sum(m1, m2)
        assert harmonic_double_sum(m1, m2) == pytest.approx(ref, rel=1e-12)
        assert harmonic_double_sum(m1, m2) == harmonic_double_sum(m2, m1)

    def test_across_table_crossover(self):
        for m1, m2 in [(9990, 10_020), (3, 10_001), (10_001, 10_001)]:
            assert harmonic_double_sum(m1, m2) == pytest.approx(_brute_double_sum(m1, m2),
                                                                rel=1e-12)

    @given(st.integers(1, 300), st.integers(1, 300))
    def test_lag_weights_count_pairs(self, m1, m2):
        w = lag_weights(m1, m2)
        k = np.arange(1, m1 + 1)[:, None]
        l = np.arange(1, m2 + 1)[None, :]
        ref = np.bincount(np.abs(k - l).ravel(), minlength=max(m1, m2))
        np.testing.assert_array_equal(w, ref)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            harmonic_double_sum(0, 3)


class TestPrelimitCov:
    def test_examples(self, law, inar):
        assert exact_prelimit_cov(INAR, 1, 1, inar, law) == pytest.approx(2.0, rel=1e-12)
        assert exact_prelimit_cov(INAR, 1, 3, inar, law) == pytest.approx(11 / 3, rel=1e-12)

    def test_log_rate_limit(self, law, inar):
        m = 10**6
        val = exact_prelimit_cov(INAR, m, m, inar, law) / (m * math.log(m))
        assert abs(val / 4.0 - 1) < 0.1

    def test_harmonic_form(self, law):
        for m1, m2 in [(5, 5), (17, 40), (1000, 333)]:
            val = exact_prelimit_cov(INAR, m1, m2, Inar1Params(2.5), law)
            assert val == pytest.approx(2 * 2.5 * harmonic_double_sum(m1, m2), rel=1e-10)

    @pytest.mark.parametrize("model", [INAR, AR])
    @pytest.mark.parametrize("profile,beta", [("constant", 1.0), ({"poly": [1.0, 1.0]}, 0.5)])
    def test_against_brute_force(self, model, profile, beta, inar, ar):
        law = make_mixing_law(profile, beta)
        p = inar if model == INAR else ar
        for m1, m2 in [(1, 1), (7, 3), (40, 100), (100, 100)]:
            ref = _brute_prelimit(model, m1, m2, p, law)
            assert exact_prelimit_cov(model, m1, m2, p, law) == pytest.approx(ref, rel=1e-10)

    def test_divergent(self, inar):
        assert exact_prelimit_cov(INAR, 3, 3, inar, make_mixing_law("constant", -0.5)) == math.inf


class TestLevyTail:
    def test_examples(self):
        assert levy_tail(1.0, 1.0, 2.0) == 2.0
        assert levy_tail(2.0, 1.0, 2.0) == 1.0

    @given(st.floats(1e-6, 1e6), st.floats(1e-3, 1e3))
    def test_homogeneity(self, x, c):
        assert levy_tail(c * x, 1.0, 2.0) == pytest.approx(levy_tail(x, 1.0, 2.0) / c,
                                                           rel=1e-14)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            levy_tail(0.0, 1.0, 2.0)


class TestStableCf:
    @staticmethod
    def _closed_form(theta, lam, psi1):
        # int (cos tx - 1) / x^2 = -pi t / 2 and the truncated sine part is t (1 - gamma - ln t)
        return np.exp(psi1 * lam * (-math.pi * theta / 2
                                    + 1j * theta * (1 - EULER_GAMMA - math.log(theta))))

    def test_zero(self):
        assert stable_cf(0.0, 1.0, 2.0) == 1 + 0j

    def test_conjugate_symmetry(self):
        for th in (0.3, 1.0, 17.0):
            a, b = stable_cf(th, 1.0, 2.0), stable_cf(-th, 1.0, 2.0)
            assert abs(a - b.conjugate()) < 1e-10

    def test_mpmath_route(self):
        ref = np.exp(2.0 * _stable_exponent_mpmath(1.0))
        assert abs(stable_cf(1.0, 1.0, 2.0) - ref) < 1e-6

    @pytest.mark.parametrize("theta", [1e-6, 1e-3, 0.1, 1.0, 2.5, 40.0, 1e3, 1e6])
    def test_closed_form(self, theta):
        assert abs(stable_cf(theta, 1.0, 2.0) - self._closed_form(theta, 1.0, 2.0)) < 1e-6

    @given(st.floats(-1e4, 1e4), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
    @settings(max_examples=60, deadline=None)
    def test_bounded(self, theta, lam, psi1):
        assert abs(stable_cf(theta, lam, psi1)) <= 1 + 1e-12

    def test_out_of_range(self):
        with pytest.raises(QuadratureError):
            stable_cf(2e6, 1.0, 2.0)


class TestTruncatedSlopeMean:
    @pytest.mark.parametrize("N", [10.0, 1e3, 1e6])
    def test_constant_profile_closed_form(self, law, N):
        h = h_tilde(1.0, N)
        ref = 2 * (2 * math.log(1 / h) - (1 - h))
        assert truncated_slope_mean(1.0, N, law) == pytest.approx(ref, rel=1e-9)

    @pytest.mark.parametrize("model", [INAR, AR])
    def test_mpmath(self, model):
        law = make_mixing_law({"poly": [1.0, 1.0]}, 1.0)
        N, lam = 1e4, 1.5
        mp.mp.dps = 30
        if model == INAR:
            y = lambda a: lam * (1 + a) / (1 - a) ** 2  # noqa: E731
            top = 1 - h_tilde(lam, N)
        else:
            y = lambda a: lam / (1 - a) ** 2  # noqa: E731
            top = 1 - math.sqrt(lam / N)
        ref = float(mp.quad(lambda a: y(a) * law.norm_constant * (1 + a) * (1 - a), [0, top]))
        assert truncated_slope_mean(lam, N, law, model=model) == pytest.approx(ref, rel=1e-8)
