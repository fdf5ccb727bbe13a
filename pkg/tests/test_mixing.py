import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from aggrlim.mixing import (PsiProfile, alpha_from_uniform, h_tilde, law_from_config,
                            make_mixing_law, mixed_moment, moment_diverges, sample_alpha,
                            sample_one_minus_alpha, scaled_tail)
from aggrlim.rng import RngStream
from aggrlim.stats import mom_estimate

LAWS = [
    ("constant", 1.0),
    ("constant", 0.0),
    ("constant", -0.5),
    ("constant", 2.5),
    ({"poly": [1.0, 1.0]}, 1.0),
    ({"poly": [2.0, -1.0, 0.5]}, 0.3),
    ({"grid": [[0.0, 1.0], [0.3, 4.0], [0.8, 0.5]], "psi1_raw": 2.0}, 1.0),
]


def _mp_integral(law, f):
    """Reference integral of f(x) * density(x) over [0, 1] with mpmath."""
    mp.mp.dps = 30
    prof = law.psi_profile
    c = law.norm_constant
    pts = [0.0] + list(prof.breakpoints) + [1.0]

    def g(x):
        return c * float(prof(float(x))) * f(x) * (1 - x) ** law.beta

    return float(mp.quad(g, pts))


class TestConstruction:
    def test_constant_beta_one(self):
        law = make_mixing_law("constant", 1.0)
        assert law.psi1 == pytest.approx(2.0, rel=1e-14)
        x = np.linspace(0, 0.99, 7)
        np.testing.assert_allclose(law.density(x), 2 * (1 - x), rtol=1e-14)

    def test_constant_beta_zero_is_uniform(self):
        law = make_mixing_law("constant", 0.0)
        assert law.psi1 == pytest.approx(1.0)
        np.testing.assert_allclose(law.density(np.array([0.0, 0.5, 0.9])), 1.0)

    def test_poly_profile(self):
        law = make_mixing_law({"poly": [1.0, 1.0]}, 1.0)
        assert law.norm_constant == pytest.approx(1.5, rel=1e-14)
        assert law.psi1 == pytest.approx(3.0, rel=1e-14)

    @pytest.mark.parametrize("beta", [-0.5, 0.0, 0.5, 1.0, 1.5, 2.0])
    def test_constant_psi1_is_beta_plus_one(self, beta):
        assert make_mixing_law("constant", beta).psi1 == pytest.approx(beta + 1.0, rel=1e-14)

    @pytest.mark.parametrize("profile,beta", LAWS)
    def test_normalization(self, profile, beta):
        law = law_from_config({"profile": profile, "beta": beta})
        np.testing.assert_allclose(_mp_integral(law, lambda x: 1), 1.0, atol=1e-10)
        assert law.tail_prob(1.0) == pytest.approx(1.0, abs=1e-10)

    def test_grid_psi1_uses_normalized_limit(self):
        law = make_mixing_law({"grid": [[0.0, 1.0], [0.5, 3.0]], "psi1_raw": 2.0}, 1.0)
        assert law.psi1 == pytest.approx(2.0 * law.norm_constant)

    @pytest.mark.parametrize("profile,beta,match", [
        ("constant", -1.0, "beta"),
        ("constant", -3.0, "beta"),
        ({"poly": [1.0, -2.0]}, 1.0, "negative"),
        ({"poly": [1.0, -1.0]}, 1.0, "limit"),
        ({"grid": [[0.0, 1.0]], "psi1_raw": 0.0}, 1.0, "limit"),
        ({"grid": [[0.1, 1.0]], "psi1_raw": 1.0}, 1.0, "x = 0"),
        ({"grid": [[0.0, 1.0], [0.0, 2.0]], "psi1_raw": 1.0}, 1.0, "increasing"),
        ({"grid": [[0.0, 1.0]]}, 1.0, "psi1_raw"),
        ("cubic", 1.0, "unrecognized"),
    ])
    def test_rejects_invalid(self, profile, beta, match):
        with pytest.raises(ValueError, match=match):
            make_mixing_law(profile, beta)


class TestSampling:
    def test_inverse_cdf_examples(self):
        law = make_mixing_law("constant", 1.0)
        assert alpha_from_uniform(law, 0.75) == pytest.approx(0.5, abs=1e-15)
        assert alpha_from_uniform(law, 0.0) == 0.0

    @given(u=st.floats(min_value=1e-9, max_value=1 - 1e-9),
           beta=st.sampled_from([-0.5, 0.0, 0.5, 1.0, 1.5, 2.0]))
    @settings(max_examples=200, deadline=None)
    def test_inverse_cdf_roundtrip(self, u, beta):
        law = make_mixing_law("constant", beta)
        assert law.cdf(alpha_from_uniform(law, u)) == pytest.approx(u, abs=1e-12)

    def test_constant_law_ks(self):
        law = make_mixing_law("constant", 1.0)
        a = sample_alpha(law, RngStream(3, domain=7), 10**6)
        assert a.min() >= 0.0 and a.max() < 1.0
        D = stats.kstest(a, lambda x: 1 - (1 - x) ** 2).statistic
        assert D < 0.002

    def test_rejection_sampler_poly(self):
        # density 1.5 (1 - x^2), cdf 1.5 (x - x^3 / 3)
        law = make_mixing_law({"poly": [1.0, 1.0]}, 1.0)
        a = sample_alpha(law, RngStream(4, domain=7), 200_000)
        assert stats.kstest(a, lambda x: 1.5 * (x - x ** 3 / 3)).pvalue > 1e-3

    def test_rejection_sampler_grid(self):
        law = make_mixing_law({"grid": [[0.0, 1.0], [0.5, 3.0]], "psi1_raw": 2.0}, 0.5)
        a = sample_alpha(law, RngStream(5, domain=7), 20_000)
        grid = np.linspace(0.05, 0.95, 10)
        emp = np.array([np.mean(a <= g) for g in grid])
        ref = np.array([law.cdf(g) for g in grid])
        np.testing.assert_allclose(emp, ref, atol=5 * math.sqrt(0.25 / a.size))

    def test_one_minus_alpha_resolves_small_values(self):
        law = make_mixing_law("constant", 1.0)
        u = sample_one_minus_alpha(law, RngStream(6), 10**6)
        assert u.min() > 0.0
        assert u.min() < 1e-2


class TestMixedMoment:
    def test_examples(self, law):
        assert mixed_moment(law, 0, 1, 0) == pytest.approx(2.0, rel=1e-10)
        assert mixed_moment(law, 3, 1, 0) == pytest.approx(0.5, rel=1e-10)
        assert mixed_moment(law, 0, 2, 0) == math.inf

    def test_one_over_one_plus_alpha(self, law):
        # 2 * int (1 - a) / (1 + a) da = 2 (2 ln 2 - 1)
        ref = 2 * (2 * math.log(2) - 1)
        assert mixed_moment(law, 0, 0, 1) == pytest.approx(ref, rel=1e-10)
        assert ref == pytest.approx(0.7725887, abs=1e-7)

    @pytest.mark.parametrize("profile,beta", LAWS)
    @pytest.mark.parametrize("k,p,q", [(0, 0, 0), (2, 0, 1), (5, 1, 0), (1, 1, 1), (30, 0, 2)])
    def test_against_mpmath(self, profile, beta, k, p, q):
        law = law_from_config({"profile": profile, "beta": beta})
        if moment_diverges(law, p):
            assert mixed_moment(law, k, p, q) == math.inf
            return
        ref = _mp_integral(law, lambda x: x ** k * (1 - x) ** (-p) * (1 + x) ** (-q))
        assert mixed_moment(law, k, p, q) == pytest.approx(ref, rel=1e-8)

    @pytest.mark.parametrize("k", [100, 10**4, 10**6])
    def test_large_k_closed_form(self, law, k):
        assert mixed_moment(law, k, 1, 0) == pytest.approx(2.0 / (k + 1), rel=1e-8)

    @pytest.mark.parametrize("beta", [-0.5, 0.0, 0.5, 1.0, 1.5, 2.0])
    @pytest.mark.parametrize("p", [0, 1, 2, 3])
    def test_divergence_criterion(self, beta, p):
        law = make_mixing_law("constant", beta)
        val = mixed_moment(law, 0, p, 0)
        if p >= beta + 1:
            assert val == math.inf
        else:
            # E (1 - a)^{-p} = (beta + 1) / (beta + 1 - p)
            assert val == pytest.approx((beta + 1) / (beta + 1 - p), rel=1e-8)

    def test_negative_orders_rejected(self, law):
        with pytest.raises(ValueError):
            mixed_moment(law, -1, 0, 0)

    @pytest.mark.parametrize("k", [0, 1, 5])
    def test_monte_carlo_cross_check(self, law, k):
        u = sample_one_minus_alpha(law, RngStream(8 + k, domain=7), 10**6)
        rep = mom_estimate((1 - u) ** k / u, 100)
        ref = mixed_moment(law, k, 1, 0)
        assert abs(rep.estimate - ref) <= 3 * rep.half_width


class TestTail:
    def test_h_tilde_examples(self):
        assert h_tilde(1.0, 1.0) == pytest.approx(1.0, abs=1e-15)
        u = h_tilde(1.0, 4.0)
        assert u == pytest.approx(0.5930703, abs=1e-7)
        assert (2 - u) / u ** 2 == pytest.approx(4.0, abs=1e-10)
        assert h_tilde(1.0, 10.0) < h_tilde(1.0, 4.0)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 5.0])
    def test_inversion_identity(self, lam):
        for x in np.logspace(-2, 6, 33):
            u = h_tilde(lam, x)
            assert lam * (2 - u) / u ** 2 == pytest.approx(x, rel=1e-10)

    @given(lam=st.floats(0.01, 100.0), x1=st.floats(1e-3, 1e8), x2=st.floats(1e-3, 1e8))
    def test_h_tilde_decreasing(self, lam, x1, x2):
        if x1 < x2:
            assert h_tilde(lam, x1) >= h_tilde(lam, x2)

    @pytest.mark.parametrize("bad", [(0.0, 1.0), (1.0, 0.0), (-1.0, 2.0)])
    def test_h_tilde_rejects_nonpositive(self, bad):
        with pytest.raises(ValueError):
            h_tilde(*bad)

    @pytest.mark.parametrize("N,x", [(1, 3.0), (10, 1.0), (1000, 0.5), (10**6, 2.0)])
    def test_scaled_tail_closed_form(self, N, x):
        law = make_mixing_law("constant", 1.0)
        h = h_tilde(1.0, N * x)
        assert scaled_tail(law, 1.0, N, x) == pytest.approx(N * h ** 2, rel=1e-9)

    @pytest.mark.parametrize("x", [0.5, 1.0, 2.0, 10.0])
    def test_scaled_tail_limit(self, x):
        law = make_mixing_law("constant", 1.0)
        val = scaled_tail(law, 1.0, 10**8, x)
        assert abs(val / (2.0 / x) - 1) < 1e-3

    def test_scaled_tail_vanishes(self):
        law = make_mixing_law("constant", 1.0)
        vals = [scaled_tail(law, 1.0, 100, x) for x in (1.0, 1e3, 1e6, 1e9)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-6

    def test_scaled_tail_small_threshold_is_N(self):
        # threshold below the smallest value of lam (1 + a) / (1 - a)^2 means every copy exceeds
        law = make_mixing_law("constant", 1.0)
        assert scaled_tail(law, 1.0, 10, 0.01) == pytest.approx(10.0, rel=1e-12)
