"""Reference values for the aggregation limits.

Exact finite-size covariances (by lag counting against the mixed stationary
covariance), the harmonic double sum, the limit variance constants of the
four iterated limits, the limiting Levy tail and the characteristic function
of the infinitely divisible law that appears in the n-first argument.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .mixing import (PROFILE_CONSTANT, PROFILE_POLY, _density_integral, h_tilde,
                     mixed_moment)
from .processes import AR, INAR, _check_params, normalize_model

N_FIRST = "N_first"
n_FIRST = "n_first"

EULER_GAMMA = 0.57721566490153286061

# H(m) by direct summation up to here, asymptotic series beyond
HARMONIC_CROSSOVER = 10_000
STABLE_CF_MAX_THETA = 1e6


class QuadratureError(RuntimeError):
    """Numerical integration could not reach its tolerance."""


def normalize_regime(regime):
    """Accept ``N_first`` / ``n_first`` (``-`` or ``_``); case distinguishes N from n."""
    r = str(regime).replace("-", "_")
    if r in (N_FIRST, n_FIRST):
        return r
    raise ValueError(f"regime must be {N_FIRST!r} or {n_FIRST!r}, got {regime!r}")


@dataclass(frozen=True)
class LimitSpec:
    """Model, order of limits and the constants entering the limit variance.

    ``scale`` is lambda for INAR and sigma2 for AR.
    """

    model: str
    regime: str
    scale: float
    psi1: float

    def __post_init__(self):
        object.__setattr__(self, "model", normalize_model(self.model))
        object.__setattr__(self, "regime", normalize_regime(self.regime))
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError("scale (lambda or sigma2) must be positive")
        if not (self.psi1 > 0 and math.isfinite(self.psi1)):
            raise ValueError("psi1 must be positive and finite")


def limit_variance_constant(spec):
    """Variance of the Brownian limit at t = 1.

    ====== ========= =========
    model  N first   n first
    ====== ========= =========
    INAR   2 lam psi1  lam psi1
    AR     s2 psi1    s2 psi1 / 2
    ====== ========= =========
    """
    base = spec.scale * spec.psi1
    if spec.model == INAR:
        return 2.0 * base if spec.regime == N_FIRST else base
    return base if spec.regime == N_FIRST else 0.5 * base


@dataclass(frozen=True)
class CovKernel:
    """Brownian covariance ``c * min(t1, t2)``."""

    c: float

    def __call__(self, t1, t2):
        return self.c * np.minimum(t1, t2)

    def matrix(self, grid):
        return limit_cov_matrix(grid, self.c)


def limit_cov_matrix(grid, c):
    """Matrix of ``c * min(t_i, t_j)`` over an increasing nonnegative grid."""
    t = np.asarray([float(x) for x in grid], dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("grid must be a nonempty 1-d sequence")
    if np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise ValueError("grid must be strictly increasing and nonnegative")
    if not c > 0:
        raise ValueError("c must be positive")
    return c * np.minimum.outer(t, t)


# -- stationary covariances -------------------------------------------------------

def _scale(model, params):
    return params.lam if model == INAR else params.sigma2


def stationary_cov(model, k, params, mixing):
    """Covariance at lag ``k`` of the cross-sectional Gaussian limit.

    INAR: ``lam E[alpha**k / (1 - alpha)]``; AR: ``sigma2 E[alpha**k / (1 - alpha**2)]``.
    Returns ``math.inf`` when the moment diverges (``beta <= 0``).
    """
    model = _check_params(model, params)
    k = int(k)
    if k < 0:
        raise ValueError("lag must be nonnegative")
    q = 0 if model == INAR else 1
    val = mixed_moment(mixing, k, p=1, q=q)
    return _scale(model, params) * val


def _poly_pieces(law):
    """psi (normalized) as pieces ``(x0, x1, coefs)`` with coefs in increasing degree."""
    prof = law.psi_profile
    c = law.norm_constant
    if prof.kind == PROFILE_CONSTANT:
        return [(0.0, 1.0, (c,))]
    if prof.kind == PROFILE_POLY:
        return [(0.0, 1.0, tuple(c * a for a in prof.coefs))]
    pieces = []
    xs, ys = prof.grid_x, prof.grid_y
    for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:]):
        slope = (y1 - y0) / (x1 - x0)
        pieces.append((x0, x1, (c * (y0 - slope * x0), c * slope)))
    return pieces


def power_moments(law, ks, p):
    """E[alpha**k (1 - alpha)**(-p)] for an array of k, via (incomplete) beta functions.

    Every supported profile is piecewise polynomial, so each term is a beta
    integral over a subinterval.  ``p`` must satisfy ``p < beta + 1``.
    """
    ks = np.asarray(ks, dtype=float)
    b = law.beta - p + 1.0
    if b <= 0:
        return np.full(ks.shape, np.inf)
    out = np.zeros(ks.shape)
    for x0, x1, coefs in _poly_pieces(law):
        for i, ci in enumerate(coefs):
            if ci == 0.0:
                continue
            a = ks + i + 1.0
            full = np.exp(special.betaln(a, b))
            if x0 == 0.0 and x1 == 1.0:
                frac = 1.0
            elif x1 == 1.0:
                frac = special.betaincc(a, b, x0)
            else:
                frac = special.betainc(a, b, x1) - (special.betainc(a, b, x0) if x0 > 0 else 0.0)
            out += ci * full * frac
    return out


_ANCHOR_EVERY = 512


def _one_plus_moments(law, K):
    """E[alpha**k / (1 - alpha**2)] for k = 0..K.

    Uses 1/(1 - a**2) = (1/(1 - a) + 1/(1 + a)) / 2.  The 1/(1 + a) part obeys
    J_{k+1} = E[a**k] - J_k and is re-anchored by quadrature every
    ``_ANCHOR_EVERY`` lags to keep rounding from accumulating.
    """
    ks = np.arange(K + 1)
    A = power_moments(law, ks, 1)
    M = power_moments(law, ks, 0)
    J = np.empty(K + 1)
    for k in range(K + 1):
        if k % _ANCHOR_EVERY == 0:
            J[k] = mixed_moment(law, k, p=0, q=1)
        else:
            J[k] = M[k - 1] - J[k - 1]
    return 0.5 * (A + J)


def _constant_beta1_ar(K):
    # E[a**k / (1 - a**2)] = 2 I_k with I_0 = ln 2, I_k = 1/k - I_{k-1}
    out = np.empty(K + 1)
    I = math.log(2.0)
    out[0] = I
    for k in range(1, K + 1):
        I = 1.0 / k - I
        out[k] = I
    return 2.0 * out


def lag_covariances(model, params, mixing, max_lag):
    """``stationary_cov(model, d, ...)`` for d = 0..max_lag in one vectorized pass."""
    model = _check_params(model, params)
    K = int(max_lag)
    if K < 0:
        raise ValueError("max_lag must be nonnegative")
    if mixing.beta <= 0:
        return np.full(K + 1, np.inf)
    if model == INAR:
        return params.lam * power_moments(mixing, np.arange(K + 1), 1)
    if mixing.psi_profile.kind == PROFILE_CONSTANT and mixing.beta == 1.0:
        return params.sigma2 * _constant_beta1_ar(K)
    return params.sigma2 * _one_plus_moments(mixing, K)


# -- harmonic sums ----------------------------------------------------------------

def _harmonic_table(m):
    # compensated running sum keeps every entry within an ulp or two
    table = np.empty(m + 1)
    table[0] = 0.0
    s = 0.0
    comp = 0.0
    for k in range(1, m + 1):
        y = 1.0 / k - comp
        t = s + y
        comp = (t - s) - y
        s = t
        table[k] = s
    return table


_H_TABLE = _harmonic_table(HARMONIC_CROSSOVER)


def harmonic_number(m):
    """H(m) = sum_{k<=m} 1/k.

    Table lookup up to ``HARMONIC_CROSSOVER``; beyond it
    ``ln m + gamma + 1/(2m) - 1/(12 m^2) + 1/(120 m^4)``, whose truncation
    error there is below 1e-26.
    """
    m = int(m)
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m <= HARMONIC_CROSSOVER:
        return float(_H_TABLE[m])
    inv = 1.0 / m
    inv2 = inv * inv
    return math.log(m) + EULER_GAMMA + 0.5 * inv - inv2 / 12.0 + inv2 * inv2 / 120.0


def harmonic_double_sum(m1, m2):
    """sum_{k<=m1} sum_{l<=m2} 1 / (|k - l| + 1) through harmonic numbers.

    With a = min(m1, m2), b = max(m1, m2)::

        (a + 1)(H(a) - 1) + 2 - a + a (H(b) - 1) + (b - a + 1)(H(b) - H(b - a + 1))
    """
    m1, m2 = int(m1), int(m2)
    if m1 < 1 or m2 < 1:
        raise ValueError("m1 and m2 must be positive integers")
    a, b = min(m1, m2), max(m1, m2)
    Ha = harmonic_number(a)
    Hb = harmonic_number(b)
    return ((a + 1) * (Ha - 1.0) + 2.0 - a + a * (Hb - 1.0)
            + (b - a + 1) * (Hb - harmonic_number(b - a + 1)))


def lag_weights(m1, m2):
    """w(d) = #{(k, l) : 1 <= k <= m1, 1 <= l <= m2, |k - l| = d} for d = 0..max-1."""
    m1, m2 = int(m1), int(m2)
    if m1 < 1 or m2 < 1:
        raise ValueError("m1 and m2 must be positive integers")
    a, b = min(m1, m2), max(m1, m2)
    d = np.arange(b, dtype=np.int64)
    w = np.maximum(0, np.minimum(a, b - d)) + np.maximum(0, a - d)
    w[0] = a
    return w


def exact_prelimit_cov(model, m1, m2, params, mixing):
    """Cov(sum_{k<=m1} Y_k, sum_{l<=m2} Y_l) for the cross-sectional Gaussian limit Y.

    Computed as sum_d w(d) cov(d) in O(max(m1, m2)).
    """
    model = _check_params(model, params)
    w = lag_weights(m1, m2)
    cov = lag_covariances(model, params, mixing, w.size - 1)
    if not np.all(np.isfinite(cov)):
        return math.inf
    return math.fsum(w.astype(float) * cov)


# -- Levy tail, stable characteristic function, truncated slope mean ----------------

def levy_tail(x, lam, psi1):
    """nu([x, inf)) = psi1 lam / x."""
    if not x > 0:
        raise ValueError("x must be positive")
    return psi1 * lam / x


def _quad(f, a, b, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-10, limit=500, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(str(exc).splitlines()[0]) from exc
    return val


def _exponent_unit_rate(theta):
    """int_0^inf (e^{i theta x} - 1 - i theta x 1{x<=1}) x^{-2} dx for theta > 0."""
    # near zero: plain quadrature with a cancellation-free integrand
    x0 = min(1.0, 1.0 / theta)

    def re_small(x):
        h = 0.5 * theta * x
        return -0.5 * theta * theta * (math.sin(h) / h) ** 2 if h > 0 else -0.5 * theta * theta

    def im_small(x):
        z = theta * x
        if z < 1e-2:
            z2 = z * z
            # (sin z - z) / x^2 = -theta^2 z (1/6 - z^2/120 + z^4/5040)
            return -theta * theta * z * (1.0 / 6.0 - z2 / 120.0 + z2 * z2 / 5040.0)
        return (math.sin(z) - z) / (x * x)

    re = _quad(re_small, 0.0, x0)
    im = _quad(im_small, 0.0, x0)
    inv_sq = lambda x: 1.0 / (x * x)  # noqa: E731
    if x0 < 1.0:
        # oscillatory middle range (QAWO), with the non-oscillatory parts in closed form
        re += _quad(inv_sq, x0, 1.0, weight="cos", wvar=theta) - (1.0 / x0 - 1.0)
        im += _quad(inv_sq, x0, 1.0, weight="sin", wvar=theta) - theta * math.log(1.0 / x0)
    # Fourier tails on [1, inf) (QAWF)
    if theta >= 1.0:
        re += _quad(inv_sq, 1.0, np.inf, weight="cos", wvar=theta) - 1.0
        im += _quad(inv_sq, 1.0, np.inf, weight="sin", wvar=theta)
        return complex(re, im)
    # QAWF is unreliable at low frequency: substitute y = theta x, so the tail is
    # theta * int_theta^inf (cos y, sin y) / y^2 dy with unit frequency beyond y = 1
    def cos_mid(y):
        h = 0.5 * y
        return -0.5 * (math.sin(h) / h) ** 2

    def sin_mid(y):
        if y < 1e-2:
            y2 = y * y
            return -y * (1.0 / 6.0 - y2 / 120.0 + y2 * y2 / 5040.0)
        return (math.sin(y) - y) / (y * y)

    c_tail = (_quad(cos_mid, theta, 1.0) + (1.0 / theta - 1.0)
              + _quad(inv_sq, 1.0, np.inf, weight="cos", wvar=1.0))
    s_tail = (_quad(sin_mid, theta, 1.0) - math.log(theta)
              + _quad(inv_sq, 1.0, np.inf, weight="sin", wvar=1.0))
    re += theta * c_tail - 1.0
    im += theta * s_tail
    return complex(re, im)


def stable_cf(theta, lam, psi1):
    """Characteristic function of the infinitely divisible law with Levy measure
    nu(dx) = psi1 lam x^{-2} dx on (0, inf) and truncation at 1.

    Raises
    ------
    QuadratureError
        For ``|theta| > STABLE_CF_MAX_THETA`` or if a quadrature fails.
    """
    theta = float(theta)
    if abs(theta) > STABLE_CF_MAX_THETA:
        raise QuadratureError(f"|theta| = {abs(theta):.3g} is outside the supported range "
                              f"(<= {STABLE_CF_MAX_THETA:.0e})")
    if theta == 0.0:
        return complex(1.0, 0.0)
    z = psi1 * lam * _exponent_unit_rate(abs(theta))
    val = complex(math.exp(z.real) * math.cos(z.imag), math.exp(z.real) * math.sin(z.imag))
    return val if theta > 0 else val.conjugate()


def truncated_slope_mean(lam, N, mixing, model=INAR):
    """E[Y; Y <= N] for the slope summand Y = lam (1 + alpha) / (1 - alpha)**2.

    ``N`` times the truncated mean of Y / N is the centering under which the
    scaled slope sum converges to the law of :func:`stable_cf`.  For the AR
    summand ``lam / (1 - alpha)**2`` pass ``model="AR"`` (``lam`` = sigma2).
    """
    model = normalize_model(model)
    if model == INAR:
        h = min(h_tilde(lam, N), 1.0)
        f = lambda x: lam * (1.0 + x)  # noqa: E731
    else:
        h = min(math.sqrt(lam / N), 1.0)
        f = lambda x: lam  # noqa: E731
    if h >= 1.0:
        return 0.0
    if mixing.psi_profile.kind == PROFILE_CONSTANT and mixing.beta == 1.0:
        # u = 1 - alpha has density 2u
        if model == INAR:
            return 2.0 * lam * (2.0 * math.log(1.0 / h) - (1.0 - h))
        return 2.0 * lam * math.log(1.0 / h)
    return _density_integral(mixing, f, 0.0, 1.0 - h, mixing.beta - 2.0)


__all__ = ["N_FIRST", "n_FIRST", "LimitSpec", "CovKernel", "QuadratureError",
           "limit_variance_constant", "limit_cov_matrix", "stationary_cov",
           "power_moments", "lag_covariances", "harmonic_number", "harmonic_double_sum",
           "lag_weights", "exact_prelimit_cov", "levy_tail", "stable_cf",
           "truncated_slope_mean", "normalize_regime"]
