"""Stationary random-coefficient AR(1) and INAR(1) paths given alpha.

Both simulators start from the exact stationary law (no burn-in).  The INAR
thinning ``alpha o X`` is one exact binomial draw per step.  All kernels take
``u = 1 - alpha`` so that coefficients close to one keep their precision.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .rng import RngStream
from .samplers import binomial, poisson, std_normal

# stationary INAR means above this abort the path instead of truncating it
MAX_STATIONARY_MEAN = 1e12

MODE_PARTIAL = 0  # record sum_{k=1}^{m} (X_k - E[X_k | alpha])
MODE_LEVEL = 1    # record X_m - E[X_m | alpha]

AR = "AR"
INAR = "INAR"


class PathAbort(RuntimeError):
    """A path could not be simulated without truncating the law."""


@dataclass(frozen=True)
class Ar1Params:
    """Gaussian innovation variance of the AR(1) model."""

    sigma2: float = 1.0

    def __post_init__(self):
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")

    @property
    def model(self):
        return AR

    @property
    def scale(self):
        return float(self.sigma2)


@dataclass(frozen=True)
class Inar1Params:
    """Poisson innovation intensity of the INAR(1) model."""

    lam: float = 1.0

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be positive, got {self.lam}")

    @property
    def model(self):
        return INAR

    @property
    def scale(self):
        return float(self.lam)


@dataclass
class Path:
    alpha: float
    values: np.ndarray


def normalize_model(model):
    m = str(model).upper()
    if m not in (AR, INAR):
        raise ValueError(f"model must be 'AR' or 'INAR', got {model!r}")
    return m


def params_for(model, value):
    """Parameter object for ``model`` with scale ``value`` (sigma2 or lambda)."""
    return Ar1Params(float(value)) if normalize_model(model) == AR else Inar1Params(float(value))


def _check_params(model, params):
    model = normalize_model(model)
    expected = Ar1Params if model == AR else Inar1Params
    if not isinstance(params, expected):
        raise ValueError(f"{model} model needs {expected.__name__}, got {type(params).__name__}")
    return model


def _check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    return alpha


# -- kernels ----------------------------------------------------------------

@njit(cache=True)
def ar1_path_kernel(st, u, sigma, out):
    alpha = 1.0 - u
    x = sigma / math.sqrt(u * (2.0 - u)) * std_normal(st)
    out[0] = x
    for k in range(1, out.size):
        x = alpha * x + sigma * std_normal(st)
        out[k] = x


@njit(cache=True)
def inar1_path_kernel(st, u, lam, out):
    mean = lam / u
    if mean > MAX_STATIONARY_MEAN:
        return False
    alpha = 1.0 - u
    x = poisson(st, mean)
    out[0] = x
    for k in range(1, out.size):
        x = binomial(st, x, alpha, u) + poisson(st, lam)
        out[k] = x
    return True


@njit(cache=True)
def ar1_record(st, u, sigma, steps, mode, out):
    """Fill ``out[g]`` with the partial sum (or level) at step ``steps[g]``.

    ``steps`` must be sorted ascending.
    """
    alpha = 1.0 - u
    x = sigma / math.sqrt(u * (2.0 - u)) * std_normal(st)
    g = 0
    G = steps.size
    while g < G and steps[g] == 0:
        out[g] = x if mode == MODE_LEVEL else 0.0
        g += 1
    acc = 0.0
    k = 0
    while g < G:
        k += 1
        x = alpha * x + sigma * std_normal(st)
        acc += x
        while g < G and steps[g] == k:
            out[g] = x if mode == MODE_LEVEL else acc
            g += 1
    return True


@njit(cache=True)
def inar1_record(st, u, lam, steps, mode, out):
    mean = lam / u
    if mean > MAX_STATIONARY_MEAN:
        return False
    alpha = 1.0 - u
    x = poisson(st, mean)
    g = 0
    G = steps.size
    while g < G and steps[g] == 0:
        out[g] = x - mean if mode == MODE_LEVEL else 0.0
        g += 1
    total = np.int64(0)
    k = 0
    while g < G:
        k += 1
        x = binomial(st, x, alpha, u) + poisson(st, lam)
        total += x
        while g < G and steps[g] == k:
            if mode == MODE_LEVEL:
                out[g] = x - mean
            else:
                out[g] = float(total) - k * mean
            g += 1
    return True


# -- public API -----------------------------------------------------------------

def _stream(stream):
    return stream if stream is not None else RngStream(0)


def simulate_ar1_path(alpha, params, n, stream=None):
    """Stationary AR(1) path X_0..X_n with coefficient ``alpha``."""
    alpha = _check_alpha(alpha)
    _check_params(AR, params)
    if n < 1:
        raise ValueError("n must be a positive integer")
    out = np.empty(int(n) + 1, dtype=np.float64)
    ar1_path_kernel(_stream(stream).state, 1.0 - alpha, math.sqrt(params.sigma2), out)
    return Path(alpha, out)


def simulate_inar1_path(alpha, params, n, stream=None):
    """Stationary INAR(1) path with Poisson(lam) innovations and binomial thinning.

    Raises
    ------
    PathAbort
        If the stationary mean ``lam / (1 - alpha)`` exceeds ``MAX_STATIONARY_MEAN``.
    """
    alpha = _check_alpha(alpha)
    _check_params(INAR, params)
    if n < 1:
        raise ValueError("n must be a positive integer")
    out = np.empty(int(n) + 1, dtype=np.int64)
    ok = inar1_path_kernel(_stream(stream).state, 1.0 - alpha, params.lam, out)
    if not ok:
        raise PathAbort(f"stationary mean {params.lam / (1.0 - alpha):.3e} exceeds "
                        f"{MAX_STATIONARY_MEAN:.0e}")
    return Path(alpha, out)


def conditional_mean_inar(alpha, params):
    """E(X_k | alpha) = lam / (1 - alpha)."""
    alpha = _check_alpha(alpha)
    return params.lam / (1.0 - alpha)


def _stationary_variance(model, alpha, params):
    u = 1.0 - alpha
    if model == INAR:
        return params.lam / u
    return params.sigma2 / (u * (1.0 + alpha))


def exact_conditional_cov(model, alpha, params, k):
    """Cov(X_0, X_k | alpha) of the stationary process."""
    model = _check_params(model, params)
    alpha = _check_alpha(alpha)
    if k < 0:
        raise ValueError("lag must be nonnegative")
    return alpha ** int(k) * _stationary_variance(model, alpha, params)


def exact_conditional_partial_sum_variance(model, alpha, params, m):
    """Var(sum_{k=1}^m (X_k - E[X_k | alpha]) | alpha), closed form.

    ``v * [m (1 + a) / (1 - a) - 2 a (1 - a**m) / (1 - a)**2]`` with ``v`` the
    stationary variance.
    """
    model = _check_params(model, params)
    alpha = _check_alpha(alpha)
    m = int(m)
    if m < 1:
        raise ValueError("m must be a positive integer")
    u = 1.0 - alpha
    v = _stationary_variance(model, alpha, params)
    one_minus_pow = -math.expm1(m * math.log(alpha)) if alpha > 0 else 1.0
    return v * (m * (1.0 + alpha) / u - 2.0 * alpha * one_minus_pow / (u * u))


def long_run_variance(model, alpha, params):
    """lim_m Var(partial sum) / m: lam (1+a)/(1-a)**2 or sigma2/(1-a)**2."""
    model = _check_params(model, params)
    alpha = _check_alpha(alpha)
    u = 1.0 - alpha
    if model == INAR:
        return params.lam * (1.0 + alpha) / (u * u)
    return params.sigma2 / (u * u)
