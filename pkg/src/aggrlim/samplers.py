"""Exact variate generators driven by a per-copy :mod:`aggrlim.rng` stream.

Poisson and binomial draws use sequential-search inversion for small means
and Hoermann's transformed rejection with squeeze (PTRS / BTRS) otherwise.
The rejection tests evaluate log-pmf ratios through a Stirling tail so they
keep full precision for counts up to ~1e12, where a naive ``lgamma``
difference would lose most of its digits.
"""

import math

import numpy as np
from numba import njit

from .rng import next_u64, uniform

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SMALL_MEAN = 10.0

# lgamma(k + 1) - [(k + 1/2) log(k + 1) - (k + 1) + log(2 pi)/2]
_FC_TABLE = np.array(
    [math.lgamma(k + 1.0) - ((k + 0.5) * math.log(k + 1.0) - (k + 1.0) + _HALF_LOG_2PI)
     for k in range(10)]
)


@njit(cache=True)
def stirling_tail(k):
    if k <= 9.0:
        return _FC_TABLE[int(k)]
    kp1 = k + 1.0
    kp1sq = kp1 * kp1
    return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / 1260.0 / kp1sq) / kp1sq) / kp1


@njit(cache=True)
def lgamma_step(x, d):
    """lgamma(x + d + 1) - lgamma(x + 1) for integers x >= 0, x + d >= 0."""
    if d == 0.0:
        return 0.0
    return (d * math.log(x + 1.0) + (x + d + 0.5) * math.log1p(d / (x + 1.0)) - d
            + stirling_tail(x + d) - stirling_tail(x))


@njit(cache=True)
def std_normal(st):
    # Box-Muller, cosine branch only
    u1 = 1.0 - uniform(st)
    u2 = uniform(st)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@njit(cache=True)
def _poisson_inversion(st, mu):
    p0 = math.exp(-mu)
    while True:
        u = uniform(st)
        p = p0
        k = 0
        ok = True
        while u > p:
            u -= p
            k += 1
            p *= mu / k
            if p == 0.0:
                ok = False
                break
        if ok:
            return k


@njit(cache=True)
def _poisson_log_pmf(k, mu):
    d = k + 1.0 - mu
    return (d - k * math.log1p(d / mu) - 0.5 * math.log(k + 1.0)
            - _HALF_LOG_2PI - stirling_tail(k))


@njit(cache=True)
def _poisson_ptrs(st, mu):
    slam = math.sqrt(mu)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    log_inv_alpha = math.log(1.1239 + 1.1328 / (b - 3.4))
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = uniform(st) - 0.5
        v = uniform(st)
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mu + 0.43)
        if us >= 0.07 and v <= vr:
            return np.int64(k)
        if k < 0.0 or (us < 0.013 and v > us):
            continue
        if v <= 0.0:
            return np.int64(k)
        lhs = math.log(v) + log_inv_alpha - math.log(a / (us * us) + b)
        if lhs <= _poisson_log_pmf(k, mu):
            return np.int64(k)


@njit(cache=True)
def poisson(st, mu):
    """Poisson(mu) draw, exact for any finite mean."""
    if mu <= 0.0:
        return np.int64(0)
    if mu < _SMALL_MEAN:
        return np.int64(_poisson_inversion(st, mu))
    return _poisson_ptrs(st, mu)


@njit(cache=True)
def _binomial_inversion(st, n, p, q):
    r = p / q
    f0 = math.exp(n * math.log(q))
    while True:
        u = uniform(st)
        f = f0
        k = 0
        ok = True
        while u > f:
            u -= f
            k += 1
            f *= r * (n - k + 1) / k
            if k > n or f == 0.0:
                # leftover rounding mass: redraw
                ok = False
                break
        if ok:
            return np.int64(k)


@njit(cache=True)
def _binomial_btrs(st, n, p, q):
    nf = float(n)
    spq = math.sqrt(nf * p * q)
    b = 1.15 + 2.53 * spq
    a = -0.0873 + 0.0248 * b + 0.01 * p
    c = nf * p + 0.5
    vr = 0.92 - 4.2 / b
    alpha = (2.83 + 5.1 / b) * spq
    lpq = math.log(p) - math.log(q)
    m = math.floor((nf + 1.0) * p)
    while True:
        u = uniform(st) - 0.5
        v = uniform(st)
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + c)
        if k < 0.0 or k > nf:
            continue
        if us >= 0.07 and v <= vr:
            return np.int64(k)
        if v <= 0.0:
            return np.int64(k)
        lhs = math.log(v * alpha / (a / (us * us) + b))
        d = k - m
        rhs = -lgamma_step(m, d) - lgamma_step(nf - m, -d) + d * lpq
        if lhs <= rhs:
            return np.int64(k)


@njit(cache=True)
def _binomial_small_p(st, n, p, q):
    if n * p < _SMALL_MEAN:
        return _binomial_inversion(st, n, p, q)
    return _binomial_btrs(st, n, p, q)


@njit(cache=True)
def binomial(st, n, p, q):
    """Binomial(n, p) draw; ``q`` must equal ``1 - p`` and is passed separately
    so that p close to 1 keeps its precision."""
    if n <= 0 or p <= 0.0:
        return np.int64(0)
    if q <= 0.0:
        return np.int64(n)
    if p <= 0.5:
        return _binomial_small_p(st, n, p, q)
    return np.int64(n) - _binomial_small_p(st, n, q, p)


# thin wrappers so tests can draw whole samples from one stream

@njit(cache=True)
def _fill_poisson(st, mu, out):
    for i in range(out.size):
        out[i] = poisson(st, mu)


@njit(cache=True)
def _fill_binomial(st, n, p, q, out):
    for i in range(out.size):
        out[i] = binomial(st, n, p, q)


@njit(cache=True)
def _fill_normal(st, out):
    for i in range(out.size):
        out[i] = std_normal(st)


def poisson_sample(stream, mu, size):
    out = np.empty(int(size), dtype=np.int64)
    _fill_poisson(stream.state, float(mu), out)
    return out


def binomial_sample(stream, n, p, size, q=None):
    q = 1.0 - p if q is None else q
    out = np.empty(int(size), dtype=np.int64)
    _fill_binomial(stream.state, np.int64(n), float(p), float(q), out)
    return out


def normal_sample(stream, size):
    out = np.empty(int(size), dtype=np.float64)
    _fill_normal(stream.state, out)
    return out


__all__ = ["poisson", "binomial", "std_normal", "uniform", "next_u64",
           "poisson_sample", "binomial_sample", "normal_sample"]
