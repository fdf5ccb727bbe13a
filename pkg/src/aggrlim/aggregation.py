"""Contemporaneous and temporal aggregation of N independent copies.

Copy ``j`` of replicate ``r`` draws its coefficient and its whole path from
the stream ``(seed, r, j)``.  Copies are summed in fixed chunks of
``CHUNK`` consecutive indices with Neumaier compensation, and chunk totals
are combined in index order, so a panel is a pure function of
``(spec, replicate)`` whatever the thread count.  Paths are consumed as they
are generated; nothing of size N x n is ever stored.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit, prange

from .mixing import MixingLaw, draw_one_minus_alpha, make_mixing_law, moment_diverges
from .processes import (AR, INAR, MODE_LEVEL, MODE_PARTIAL, MAX_STATIONARY_MEAN,
                        PathAbort, _check_params, ar1_record, inar1_record,
                        normalize_model)
from .rng import DOMAIN_PANEL, DOMAIN_SIMPLE, DOMAIN_SLOPE, STATE_SIZE, init_state

CHUNK = 256


def as_time(t):
    """Exact rational time point; floats go through their shortest repr."""
    if isinstance(t, Fraction):
        return t
    if isinstance(t, (int, np.integer)):
        return Fraction(int(t))
    if isinstance(t, str):
        return Fraction(t)
    return Fraction(repr(float(t)))


def steps_for(grid, n):
    """floor(n t) for each t, in exact integer arithmetic."""
    return tuple(math.floor(n * t) for t in grid)


@dataclass(frozen=True)
class PanelSpec:
    """One aggregation experiment: N copies observed up to floor(n t) for t in grid."""

    N: int
    n: int
    grid: tuple
    model: str
    params: object
    mixing: MixingLaw = field(default_factory=lambda: make_mixing_law("constant", 1.0))
    seed: int = 0
    alphas: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "model", _check_params(self.model, self.params))
        object.__setattr__(self, "grid", tuple(as_time(t) for t in self.grid))
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not self.grid:
            raise ValueError("grid must be nonempty")
        if self.grid[0] < 0 or any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing and nonnegative")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.alphas is not None:
            alphas = tuple(float(a) for a in self.alphas)
            if len(alphas) < self.N:
                raise ValueError("need one fixed alpha per copy")
            if any(not 0.0 <= a < 1.0 for a in alphas):
                raise ValueError("fixed alphas must lie in [0, 1)")
            object.__setattr__(self, "alphas", alphas)

    @classmethod
    def from_steps(cls, N, n, steps, **kw):
        """Spec whose grid is given directly as step counts m (t = m / n)."""
        return cls(N=N, n=n, grid=tuple(Fraction(int(m), n) for m in steps), **kw)

    @property
    def steps(self):
        return steps_for(self.grid, self.n)


@dataclass
class AggregateSample:
    """Centered aggregate at the grid points for one replicate."""

    values: np.ndarray
    steps: tuple
    grid: tuple
    N: int
    n: int
    seed: int
    replicate: int


# -- kernels ------------------------------------------------------------------

@njit(cache=True)
def _record_copy(st, is_inar, par, u, steps, mode, buf):
    if is_inar:
        return inar1_record(st, u, par, steps, mode, buf)
    return ar1_record(st, u, par, steps, mode, buf)


@njit(cache=True, inline="always")
def _copy_u(st, j, fixed_u, kind, beta, coefs, gx, gy, sup):
    if fixed_u.size > 0:
        return fixed_u[j]
    return draw_one_minus_alpha(st, kind, beta, coefs, gx, gy, sup)


@njit(parallel=True, cache=True)
def _panel_kernel(is_inar, par, kind, beta, coefs, gx, gy, sup, n_copies, fixed_u,
                  steps, mode, seed, reps, domain):
    R = reps.size
    G = steps.size
    nchunks = (n_copies + CHUNK - 1) // CHUNK
    ntask = R * nchunks
    hi = np.zeros((ntask, G))
    lo = np.zeros((ntask, G))
    bad = np.full(ntask, -1, dtype=np.int64)
    for t in prange(ntask):
        r = t // nchunks
        c = t - r * nchunks
        st = np.empty(STATE_SIZE, dtype=np.uint64)
        buf = np.empty(G)
        for j in range(c * CHUNK, min(n_copies, (c + 1) * CHUNK)):
            init_state(st, seed, j, reps[r], domain)
            u = _copy_u(st, j, fixed_u, kind, beta, coefs, gx, gy, sup)
            if not _record_copy(st, is_inar, par, u, steps, mode, buf):
                bad[t] = j
                break
            for g in range(G):
                s = hi[t, g]
                x = buf[g]
                tot = s + x
                if abs(s) >= abs(x):
                    lo[t, g] += (s - tot) + x
                else:
                    lo[t, g] += (x - tot) + s
                hi[t, g] = tot
    return hi, lo, bad


@njit(cache=True)
def _combine(hi, lo, R, nchunks):
    G = hi.shape[1]
    out = np.zeros((R, G))
    for r in range(R):
        for g in range(G):
            s = 0.0
            comp = 0.0
            for c in range(nchunks):
                x = hi[r * nchunks + c, g] + lo[r * nchunks + c, g]
                tot = s + x
                if abs(s) >= abs(x):
                    comp += (s - tot) + x
                else:
                    comp += (x - tot) + s
                s = tot
            out[r, g] = s + comp
    return out


@njit(parallel=True, cache=True)
def _copies_kernel(is_inar, par, kind, beta, coefs, gx, gy, sup, copy_ids, fixed_u,
                   steps, mode, seed, rep, domain):
    out = np.zeros((copy_ids.size, steps.size))
    bad = np.full(copy_ids.size, -1, dtype=np.int64)
    for i in prange(copy_ids.size):
        st = np.empty(STATE_SIZE, dtype=np.uint64)
        buf = np.empty(steps.size)
        j = copy_ids[i]
        init_state(st, seed, j, rep, domain)
        u = _copy_u(st, j, fixed_u, kind, beta, coefs, gx, gy, sup)
        if not _record_copy(st, is_inar, par, u, steps, mode, buf):
            bad[i] = j
            continue
        out[i, :] = buf
    return out, bad


@njit(parallel=True, cache=True)
def _slope_kernel(is_inar, par, kind, beta, coefs, gx, gy, sup, n_copies, seed, trial,
                  domain, store, summands):
    nchunks = (n_copies + CHUNK - 1) // CHUNK
    hi = np.zeros(nchunks)
    lo = np.zeros(nchunks)
    for c in prange(nchunks):
        st = np.empty(STATE_SIZE, dtype=np.uint64)
        s = 0.0
        comp = 0.0
        for j in range(c * CHUNK, min(n_copies, (c + 1) * CHUNK)):
            init_state(st, seed, j, trial, domain)
            u = draw_one_minus_alpha(st, kind, beta, coefs, gx, gy, sup)
            if is_inar:
                y = par * (2.0 - u) / (u * u)
            else:
                y = par / (u * u)
            if store:
                summands[j] = y
            tot = s + y
            if abs(s) >= abs(y):
                comp += (s - tot) + y
            else:
                comp += (y - tot) + s
            s = tot
        hi[c] = s
        lo[c] = comp
    s = 0.0
    comp = 0.0
    for c in range(nchunks):
        x = hi[c] + lo[c]
        tot = s + x
        if abs(s) >= abs(x):
            comp += (s - tot) + x
        else:
            comp += (x - tot) + s
        s = tot
    return s + comp


# -- driver helpers -------------------------------------------------------------

def _fixed_u(alphas, N):
    if alphas is None:
        return np.empty(0, dtype=np.float64)
    return 1.0 - np.asarray(alphas[:N], dtype=np.float64)


def _model_par(model, params):
    # kernels take lambda for INAR and sigma (not sigma2) for AR
    if model == INAR:
        return True, float(params.lam)
    return False, math.sqrt(params.sigma2)


def _raise_abort(bad, params):
    j = int(bad[bad >= 0][0])
    raise PathAbort(f"copy {j}: stationary Poisson mean exceeds {MAX_STATIONARY_MEAN:.0e} "
                    f"(lambda={getattr(params, 'lam', None)}); path aborted rather than "
                    "truncated")


def _run_panel(model, params, law, N, steps, mode, seed, replicates, alphas, domain):
    is_inar, par = _model_par(model, params)
    steps = np.asarray(steps, dtype=np.int64)
    reps = np.asarray(replicates, dtype=np.int64)
    hi, lo, bad = _panel_kernel(is_inar, par, *law.kernel_args(), int(N),
                                _fixed_u(alphas, N), steps, mode, np.uint64(seed), reps,
                                domain)
    if np.any(bad >= 0):
        _raise_abort(bad, params)
    nchunks = (int(N) + CHUNK - 1) // CHUNK
    return _combine(hi, lo, reps.size, nchunks)


def simulate_panel(spec, replicates):
    """Raw aggregates for several replicates, shape ``(len(replicates), len(grid))``."""
    return _run_panel(spec.model, spec.params, spec.mixing, spec.N, spec.steps,
                      MODE_PARTIAL, spec.seed, np.atleast_1d(replicates), spec.alphas,
                      DOMAIN_PANEL)


def simulate_panel_fdd(spec, replicate=0):
    """S~^(N,n) at the grid points for one replicate."""
    values = simulate_panel(spec, [replicate])[0]
    return AggregateSample(values=values, steps=spec.steps, grid=spec.grid, N=spec.N,
                           n=spec.n, seed=spec.seed, replicate=int(replicate))


def copy_contributions(spec, replicate=0, copies=None):
    """Per-copy centered partial sums, shape ``(len(copies), len(grid))``.

    Row ``j`` is exactly what copy ``j`` adds to the panel, independent of N.
    """
    copies = np.arange(spec.N) if copies is None else np.asarray(copies)
    is_inar, par = _model_par(spec.model, spec.params)
    fixed = _fixed_u(spec.alphas, int(copies.max()) + 1) if spec.alphas is not None \
        else _fixed_u(None, 0)
    out, bad = _copies_kernel(is_inar, par, *spec.mixing.kernel_args(),
                              copies.astype(np.int64), fixed,
                              np.asarray(spec.steps, dtype=np.int64), MODE_PARTIAL,
                              np.uint64(spec.seed), int(replicate), DOMAIN_PANEL)
    if np.any(bad >= 0):
        _raise_abort(bad, spec.params)
    return out


def _values(sample):
    return np.asarray(sample.values if isinstance(sample, AggregateSample) else sample,
                      dtype=float)


def normalize_N_first(sample, N=None, n=None):
    """S~ / sqrt(n log(n) N), the scaling for N -> inf followed by n -> inf."""
    N = sample.N if N is None else N
    n = sample.n if n is None else n
    if n < 2:
        raise ValueError("N-first normalization needs n >= 2 (log n > 0)")
    if N < 1:
        raise ValueError("N must be positive")
    return _values(sample) / math.sqrt(n * math.log(n) * N)


def normalize_n_first(sample, N=None, n=None):
    """S~ / sqrt(n N log(N)), the scaling for n -> inf followed by N -> inf."""
    N = sample.N if N is None else N
    n = sample.n if n is None else n
    if N < 2:
        raise ValueError("n-first normalization needs N >= 2 (log N > 0)")
    if n < 1:
        raise ValueError("n must be positive")
    return _values(sample) / math.sqrt(n * N * math.log(N))


def simple_aggregate(N, lags, model, params, mixing, seed=0, replicates=0, alphas=None):
    """N^{-1/2} sum_j (X_k^(j) - E[X_k^(j) | alpha^(j)]) at the time indices ``lags``.

    ``replicates`` may be an int (returns a vector) or a sequence (returns a
    ``(R, len(lags))`` array).

    Raises
    ------
    ValueError
        If the mixing law makes E[1/(1 - alpha)] infinite, since the Gaussian
        limit of the cross-sectional aggregate then does not exist.
    """
    model = _check_params(model, params)
    if alphas is None and moment_diverges(mixing, 1):
        raise ValueError(f"E[1/(1-alpha)] diverges for beta={mixing.beta}; "
                         "the simple aggregate has no Gaussian limit")
    lags = np.asarray(lags, dtype=np.int64)
    if lags.size == 0 or np.any(lags < 0) or np.any(np.diff(lags) <= 0):
        raise ValueError("lags must be nonnegative and strictly increasing")
    single = np.ndim(replicates) == 0
    raw = _run_panel(model, params, mixing, N, lags, MODE_LEVEL, seed,
                     np.atleast_1d(replicates), alphas, DOMAIN_SIMPLE)
    out = raw / math.sqrt(N)
    return out[0] if single else out


def slope_statistic(N, mixing, lam=1.0, seed=0, trial=0, model=INAR, alphas=None):
    """(N log N)^{-1} sum_j lam (1 + alpha_j) / (1 - alpha_j)**2.

    For the AR model the summand is ``sigma2 / (1 - alpha_j)**2`` with ``lam``
    read as sigma2.  With ``alphas`` given no randomness is used.
    """
    model = normalize_model(model)
    if N < 2:
        raise ValueError("slope statistic needs N >= 2")
    if alphas is not None:
        a = np.asarray(alphas, dtype=float)[:N]
        u = 1.0 - a
        y = lam * (1.0 + a) / u ** 2 if model == INAR else lam / u ** 2
        return math.fsum(y) / (N * math.log(N))
    return slope_total(N, mixing, lam, seed, trial, model) / (N * math.log(N))


def slope_total(N, mixing, lam=1.0, seed=0, trial=0, model=INAR):
    """Unnormalized sum_j lam (1 + alpha_j) / (1 - alpha_j)**2 of one trial."""
    model = normalize_model(model)
    return _slope_kernel(model == INAR, float(lam), *mixing.kernel_args(), int(N),
                         np.uint64(seed), int(trial), DOMAIN_SLOPE, False, np.empty(0))


def slope_summands(N, mixing, lam=1.0, seed=0, trial=0, model=INAR):
    """The N individual summands lam (1 + alpha_j) / (1 - alpha_j)**2 of one trial."""
    model = normalize_model(model)
    out = np.empty(int(N))
    _slope_kernel(model == INAR, float(lam), *mixing.kernel_args(), int(N),
                  np.uint64(seed), int(trial), DOMAIN_SLOPE, True, out)
    return out
