"""Estimators and convergence sweeps for the two iterated limits.

Second moments of the aggregates are finite but their fourth moments are
not (at beta = 1, E(1 - alpha)^{-2} is infinite), so covariances are
estimated by median-of-means over contiguous blocks of replicates; the plain
sample moments are carried along for diagnostics.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .aggregation import PanelSpec, simulate_panel, slope_statistic
from .mixing import make_mixing_law
from .processes import INAR, _check_params
from .theory import (N_FIRST, LimitSpec, exact_prelimit_cov, limit_cov_matrix,
                     limit_variance_constant, n_FIRST)

MOM_BAND_FACTOR = 1.58
DEFAULT_BLOCKS = 100
KS_MIN_SAMPLES = 1000


@dataclass
class EstimatorReport:
    """Median-of-means estimate with a robust band.

    ``stderr`` is the naive standard error of the plain mean, reported for
    diagnostics only (it is meaningless when the second moment is infinite).
    """

    estimate: float
    stderr: float
    blocks: int
    band: tuple
    plain_mean: float
    n: int

    @property
    def half_width(self):
        return 0.5 * (self.band[1] - self.band[0])


def mom_estimate(samples, blocks=DEFAULT_BLOCKS):
    """Median of block means over ``blocks`` contiguous blocks.

    Band is ``median +/- 1.58 IQR / sqrt(blocks)`` with the IQR taken over
    the block means.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("mom_estimate needs at least one sample")
    blocks = int(blocks)
    if blocks < 1:
        raise ValueError("blocks must be a positive integer")
    if x.size < blocks:
        raise ValueError(f"need at least {blocks} samples for {blocks} blocks, got {x.size}")
    means = np.array([b.mean() for b in np.array_split(x, blocks)])
    med = float(np.median(means))
    q75, q25 = np.percentile(means, [75.0, 25.0])
    half = MOM_BAND_FACTOR * float(q75 - q25) / math.sqrt(blocks)
    stderr = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else float("nan")
    return EstimatorReport(estimate=med, stderr=stderr, blocks=blocks,
                           band=(med - half, med + half), plain_mean=float(x.mean()),
                           n=int(x.size))


@dataclass
class CovEstimate:
    """Entrywise median-of-means covariance with bands and the plain sample covariance."""

    matrix: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    plain: np.ndarray
    blocks: int

    def within(self, reference):
        ref = np.asarray(reference, dtype=float)
        return (self.lower <= ref) & (ref <= self.upper)


def empirical_cov_matrix(replicates, blocks=DEFAULT_BLOCKS, center=True):
    """Covariance of the columns of an ``R x G`` matrix, entry by entry via :func:`mom_estimate`.

    ``center=True`` subtracts column sample means first; ``center=False``
    uses the known zero mean of the centered aggregates.
    """
    X = np.asarray(replicates, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"replicates must be an R x G matrix, got shape {X.shape}")
    R, G = X.shape
    if R < 2:
        raise ValueError("need at least two replicates")
    blocks = min(int(blocks), R)
    Xc = X - X.mean(axis=0) if center else X
    est = np.empty((G, G))
    lo = np.empty((G, G))
    hi = np.empty((G, G))
    for i in range(G):
        for j in range(i, G):
            rep = mom_estimate(Xc[:, i] * Xc[:, j], blocks)
            est[i, j] = est[j, i] = rep.estimate
            lo[i, j] = lo[j, i] = rep.band[0]
            hi[i, j] = hi[j, i] = rep.band[1]
    plain = (Xc.T @ Xc) / (R - 1 if center else R)
    return CovEstimate(matrix=est, lower=lo, upper=hi, plain=plain, blocks=blocks)


@dataclass
class KSResult:
    statistic: float
    threshold: float
    passed: bool
    level: float
    n: int

    @property
    def meaningful(self):
        return self.n >= KS_MIN_SAMPLES


def kolmogorov_critical(level):
    """Asymptotic Kolmogorov critical value c with P(sqrt(n) D > c) = level."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    return math.sqrt(-0.5 * math.log(level / 2.0))


def ks_normal(samples, mean, variance, level=0.01):
    """One-sample KS test against Normal(mean, variance); pass iff D < c(level)/sqrt(n)."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("ks_normal needs samples")
    if not (variance > 0 and math.isfinite(variance)):
        raise ValueError(f"variance must be positive and finite, got {variance}")
    n = x.size
    F = special.ndtr((x - mean) / math.sqrt(variance))
    i = np.arange(1, n + 1)
    D = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    D = min(max(D, 0.0), 1.0)
    thr = kolmogorov_critical(level) / math.sqrt(n)
    return KSResult(statistic=D, threshold=thr, passed=D < thr, level=level, n=n)


def empirical_cf(samples, theta_grid):
    """(1/R) sum_r exp(i theta s_r) for each theta."""
    s = np.asarray(samples, dtype=float).ravel()
    if s.size == 0:
        raise ValueError("empirical_cf needs samples")
    th = np.atleast_1d(np.asarray(theta_grid, dtype=float))
    out = np.empty(th.size, dtype=complex)
    for i, t in enumerate(th):
        z = t * s
        out[i] = complex(np.mean(np.cos(z)), np.mean(np.sin(z)))
    return out


# -- sweeps -------------------------------------------------------------------------

@dataclass
class SweepConfig:
    """Settings shared by the two sweep protocols.

    ``N`` / ``n`` are the held-fixed sizes; ``sizes`` is the swept list
    (values of n for the N-first sweep, values of N for the n-first sweep).
    """

    model: str = INAR
    params: object = None
    mixing: object = None
    N: int = 1000
    n: int = 10_000
    sizes: tuple = ()
    grid: tuple = (0.5, 1.0)
    replicates: int = 400
    seed: int = 0
    blocks: int = DEFAULT_BLOCKS
    slope_sizes: tuple = (10**3, 10**4, 10**5, 10**6, 10**7)
    slope_trials: int = 100

    def __post_init__(self):
        from .processes import params_for
        if self.params is None:
            self.params = params_for(self.model, 1.0)
        self.model = _check_params(self.model, self.params)
        if self.mixing is None:
            self.mixing = make_mixing_law("constant", 1.0)
        if self.replicates < 2:
            raise ValueError("replicates must be at least 2")


@dataclass
class SweepRow:
    N: int
    n: int
    regime: str
    grid: tuple
    steps: tuple
    estimate: np.ndarray
    reference: np.ndarray
    limit: np.ndarray
    max_rel_dev: float
    max_rel_dev_limit: float
    plain: np.ndarray
    seed: int
    replicates: int
    lower: np.ndarray = field(default=None)
    upper: np.ndarray = field(default=None)
    samples: np.ndarray = field(default=None, repr=False)


def max_relative_deviation(est, ref):
    est = np.asarray(est, dtype=float)
    ref = np.asarray(ref, dtype=float)
    mask = ref != 0
    if not np.any(mask):
        return float(np.max(np.abs(est)))
    return float(np.max(np.abs(est[mask] - ref[mask]) / np.abs(ref[mask])))


def exact_reference_matrix(model, params, mixing, steps):
    """Var/Cov of S~ / N at the given step counts: exact_prelimit_cov(m_i, m_j)."""
    G = len(steps)
    out = np.zeros((G, G))
    for i in range(G):
        for j in range(i, G):
            if steps[i] > 0 and steps[j] > 0:
                out[i, j] = out[j, i] = exact_prelimit_cov(model, steps[i], steps[j],
                                                           params, mixing)
    return out


def _scale(params):
    return params.lam if hasattr(params, "lam") else params.sigma2


def _run_row(cfg, N, n, regime):
    spec = PanelSpec(N=N, n=n, grid=cfg.grid, model=cfg.model, params=cfg.params,
                     mixing=cfg.mixing, seed=cfg.seed)
    raw = simulate_panel(spec, np.arange(cfg.replicates))
    if regime == N_FIRST:
        norm = n * math.log(n) * N
        ref_norm = n * math.log(n)
    else:
        norm = n * N * math.log(N)
        ref_norm = n * math.log(N)
    z = raw / math.sqrt(norm)
    est = empirical_cov_matrix(z, cfg.blocks)
    ref = exact_reference_matrix(cfg.model, cfg.params, cfg.mixing, spec.steps) / ref_norm
    c = limit_variance_constant(LimitSpec(cfg.model, regime, _scale(cfg.params),
                                          cfg.mixing.psi1))
    lim = limit_cov_matrix(spec.grid, c)
    return SweepRow(N=N, n=n, regime=regime, grid=tuple(float(t) for t in spec.grid),
                    steps=spec.steps, estimate=est.matrix, reference=ref, limit=lim,
                    max_rel_dev=max_relative_deviation(est.matrix, ref),
                    max_rel_dev_limit=max_relative_deviation(est.matrix, lim),
                    plain=est.plain, seed=cfg.seed, replicates=cfg.replicates,
                    lower=est.lower, upper=est.upper, samples=z)


def sweep_N_first(cfg):
    """Hold N fixed and let n grow; normalization sqrt(n log n N), limit kernel 2 lam psi1 (INAR)."""
    sizes = cfg.sizes or (10**2, 10**3, 10**4)
    return [_run_row(cfg, cfg.N, int(n), N_FIRST) for n in sorted(sizes)]


def sweep_n_first(cfg):
    """Hold n fixed and let N grow; normalization sqrt(n N log N), limit kernel lam psi1 (INAR).

    The ``reference`` column is E[S~ S~'] / (n N log N), the exact
    expectation.  For N much larger than n it decays like log(n) / log(N)
    while the median-of-means estimate follows the limit kernel, so the
    limit deviation is the meaningful one here.
    """
    sizes = cfg.sizes or (10**2, 10**3, 10**4)
    return [_run_row(cfg, int(N), cfg.n, n_FIRST) for N in sorted(sizes)]


@dataclass
class SlopeRow:
    N: int
    trials: int
    median: float
    q25: float
    q75: float
    target: float
    median_dev: float
    seed: int
    values: np.ndarray = field(repr=False, default=None)


def slope_target(model, params, mixing):
    return _scale(params) * mixing.psi1


def sweep_slope(cfg):
    """Median of the slope statistic over ``slope_trials`` trials for each N in ``slope_sizes``."""
    target = slope_target(cfg.model, cfg.params, cfg.mixing)
    rows = []
    for N in sorted(cfg.slope_sizes):
        vals = np.array([slope_statistic(int(N), cfg.mixing, _scale(cfg.params),
                                         seed=cfg.seed, trial=t, model=cfg.model)
                         for t in range(cfg.slope_trials)])
        med = float(np.median(vals))
        q75, q25 = np.percentile(vals, [75.0, 25.0])
        rows.append(SlopeRow(N=int(N), trials=cfg.slope_trials, median=med, q25=float(q25),
                             q75=float(q75), target=target,
                             median_dev=abs(med - target) / target, seed=cfg.seed,
                             values=vals))
    return rows


__all__ = ["EstimatorReport", "CovEstimate", "KSResult", "SweepConfig", "SweepRow",
           "SlopeRow", "mom_estimate", "empirical_cov_matrix", "ks_normal",
           "kolmogorov_critical", "empirical_cf", "sweep_N_first", "sweep_n_first",
           "sweep_slope", "exact_reference_matrix", "max_relative_deviation",
           "limit_cov_matrix"]
