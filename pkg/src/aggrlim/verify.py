"""Acceptance checks, grouped into suites.

Each check returns a :class:`CriterionResult` carrying the reference value,
the estimate, the acceptance band and a pass flag.  Monte Carlo sizes come
from a budget table; ``default`` uses the sizes the checks are specified at,
``small`` trades replicates for wider bands and ``large`` adds replicates.
"""

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from .aggregation import (PanelSpec, simple_aggregate, simulate_panel, slope_statistic,
                          slope_summands, slope_total)
from .mixing import h_tilde, make_mixing_law, mixed_moment, sample_alpha, scaled_tail
from .processes import (AR, INAR, Ar1Params, Inar1Params,
                        exact_conditional_partial_sum_variance, long_run_variance)
from .rng import DOMAIN_ALPHA, RngStream
from .stats import (SweepConfig, empirical_cf, empirical_cov_matrix, ks_normal,
                    max_relative_deviation, sweep_N_first)
from .theory import (N_FIRST, LimitSpec, exact_prelimit_cov, harmonic_double_sum,
                     limit_variance_constant, stable_cf, truncated_slope_mean)

SUITES = ("exact", "mc", "slope", "tail", "cf")
BUDGETS = ("small", "default", "large")

# Monte Carlo sizes and tolerances per budget
BUDGET_TABLE = {
    "small": dict(c6_N=1000, c6_R=2000, c6_tol=0.15,
                  c7_m=1000, c7_R=2000, c7_tol=0.10,
                  c8_N=200, c8_n=200, c8_R=200, c8_tol=0.20, c8_tol_lim=0.35,
                  c9_sizes=(10**3, 10**4, 10**5), c9_trials=30, c9_tol=0.35,
                  c10_n=2000, c10_R=2000, c10_tol=0.10,
                  tail_N=10**5, tail_trials=20,
                  cf_N=10**5, cf_R=300, cf_tol=0.10),
    "default": dict(c6_N=10**4, c6_R=10**4, c6_tol=0.10,
                    c7_m=10**4, c7_R=10**4, c7_tol=0.05,
                    c8_N=1000, c8_n=1000, c8_R=400, c8_tol=0.10, c8_tol_lim=0.25,
                    c9_sizes=(10**3, 10**5, 10**7), c9_trials=100, c9_tol=0.25,
                    c10_n=10**4, c10_R=10**4, c10_tol=0.05,
                    tail_N=10**6, tail_trials=100,
                    cf_N=10**6, cf_R=1000, cf_tol=0.05),
    "large": dict(c6_N=10**4, c6_R=4 * 10**4, c6_tol=0.10,
                  c7_m=10**4, c7_R=4 * 10**4, c7_tol=0.05,
                  c8_N=1000, c8_n=1000, c8_R=1600, c8_tol=0.10, c8_tol_lim=0.25,
                  c9_sizes=(10**3, 10**5, 10**7), c9_trials=400, c9_tol=0.25,
                  c10_n=10**4, c10_R=4 * 10**4, c10_tol=0.05,
                  tail_N=10**6, tail_trials=400,
                  cf_N=10**6, cf_R=4000, cf_tol=0.05),
}

KS_LEVEL = 0.01


@dataclass
class CriterionResult:
    cid: str
    description: str
    reference: float
    estimate: float
    lower: float
    upper: float
    passed: bool
    hard: bool = True
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        soft = "" if self.hard else " (soft)"
        return (f"[{tag}] criterion {self.cid}{soft}: {self.description} | "
                f"estimate={self.estimate:.6g} reference={self.reference:.6g} "
                f"band=[{self.lower:.6g}, {self.upper:.6g}]")

    def to_json(self):
        d = asdict(self)
        d["band"] = [self.lower, self.upper]
        return _jsonable(d)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def _rel_band(ref, tol):
    return ref * (1.0 - tol), ref * (1.0 + tol)


def sub_seed(seed, k):
    return (int(seed) + 1_000_003 * k) % 2**64


def _law():
    return make_mixing_law("constant", 1.0)


# -- deterministic ------------------------------------------------------------------

def check_harmonic_identity(max_m=200):
    """1. Harmonic closed form vs the O(m^2) double loop for all m1, m2 <= max_m."""
    # brute force: every term 1/(|k-l|+1) summed through a 2-d running sum,
    # carried in extended precision so the reference is exact to ~1e-16
    k = np.arange(1, max_m + 1)
    terms = 1.0 / (np.abs(k[:, None] - k[None, :]).astype(np.longdouble) + 1)
    brute = np.cumsum(np.cumsum(terms, axis=0), axis=1)
    worst = 0.0
    for m1 in range(1, max_m + 1):
        for m2 in range(1, max_m + 1):
            ref = brute[m1 - 1, m2 - 1]
            rel = float(abs(np.longdouble(harmonic_double_sum(m1, m2)) - ref) / ref)
            worst = max(worst, rel)
    tol = 1e-12
    return CriterionResult("1", "harmonic double sum vs brute force, m1, m2 <= 200",
                           0.0, worst, 0.0, tol, worst <= tol,
                           details={"max_rel_error": worst, "max_m": max_m})


def _prelimit_sweep(model, params, target, ms=(10**3, 10**4, 10**5, 10**6)):
    law = _law()
    ratios = [exact_prelimit_cov(model, m, m, params, law) / (m * math.log(m)) for m in ms]
    devs = [abs(r - target) / target for r in ratios]
    return ratios, devs


def check_covariance_convergence():
    """2. exact_prelimit_cov(m, m)/(m ln m) -> 4 for INAR, with cross-time check."""
    target = limit_variance_constant(LimitSpec(INAR, N_FIRST, 1.0, 2.0))
    ms = (10**3, 10**4, 10**5, 10**6)
    ratios, devs = _prelimit_sweep(INAR, Inar1Params(1.0), target, ms)
    decreasing = all(b < a for a, b in zip(devs, devs[1:]))
    m = 10**6
    t1, t2 = 1, 2
    cross = exact_prelimit_cov(INAR, m * t1, m * t2, Inar1Params(1.0), _law()) / (m * math.log(m))
    cross_ref = target * min(t1, t2)
    cross_ok = abs(cross - cross_ref) <= 0.10 * cross_ref
    ok = devs[-1] <= 0.10 and decreasing and cross_ok
    lo, hi = _rel_band(target, 0.10)
    return CriterionResult("2", "INAR exact prelimit covariance / (m ln m) -> 2 lam psi1",
                           target, ratios[-1], lo, hi, ok,
                           details={"m": ms, "ratio": ratios, "deviation": devs,
                                    "strictly_decreasing": decreasing,
                                    "cross_time_ratio": cross, "cross_time_reference": cross_ref,
                                    "cross_time_pass": cross_ok})


def check_ar_kernel():
    """3. Same sweep for the AR covariance kernel, target sigma2 psi1 = 2."""
    target = limit_variance_constant(LimitSpec(AR, N_FIRST, 1.0, 2.0))
    ms = (10**3, 10**4, 10**5, 10**6)
    ratios, devs = _prelimit_sweep(AR, Ar1Params(1.0), target, ms)
    decreasing = all(b < a for a, b in zip(devs, devs[1:]))
    ok = devs[-1] <= 0.10 and decreasing
    lo, hi = _rel_band(target, 0.10)
    return CriterionResult("3", "AR exact prelimit covariance / (m ln m) -> sigma2 psi1",
                           target, ratios[-1], lo, hi, ok,
                           details={"m": ms, "ratio": ratios, "deviation": devs,
                                    "strictly_decreasing": decreasing})


def check_closed_form_moments(kmax=50):
    """4. mixed_moment vs 2/(k+1) and 2 I_k; divergence flags over the beta x p grid."""
    law = _law()
    worst = 0.0
    I = math.log(2.0)
    for k in range(kmax + 1):
        if k > 0:
            I = 1.0 / k - I
        inar = mixed_moment(law, k, 1, 0)
        ar = mixed_moment(law, k, 1, 1)
        worst = max(worst, abs(inar - 2.0 / (k + 1)) / (2.0 / (k + 1)),
                    abs(ar - 2.0 * I) / (2.0 * I))
    mismatches = []
    for beta in (-0.5, 0.0, 0.5, 1.0, 1.5, 2.0):
        lb = make_mixing_law("constant", beta)
        for p in (0, 1, 2, 3):
            div = math.isinf(mixed_moment(lb, 0, p))
            if div != (p >= beta + 1.0):
                mismatches.append((beta, p))
    tol = 1e-8
    ok = worst <= tol and not mismatches
    return CriterionResult("4", "closed-form mixed moments (k <= 50) and divergence flags",
                           0.0, worst, 0.0, tol, ok,
                           details={"max_rel_error": worst, "flag_mismatches": mismatches})


def check_tail_inversion():
    """5. h~ inversion identity on the grid; scaled_tail at N = 1e8 vs 2/x."""
    xs = 10.0 ** np.arange(-2.0, 6.0 + 1e-9, 0.25)
    worst = 0.0
    for lam in (0.5, 1.0, 5.0):
        for x in xs:
            u = h_tilde(lam, x)
            worst = max(worst, abs(lam * (2.0 - u) / u**2 - x) / x)
    law = _law()
    tail_err = {}
    for x in (0.5, 1.0, 2.0, 10.0):
        ref = law.psi1 * 1.0 / x
        tail_err[x] = abs(scaled_tail(law, 1.0, 10**8, x) - ref) / ref
    worst_tail = max(tail_err.values())
    ok = worst <= 1e-10 and worst_tail < 1e-3
    return CriterionResult("5", "h~ inversion (1e-10) and scaled tail at N=1e8 (1e-3)",
                           0.0, worst_tail, 0.0, 1e-3, ok,
                           details={"inversion_max_rel_error": worst,
                                    "tail_rel_error": tail_err})


# -- Monte Carlo --------------------------------------------------------------------

def check_simple_aggregate(budget="default", seed=0):
    """6. Cross-sectional aggregate: covariances 2, 1, 0.5 at lags 0, 1, 3 and KS at lag 0."""
    b = BUDGET_TABLE[budget]
    law = _law()
    lags = (0, 1, 3)
    X = simple_aggregate(b["c6_N"], lags, INAR, Inar1Params(1.0), law, seed=seed,
                         replicates=np.arange(b["c6_R"]))
    est = empirical_cov_matrix(X)
    refs = [2.0 / (k + 1) for k in lags]
    covs = [float(est.matrix[0, i]) for i in range(len(lags))]
    devs = [abs(c - r) / r for c, r in zip(covs, refs)]
    ks = ks_normal(X[:, 0], 0.0, 2.0, KS_LEVEL)
    ok = max(devs) <= b["c6_tol"] and ks.passed
    lo, hi = _rel_band(refs[0], b["c6_tol"])
    return CriterionResult("6", "simple aggregate covariances (2, 1, 0.5) and KS at lag 0",
                           refs[0], covs[0], lo, hi, ok,
                           details={"lags": lags, "estimate": covs, "reference": refs,
                                    "rel_dev": devs, "tolerance": b["c6_tol"],
                                    "plain": [float(est.plain[0, i]) for i in range(3)],
                                    "ks_statistic": ks.statistic, "ks_threshold": ks.threshold,
                                    "ks_pass": ks.passed, "N": b["c6_N"], "R": b["c6_R"]})


def check_fixed_alpha_clt(budget="default", seed=0):
    """7. Fixed alpha: Var(m^{-1/2} partial sum) vs the long-run variance, both models."""
    b = BUDGET_TABLE[budget]
    m, R, tol = b["c7_m"], b["c7_R"], b["c7_tol"]
    rows = []
    for model, params in ((INAR, Inar1Params(1.0)), (AR, Ar1Params(1.0))):
        for a in (0.3, 0.7):
            spec = PanelSpec.from_steps(1, m, [m], model=model, params=params,
                                        seed=seed, alphas=(a,))
            x = simulate_panel(spec, np.arange(R))[:, 0] / math.sqrt(m)
            var = float(np.var(x, ddof=1))
            ref = long_run_variance(model, a, params)
            rows.append({"model": model, "alpha": a, "estimate": var, "reference": ref,
                         "rel_dev": abs(var - ref) / ref})
    worst = max(rows, key=lambda r: r["rel_dev"])
    ok = worst["rel_dev"] <= tol
    lo, hi = _rel_band(worst["reference"], tol)
    return CriterionResult("7", "fixed-alpha CLT variances (INAR and AR, alpha 0.3/0.7)",
                           worst["reference"], worst["estimate"], lo, hi, ok,
                           details={"rows": rows, "m": m, "R": R, "tolerance": tol})


def _pipeline_N_first(cid, model, params, budget, seed):
    b = BUDGET_TABLE[budget]
    cfg = SweepConfig(model=model, params=params, mixing=_law(), N=b["c8_N"],
                      sizes=(b["c8_n"],), grid=(0.5, 1.0), replicates=b["c8_R"], seed=seed)
    row = sweep_N_first(cfg)[0]
    # KS on the t = 1 column against the exact finite-size variance
    ks = ks_normal(row.samples[:, -1], 0.0, float(row.reference[-1, -1]), KS_LEVEL)
    ok = (row.max_rel_dev <= b["c8_tol"] and row.max_rel_dev_limit <= b["c8_tol_lim"]
          and ks.passed)
    lo, hi = _rel_band(float(row.reference[-1, -1]), b["c8_tol"])
    name = "INAR" if model == INAR else "AR"
    return CriterionResult(
        cid, f"{name} N-first pipeline: mom covariance vs exact reference and limit kernel",
        float(row.reference[-1, -1]), float(row.estimate[-1, -1]), lo, hi, ok,
        details={"estimate": row.estimate, "reference": row.reference, "limit": row.limit,
                 "plain": row.plain, "max_rel_dev_exact": row.max_rel_dev,
                 "max_rel_dev_limit": row.max_rel_dev_limit,
                 "tolerance_exact": b["c8_tol"], "tolerance_limit": b["c8_tol_lim"],
                 "max_rel_dev_exact_plain": max_relative_deviation(row.plain, row.reference),
                 "ks_statistic": ks.statistic, "ks_threshold": ks.threshold,
                 "ks_pass": ks.passed, "N": cfg.N, "n": row.n, "R": cfg.replicates,
                 "grid": cfg.grid})


def check_N_first_pipeline(budget="default", seed=0):
    """8. INAR N-first pipeline."""
    return _pipeline_N_first("8", INAR, Inar1Params(1.0), budget, seed)


def check_slope_lln(budget="default", seed=0):
    """9. Median slope statistic over trials -> lam psi1 = 2, improving with N."""
    b = BUDGET_TABLE[budget]
    law = _law()
    target = 1.0 * law.psi1
    medians = {}
    for N in b["c9_sizes"]:
        vals = [slope_statistic(N, law, 1.0, seed=seed, trial=t) for t in range(b["c9_trials"])]
        medians[N] = float(np.median(vals))
    devs = {N: abs(m - target) / target for N, m in medians.items()}
    Nmin, Nmax = min(medians), max(medians)
    ok = devs[Nmax] <= b["c9_tol"] and devs[Nmax] < devs[Nmin]
    lo, hi = _rel_band(target, b["c9_tol"])
    return CriterionResult("9", "slope statistic LLN: median -> lam psi1 with improving trend",
                           target, medians[Nmax], lo, hi, ok,
                           details={"medians": medians, "deviation": devs,
                                    "trials": b["c9_trials"], "tolerance": b["c9_tol"]})


def fixed_panel_alphas(N, seed):
    """Coefficients for the fixed-panel checks, drawn once from the default law."""
    return tuple(float(a) for a in sample_alpha(_law(), RngStream(seed, domain=DOMAIN_ALPHA), N))


def _fixed_panel(cid, model, params, budget, seed):
    b = BUDGET_TABLE[budget]
    n, R, tol = b["c10_n"], b["c10_R"], b["c10_tol"]
    alphas = fixed_panel_alphas(4, seed)
    spec = PanelSpec(N=4, n=n, grid=(1,), model=model, params=params, mixing=_law(),
                     seed=seed, alphas=alphas)
    x = simulate_panel(spec, np.arange(R))[:, 0] / math.sqrt(n)
    var = float(np.var(x, ddof=1))
    ref = math.fsum(long_run_variance(model, a, params) for a in alphas)
    finite = math.fsum(exact_conditional_partial_sum_variance(model, a, params, n)
                       for a in alphas) / n
    lo, hi = _rel_band(ref, tol)
    name = "INAR" if model == INAR else "AR"
    return CriterionResult(cid, f"{name} fixed panel (N=4): Var(n^-1/2 S~) vs sum of "
                           "long-run variances", ref, var, lo, hi, abs(var - ref) <= tol * ref,
                           details={"alphas": alphas, "finite_n_reference": finite,
                                    "n": n, "R": R, "tolerance": tol})


def check_fixed_panel(budget="default", seed=0):
    """10. INAR conditional CLT for a fixed panel of four coefficients."""
    return _fixed_panel("10", INAR, Inar1Params(1.0), budget, seed)


def check_ar_analogues(budget="default", seed=0):
    """11. AR versions of 8 and 10 (constants sigma2 psi1 and sigma2 psi1 / 2)."""
    a = _pipeline_N_first("11a", AR, Ar1Params(1.0), budget, seed)
    b = _fixed_panel("11b", AR, Ar1Params(1.0), budget, sub_seed(seed, 7))
    return [a, b]


def check_slope_tail(budget="default", seed=0):
    """Per-summand tail: count of summands above N x vs N P(...) from scaled_tail."""
    b = BUDGET_TABLE[budget]
    law = _law()
    N, T, x = b["tail_N"], b["tail_trials"], 1.0
    count = 0
    for t in range(T):
        count += int(np.count_nonzero(slope_summands(N, law, 1.0, seed=seed, trial=t) > N * x))
    p = scaled_tail(law, 1.0, N, x) / N
    mean = T * N * p
    sd = math.sqrt(T * N * p * (1.0 - p))
    ok = abs(count - mean) <= 3.0 * sd
    return CriterionResult("tail", f"summands above N x (x=1, N={N}, {T} trials) vs "
                           "scaled_tail, 3 binomial sd", mean, float(count),
                           mean - 3 * sd, mean + 3 * sd, ok,
                           details={"N": N, "trials": T, "x": x, "p": p})


def check_stable_cf(budget="default", seed=0):
    """Soft: empirical CF of centered slope sums vs the infinitely divisible limit."""
    b = BUDGET_TABLE[budget]
    law = _law()
    N, R = b["cf_N"], b["cf_R"]
    center = truncated_slope_mean(1.0, N, law)
    s = np.array([slope_total(N, law, 1.0, seed=seed, trial=t) / N - center
                  for t in range(R)])
    thetas = (0.5, 1.0, 2.0)
    emp = empirical_cf(s, thetas)
    ref = [stable_cf(t, 1.0, law.psi1) for t in thetas]
    diffs = [abs(e - r) for e, r in zip(emp, ref)]
    tol = b["cf_tol"]
    return CriterionResult("cf", "empirical CF of centered slope sums vs stable CF",
                           0.0, max(diffs), 0.0, tol, max(diffs) <= tol, hard=False,
                           details={"theta": thetas, "empirical": [[z.real, z.imag] for z in emp],
                                    "reference": [[z.real, z.imag] for z in ref],
                                    "abs_diff": diffs, "N": N, "R": R})


EXACT_CHECKS = (check_harmonic_identity, check_covariance_convergence, check_ar_kernel,
                check_closed_form_moments, check_tail_inversion)


def run_suite(suite, budget="default", seed=0, progress=None):
    """Run one suite; returns a list of :class:`CriterionResult`."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if budget not in BUDGETS:
        raise ValueError(f"unknown budget {budget!r}; choose from {', '.join(BUDGETS)}")
    if suite == "exact":
        jobs = [(f, {}) for f in EXACT_CHECKS]
    elif suite == "mc":
        jobs = [(check_simple_aggregate, {"seed": sub_seed(seed, 6)}),
                (check_fixed_alpha_clt, {"seed": sub_seed(seed, 7)}),
                (check_N_first_pipeline, {"seed": sub_seed(seed, 8)}),
                (check_fixed_panel, {"seed": sub_seed(seed, 10)}),
                (check_ar_analogues, {"seed": sub_seed(seed, 11)})]
        jobs = [(f, dict(kw, budget=budget)) for f, kw in jobs]
    elif suite == "slope":
        jobs = [(check_slope_lln, {"budget": budget, "seed": sub_seed(seed, 9)})]
    elif suite == "tail":
        jobs = [(check_tail_inversion, {}),
                (check_slope_tail, {"budget": budget, "seed": sub_seed(seed, 12)})]
    else:
        jobs = [(check_stable_cf, {"budget": budget, "seed": sub_seed(seed, 13)})]
    results = []
    for func, kw in jobs:
        t0 = time.perf_counter()
        out = func(**kw)
        out = out if isinstance(out, list) else [out]
        dt = (time.perf_counter() - t0) / len(out)
        for r in out:
            r.seconds = dt
            results.append(r)
            if progress is not None:
                progress(r)
    return results


__all__ = ["SUITES", "BUDGETS", "BUDGET_TABLE", "CriterionResult", "run_suite",
           "check_harmonic_identity", "check_covariance_convergence", "check_ar_kernel",
           "check_closed_form_moments", "check_tail_inversion", "check_simple_aggregate",
           "check_fixed_alpha_clt", "check_N_first_pipeline", "check_slope_lln",
           "check_fixed_panel", "check_ar_analogues", "check_slope_tail", "check_stable_cf",
           "fixed_panel_alphas"]
