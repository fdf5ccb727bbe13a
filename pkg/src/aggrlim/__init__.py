"""Simulation and verification of aggregated random-coefficient AR(1) and INAR(1) panels.

Modules
-------
mixing       law of the random coefficient, moments, tail functions
processes    stationary AR(1) / INAR(1) paths and conditional moments
aggregation  panels of N copies, normalizations, slope statistic
theory       exact and limiting reference values
stats        robust estimators, KS test, convergence sweeps
verify       acceptance suites
cli          command-line driver
"""

__version__ = "0.1.0"

from .aggregation import (AggregateSample, PanelSpec, normalize_N_first, normalize_n_first,
                          simple_aggregate, simulate_panel, simulate_panel_fdd,
                          slope_statistic)
from .mixing import MixingLaw, h_tilde, make_mixing_law, mixed_moment, sample_alpha, scaled_tail
from .processes import (Ar1Params, Inar1Params, Path, PathAbort, conditional_mean_inar,
                        exact_conditional_cov, exact_conditional_partial_sum_variance,
                        simulate_ar1_path, simulate_inar1_path)
from .rng import RngStream
from .theory import (CovKernel, LimitSpec, exact_prelimit_cov, harmonic_double_sum,
                     levy_tail, limit_cov_matrix, limit_variance_constant, stable_cf,
                     stationary_cov)

__all__ = [
    "__version__", "AggregateSample", "PanelSpec", "normalize_N_first", "normalize_n_first",
    "simple_aggregate", "simulate_panel", "simulate_panel_fdd", "slope_statistic",
    "MixingLaw", "h_tilde", "make_mixing_law", "mixed_moment", "sample_alpha", "scaled_tail",
    "Ar1Params", "Inar1Params", "Path", "PathAbort", "conditional_mean_inar",
    "exact_conditional_cov", "exact_conditional_partial_sum_variance", "simulate_ar1_path",
    "simulate_inar1_path", "RngStream", "CovKernel", "LimitSpec", "exact_prelimit_cov",
    "harmonic_double_sum", "levy_tail", "limit_cov_matrix", "limit_variance_constant",
    "stable_cf", "stationary_cov",
]
