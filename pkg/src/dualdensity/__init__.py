"""Approximate two unrelated densities with one complex function psi.

|psi(x)|^2 tracks f_X on position bins and t |psi_hat(q t)|^2 tracks f_P on
momentum bins.
"""
from .construction import (
    BudgetUnattainable,
    GridParams,
    build_modulation_map,
    check_s_inequalities,
    compute_amplitudes,
    make_grid,
    select_bounds,
    select_s,
    target_bin_masses,
)
from .distributions import DensitySpec, bimodal_mixture, exponential, gaussian, gaussian_mixture
from .pipeline import PAIRS, build_auto, build_examples, pair_densities
from .synthesis import PsiSpec, eval_psi, eval_psi_hat
from .verification import ErrorReport, build_report

__version__ = "0.1.0"
