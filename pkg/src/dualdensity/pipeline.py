"""End-to-end assembly of psi, either epsilon-driven or with forced parameters."""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import distributions as dist
from .construction import (
    Amplitudes,
    GridParams,
    InequalityReport,
    ModulationMap,
    TargetBinMasses,
    build_modulation_map,
    check_s_inequalities,
    compute_amplitudes,
    examples_grid,
    make_grid,
    select_bounds,
    select_s,
    target_bin_masses,
)
from .distributions import DensitySpec, DensityStats
from .synthesis import PsiSpec

# built-in (f_X, f_P) pairs
PAIRS = {
    "bimodal-gaussian": (dist.bimodal_mixture, dist.gaussian),
    "exp-gaussian": (dist.exponential, dist.gaussian),
    "gaussian-exp": (dist.gaussian, dist.exponential),
    "gaussian-gaussian": (dist.gaussian, dist.gaussian),
}

EXAMPLE_N = 7
EXAMPLE_S = 64
EXAMPLE_BOUND = 5.0
# keeps the step-II window above the largest a_j^2 of all four pairs at n=7, s=64
EXAMPLE_EPSILON = 0.5


def pair_densities(name: str) -> tuple[DensitySpec, DensitySpec]:
    try:
        fx, fp = PAIRS[name]
    except KeyError:
        raise ValueError(f"unknown pair {name!r}; choose from {', '.join(PAIRS)}") from None
    return fx(), fp()


@dataclass(frozen=True)
class Construction:
    mode: str
    d_x: DensitySpec
    d_p: DensitySpec
    grid: GridParams
    stats: DensityStats
    inequalities: InequalityReport
    amplitudes: Amplitudes
    targets: TargetBinMasses
    map: ModulationMap
    psi: PsiSpec
    epsilon_star: float | None = None


def _finish(mode, d_x, d_p, grid, stats, inequalities, epsilon_star=None) -> Construction:
    a = compute_amplitudes(d_x, grid)
    pr = target_bin_masses(d_p, grid)
    mp = build_modulation_map(a, pr, grid)
    return Construction(mode, d_x, d_p, grid, stats, inequalities, a, pr, mp, PsiSpec(grid, a, mp), epsilon_star)


def build_examples(
    d_x: DensitySpec,
    d_p: DensitySpec,
    n: int = EXAMPLE_N,
    s: int = EXAMPLE_S,
    X_b: float = EXAMPLE_BOUND,
    P_b: float = EXAMPLE_BOUND,
    epsilon: float = EXAMPLE_EPSILON,
) -> Construction:
    """Forced n, s and bounds.  Assumption checks only warn here."""
    grid = examples_grid(n, s, X_b, P_b, epsilon)
    stats = dist.density_stats(d_x, d_p, grid, relaxed=True)
    report = check_s_inequalities(grid.s, grid, stats, d_x)
    return _finish("examples", d_x, d_p, grid, stats, report)


def recipe_n(d_x: DensitySpec, X_b: float, epsilon_star: float, n_min: int = 1) -> int:
    """Smallest n >= n_min with max(f_X) * X_b / 2**n < epsilon_star / 2."""
    q_x = dist._scan_extremum(d_x.pdf, -X_b, X_b, maximize=True)
    n = max(n_min, 1)
    while q_x * X_b / 2**n >= epsilon_star / 2:
        n += 1
    return n


def build_auto(
    d_x: DensitySpec,
    d_p: DensitySpec,
    epsilon: float | None = None,
    n: int = 1,
    epsilon_star: float | None = None,
) -> Construction:
    """Full epsilon-driven pipeline: bounds, grid, s, amplitudes, map.

    Pass ``epsilon_star`` instead of ``epsilon`` for the uniform-cdf recipe
    (epsilon = epsilon_star/2 and n large enough that Q_x dx < epsilon_star/2).
    Raises BudgetUnattainable when no s <= 2**20 meets the inequalities.
    """
    if epsilon_star is not None:
        if epsilon is not None and not math.isclose(epsilon, epsilon_star / 2):
            raise ValueError("give either epsilon or epsilon_star, not conflicting values")
        epsilon = epsilon_star / 2
    if epsilon is None:
        raise ValueError("epsilon is required in auto mode")
    X_b, P_b = select_bounds(d_x, d_p, epsilon)
    if epsilon_star is not None:
        n = recipe_n(d_x, X_b, epsilon_star, n)
    grid = make_grid(X_b, P_b, n, epsilon, d_p)
    stats = dist.density_stats(d_x, d_p, grid)
    grid = select_s(grid, stats, d_x)
    report = check_s_inequalities(grid.s, grid, stats, d_x)
    return _finish("auto", d_x, d_p, grid, stats, report, epsilon_star)
