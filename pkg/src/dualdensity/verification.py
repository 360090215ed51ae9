"""Headline error figures for a constructed psi, and the JSON report."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .construction import TargetBinMasses
from .distributions import DensitySpec, _scan_extremum, interval_mass
from .pipeline import Construction
from .synthesis import (
    PsiSpec,
    cdf_tilde_p,
    cdf_tilde_x,
    momentum_bin_mass,
    momentum_bin_mass_exact,
    position_bin_masses,
    position_nodes,
    total_mass_on,
)

DEFAULT_PROBES = 8


def momentum_masses(psi: PsiSpec, numeric: bool = False) -> np.ndarray:
    J = psi.grid.J
    f = momentum_bin_mass if numeric else momentum_bin_mass_exact
    return np.array([f(psi, l) for l in range(-J, J)])


def position_targets(psi: PsiSpec, d_x: DensitySpec) -> np.ndarray:
    g = psi.grid
    l = np.arange(-g.J, g.J)
    return np.asarray(interval_mass(d_x, l * g.dx, (l + 1) * g.dx), dtype=float)


def claim1_error(psi: PsiSpec, pr_p: TargetBinMasses, numeric: bool = False) -> float:
    """Sum over l of |momentum mass of bin l - f_P mass of bin l|."""
    return math.fsum(np.abs(momentum_masses(psi, numeric) - pr_p.pr_p))


def claim2_error(psi: PsiSpec, d_x: DensitySpec, nodes: int | None = None) -> float:
    """Sum over l of |integral of |psi|^2 - integral of f_X| on [l dx, (l+1) dx]."""
    return math.fsum(np.abs(position_bin_masses(psi, nodes) - position_targets(psi, d_x)))


@dataclass(frozen=True)
class CdfErrors:
    sup_x: float
    sup_p: float
    slack_x: float   # largest rise of F or F~ between adjacent probes
    slack_p: float
    tail_x: float    # mass of f_X below -X_b (target cdf starts at -inf)
    tail_p: float
    epsilon_star_x: float
    epsilon_star_p: float


def _probe_slack(f_true: np.ndarray, f_tilde: np.ndarray) -> float:
    return float(max(np.max(np.diff(f_true)), np.max(np.diff(f_tilde))))


def cdf_sup_errors(
    psi: PsiSpec, d_x: DensitySpec, d_p: DensitySpec, probes_per_bin: int = DEFAULT_PROBES
) -> CdfErrors:
    """Largest |F - F~| over an equispaced probe grid, both spaces.

    Between two probes a < b, |F - F~| can exceed its probe values by at
    most max(F(b) - F(a), F~(b) - F~(a)) since both are non-decreasing;
    that bound is returned as the slack.
    """
    if probes_per_bin < 2:
        raise ValueError("probes_per_bin must be >= 2")
    g = psi.grid
    k = 2 * g.J * probes_per_bin
    xs = -g.X_b + np.arange(k + 1) * (g.dx / probes_per_bin)
    xs[-1] = g.X_b
    ps = -g.P_b - 0.5 * g.dp + np.arange(k + 1) * (g.dp / probes_per_bin)
    ps[-1] = g.P_b - 0.5 * g.dp

    fx, fxt = d_x.cdf(xs), cdf_tilde_x(psi, xs)
    fp, fpt = d_p.cdf(ps), cdf_tilde_p(psi, ps)

    q_x = _scan_extremum(d_x.pdf, -g.X_b, g.X_b, maximize=True)
    q_p = _scan_extremum(d_p.pdf, -g.P_b - 0.5 * g.dp, g.P_b, maximize=True)
    eps = g.epsilon
    return CdfErrors(
        sup_x=float(np.max(np.abs(fx - fxt))),
        sup_p=float(np.max(np.abs(fp - fpt))),
        slack_x=_probe_slack(fx, fxt),
        slack_p=_probe_slack(fp, fpt),
        tail_x=float(d_x.cdf(-g.X_b)),
        tail_p=float(d_p.cdf(-g.P_b - 0.5 * g.dp)),
        epsilon_star_x=max(2 * eps, 2 * q_x * g.dx),
        epsilon_star_p=max(2 * eps, 2 * q_p * g.dp),
    )


def parseval_check(psi: PsiSpec) -> tuple[float, float, float]:
    """(integral of |psi|^2 on [-2X_b, 2X_b], sum of a_j^2, sum of all fiber masses)."""
    g = psi.grid
    mass_x = total_mass_on(psi, 2 * g.s * g.J)
    a2 = psi.a.mass
    mass_coeff = math.fsum(a2)
    levels = np.unique(psi.map.m)
    mass_p = math.fsum(momentum_bin_mass_exact(psi, int(l)) for l in levels)
    return mass_x, mass_coeff, mass_p


@dataclass
class ErrorReport:
    claim1_sum: float
    claim2_sum: float
    cdf_sup_x: float
    cdf_sup_p: float
    mass_total: float
    spill_mass: float
    inequality_report: dict
    epsilon: float
    epsilon_star: float
    extra: dict = field(default_factory=dict)

    @property
    def claims_hold(self) -> bool:
        return self.claim1_sum < self.epsilon and self.claim2_sum < self.epsilon

    @property
    def cdf_claims_hold(self) -> bool:
        return (
            self.cdf_sup_x + self.extra["cdf_slack_x"] <= self.epsilon_star
            and self.cdf_sup_p + self.extra["cdf_slack_p"] <= self.epsilon_star
        )

    def to_dict(self) -> dict:
        d = {
            "claim1_sum": self.claim1_sum,
            "claim2_sum": self.claim2_sum,
            "cdf_sup_x": self.cdf_sup_x,
            "cdf_sup_p": self.cdf_sup_p,
            "mass_total": self.mass_total,
            "spill_mass": self.spill_mass,
            "inequality_report": self.inequality_report,
            "epsilon": self.epsilon,
            "epsilon_star": self.epsilon_star,
        }
        d.update(self.extra)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True) + "\n"


@dataclass
class BinTables:
    """Per-bin masses in both spaces (rows of bins.csv)."""

    position_target: np.ndarray
    position_approx: np.ndarray
    position_fine: np.ndarray
    momentum_target: np.ndarray
    momentum_approx: np.ndarray
    momentum_exact: np.ndarray


def bin_tables(c: Construction) -> BinTables:
    psi = c.psi
    k = position_nodes(psi.grid)
    return BinTables(
        position_target=position_targets(psi, c.d_x),
        position_approx=position_bin_masses(psi, k),
        position_fine=position_bin_masses(psi, 2 * k),
        momentum_target=np.asarray(c.targets.pr_p),
        momentum_approx=momentum_masses(psi, numeric=True),
        momentum_exact=momentum_masses(psi),
    )


def build_report(c: Construction, probes_per_bin: int = DEFAULT_PROBES, tables: BinTables | None = None) -> ErrorReport:
    psi, g = c.psi, c.grid
    t = tables if tables is not None else bin_tables(c)
    cdf = cdf_sup_errors(psi, c.d_x, c.d_p, probes_per_bin)
    mass_x, mass_coeff, mass_p = parseval_check(psi)
    spill = momentum_bin_mass_exact(psi, g.J)

    claim1 = math.fsum(np.abs(t.momentum_exact - t.momentum_target))
    claim1_numeric = math.fsum(np.abs(t.momentum_approx - t.momentum_target))
    claim2 = math.fsum(np.abs(t.position_approx - t.position_target))

    matched = [l for l in c.map.matched_bins]
    undershoot = [t.momentum_target[l + g.J] - t.momentum_exact[l + g.J] for l in matched]
    eps_star = c.epsilon_star if c.epsilon_star is not None else max(cdf.epsilon_star_x, cdf.epsilon_star_p)

    extra = {
        "mode": c.mode,
        "grid": g.to_dict(),
        "density_stats": {"Q_x": c.stats.Q_x, "P_x": c.stats.P_x, "P_p": c.stats.P_p, "Qp_x": c.stats.Qp_x},
        "claim1_sum_quadrature": claim1_numeric,
        "momentum_tv": claim1,
        "momentum_max_abs_error": float(np.max(np.abs(t.momentum_approx - t.momentum_target))),
        "momentum_max_abs_error_exact": float(np.max(np.abs(t.momentum_exact - t.momentum_target))),
        "step2_window": g.step2_window,
        "matched_max_undershoot": float(max(undershoot)) if undershoot else 0.0,
        "matched_min_undershoot": float(min(undershoot)) if undershoot else 0.0,
        "fallback_fibers": c.map.fallback_bins,
        "unvisited_fibers": sorted(l for l, how in c.map.closure.items() if how == "unvisited"),
        "cdf_slack_x": cdf.slack_x,
        "cdf_slack_p": cdf.slack_p,
        "cdf_tail_x": cdf.tail_x,
        "cdf_tail_p": cdf.tail_p,
        "epsilon_star_x": cdf.epsilon_star_x,
        "epsilon_star_p": cdf.epsilon_star_p,
        "probes_per_bin": probes_per_bin,
        "parseval": {"mass_x_window": mass_x, "mass_coeff": mass_coeff, "mass_p": mass_p},
        "quadrature": {
            "position_gauss_nodes_per_cell": position_nodes(g),
            "position_doubling_max_change": float(np.max(np.abs(t.position_fine - t.position_approx))),
            "momentum_rule": "midpoint, max(64, |S_l|+1) nodes per bin",
            "momentum_identity_max_gap": float(np.max(np.abs(t.momentum_approx - t.momentum_exact))),
        },
    }
    return ErrorReport(
        claim1_sum=claim1,
        claim2_sum=claim2,
        cdf_sup_x=cdf.sup_x,
        cdf_sup_p=cdf.sup_p,
        mass_total=mass_coeff,
        spill_mass=spill,
        inequality_report=c.inequalities.to_dict(),
        epsilon=g.epsilon,
        epsilon_star=eps_star,
        extra=extra,
    )
