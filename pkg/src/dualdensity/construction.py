"""Discretisation parameters, amplitudes and the frequency-assignment map."""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _lattice
from .distributions import (
    AssumptionViolation,
    AssumptionWarning,
    DensitySpec,
    DensityStats,
    integrate_pdf,
    interval_mass,
)

BOUND_LATTICE = 0.5
BOUND_LIMIT = 1e6
MAX_N = 14
MAX_S = 2**20
L2_NODES = 8


class ConstructionError(RuntimeError):
    pass


class BudgetUnattainable(ConstructionError):
    """No admissible s up to MAX_S for the requested accuracy."""


@dataclass(frozen=True)
class GridParams:
    epsilon: float
    n: int
    J: int
    X_b: float
    P_b: float
    dx: float
    dp: float
    s: int | None = None
    t: float | None = None

    @property
    def h(self) -> float:
        """Sample spacing dx/s."""
        return self.dx / self.s

    @property
    def N(self) -> int:
        """Number of samples, 2 s J."""
        return 2 * self.s * self.J

    @property
    def jmin(self) -> int:
        return -self.s * self.J

    @property
    def step2_window(self) -> float:
        return self.epsilon / (2 * (2 * self.J + 1))

    def with_s(self, s: int) -> "GridParams":
        s = int(s)
        if s < 1:
            raise ValueError("s must be >= 1")
        return dataclasses.replace(self, s=s, t=s / (self.dx * self.dp))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class Amplitudes:
    a: np.ndarray  # index i <-> j = i - s J
    jmin: int

    @property
    def mass(self) -> np.ndarray:
        return self.a * self.a

    def __len__(self):
        return self.a.size


@dataclass(frozen=True)
class TargetBinMasses:
    pr_p: np.ndarray  # index i <-> l = i - J
    J: int

    def __getitem__(self, l: int) -> float:
        return float(self.pr_p[l + self.J])


@dataclass(frozen=True)
class ModulationMap:
    """m_j per sample plus the fiber bookkeeping.

    ``closure`` maps each momentum bin l in [-J, J-1] to how the
    recursion left it: "match" (step II acceptance), "fallback" (step II
    found no z), or "unvisited" (the recursion stopped first).
    """

    m: np.ndarray
    jmin: int
    J: int
    closure: dict = field(default_factory=dict)
    iterations: int = 0

    def fiber(self, l: int) -> np.ndarray:
        """Indices j with m_j == l (the set S_l)."""
        lo, hi = self.fiber_slice(l)
        return np.arange(lo, hi) + self.jmin

    def fiber_slice(self, l: int) -> tuple[int, int]:
        lo = int(np.searchsorted(self.m, l, side="left"))
        hi = int(np.searchsorted(self.m, l, side="right"))
        return lo, hi

    @property
    def fallback_bins(self) -> list[int]:
        return sorted(l for l, how in self.closure.items() if how == "fallback")

    @property
    def matched_bins(self) -> list[int]:
        return sorted(l for l, how in self.closure.items() if how == "match")


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    lhs: float
    rhs: float
    passed: bool

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass(frozen=True)
class InequalityReport:
    s: int
    checks: tuple[InequalityCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> InequalityCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "log_base": "e",
            "all_passed": self.passed,
            "checks": {
                c.name: {"lhs": c.lhs, "rhs": c.rhs, "slack": c.slack, "passed": c.passed}
                for c in self.checks
            },
        }


INEQUALITY_NAMES = (
    "amplitude_bound",
    "log_amplitude_bound",
    "sinc_l2_bound",
    "derivative_bound",
    "riemann_defect",
)


# -- bounds and grid --------------------------------------------------------


def _tails_ok(d: DensitySpec, b: float, budget: float) -> bool:
    return float(d.cdf(-b)) < budget and float(d.sf(b)) < budget


def _smallest_lattice_bound(d: DensitySpec, budget: float) -> float:
    top = int(BOUND_LIMIT / BOUND_LATTICE)
    if not _tails_ok(d, top * BOUND_LATTICE, budget):
        raise ConstructionError("tail condition unattainable")
    lo, hi = 0, top  # _tails_ok(lo) false (b=0 never works for eps<1), _tails_ok(hi) true
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _tails_ok(d, mid * BOUND_LATTICE, budget):
            hi = mid
        else:
            lo = mid
    return hi * BOUND_LATTICE


def check_positive_on_box(d: DensitySpec, lo: float, hi: float, strict: bool = True, what: str = "density") -> bool:
    xs = np.linspace(lo, hi, 4097)
    ok = bool(np.all(d.pdf(xs) > 0))
    if not ok:
        msg = f"positivity assumption violated on the truncation box for {what} on [{lo:g}, {hi:g}]"
        if strict:
            raise AssumptionViolation(msg)
        warnings.warn(msg, AssumptionWarning, stacklevel=3)
    return ok


def select_bounds(d_x: DensitySpec, d_p: DensitySpec, epsilon: float, strict: bool = True) -> tuple[float, float]:
    """Smallest half-integer bounds with both tails below epsilon/16."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    budget = epsilon / 16
    X_b = _smallest_lattice_bound(d_x, budget)
    P_b = _smallest_lattice_bound(d_p, budget)
    check_positive_on_box(d_x, -X_b, X_b, strict, "f_X")
    check_positive_on_box(d_p, -P_b, P_b, strict, "f_P")
    return X_b, P_b


def make_grid(X_b: float, P_b: float, n: int, epsilon: float, d_p: DensitySpec, max_n: int = MAX_N) -> GridParams:
    """Grid for J = 2**n, raising n until F_P(P_b - dp/2) > 1 - epsilon/16."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (X_b > 0 and P_b > 0):
        raise ValueError("bounds must be positive")
    while True:
        J = 2**n
        dp = P_b / J
        if float(d_p.sf(P_b - 0.5 * dp)) < epsilon / 16:
            return GridParams(epsilon=float(epsilon), n=n, J=J, X_b=float(X_b), P_b=float(P_b),
                              dx=X_b / J, dp=dp)
        if n >= max_n:
            raise ConstructionError(f"n escalation failed (reached n={max_n})")
        n += 1


def examples_grid(n: int, s: int, X_b: float, P_b: float, epsilon: float) -> GridParams:
    """Grid with all parameters forced by the caller (no escalation, no s search)."""
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must lie in [1, {MAX_N}]")
    J = 2**n
    g = GridParams(epsilon=float(epsilon), n=n, J=J, X_b=float(X_b), P_b=float(P_b), dx=X_b / J, dp=P_b / J)
    return g.with_s(s)


# -- s selection ------------------------------------------------------------


def _gauss_nodes(k: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(k)
    return 0.5 * (x + 1.0), 0.5 * w


def sinc_l2_error(d_x: DensitySpec, grid: GridParams, s: int, nodes: int = L2_NODES) -> float:
    """L2 distance between the plain sinc series of sqrt(f_X) and sqrt(f_X).

    Integrated over [-2 X_b, 2 X_b] with ``nodes`` Gauss points per sample
    subinterval; the remainder outside that window is not included.
    """
    J = grid.J
    h = grid.dx / s
    jmin = -s * J
    j = np.arange(jmin, -jmin)
    b = np.sqrt(d_x.pdf(j * h))
    lo, hi = 2 * jmin, -2 * jmin
    cells = np.arange(lo, hi)
    total = 0.0
    for u, w in zip(*_gauss_nodes(nodes)):
        phi = _lattice.series_on_lattice(b, jmin, float(u), lo, hi).real
        diff = phi - np.sqrt(d_x.pdf((cells + u) * h))
        total += w * math.fsum(diff * diff)
    return math.sqrt(total * h)


def riemann_defect(d_x: DensitySpec, grid: GridParams, s: int) -> float:
    """Integral of f_X over the box minus its left Riemann sum at spacing dx/s."""
    h = grid.dx / s
    sJ = s * grid.J
    chunk = 1 << 20
    parts = [
        math.fsum(d_x.pdf(np.arange(lo, min(lo + chunk, sJ)) * h))
        for lo in range(-sJ, sJ, chunk)
    ]
    return integrate_pdf(d_x, -grid.X_b, grid.X_b, 1e-12) - math.fsum(parts) * h


def check_s_inequalities(
    s: int, grid: GridParams, stats: DensityStats, d_x: DensitySpec, skip_expensive: bool = False
) -> InequalityReport:
    """Evaluate the five sufficient conditions on s (natural logarithms).

    With ``skip_expensive`` the array-based checks (Riemann defect, then L2)
    are only computed once the closed-form ones pass; skipped checks are
    stored as failing with lhs=inf.
    """
    eps, J, dx = grid.epsilon, grid.J, grid.dx
    poly = (2 * J + 1) ** 4
    amp = dx / s * stats.Q_x
    log2sJ = math.log(2 * s * J)
    checks = [
        InequalityCheck("amplitude_bound", amp, eps / (4 * J), amp < eps / (4 * J)),
    ]
    lhs = 4 * math.sqrt(amp) * (3 + 2 * log2sJ) ** 3
    checks.append(InequalityCheck("log_amplitude_bound", lhs, eps / (4 * poly), lhs < eps / (4 * poly)))
    lhs_d = dx * dx / s * J * abs(stats.Qp_x) * math.sqrt(stats.Q_x / stats.P_x) * (2 + 2 * log2sJ) ** 2
    deriv = InequalityCheck("derivative_bound", lhs_d, eps / (4 * poly), lhs_d <= eps / (4 * poly))
    rhs_l2 = eps / (8 * poly)
    closed_form_ok = all(c.passed for c in (*checks, deriv))
    if skip_expensive and not closed_form_ok:
        riem = InequalityCheck("riemann_defect", math.inf, eps / 8, False)
        l2 = InequalityCheck("sinc_l2_bound", math.inf, rhs_l2, False)
        return InequalityReport(s=s, checks=(*checks, l2, deriv, riem))
    defect = abs(riemann_defect(d_x, grid, s))
    riem = InequalityCheck("riemann_defect", defect, eps / 8, defect <= eps / 8)
    if skip_expensive and not riem.passed:
        l2 = InequalityCheck("sinc_l2_bound", math.inf, rhs_l2, False)
    else:
        err = sinc_l2_error(d_x, grid, s)
        l2 = InequalityCheck("sinc_l2_bound", err, rhs_l2, err < rhs_l2)
    return InequalityReport(s=s, checks=(*checks, l2, deriv, riem))


def select_s(grid: GridParams, stats: DensityStats, d_x: DensitySpec, max_s: int = MAX_S) -> GridParams:
    """Smallest admissible s: doubling search, then a downward scan.

    The downward scan stops at the first failing candidate, so the returned
    s passes and s - 1 fails.
    """
    s = 1
    while not check_s_inequalities(s, grid, stats, d_x, skip_expensive=True).passed:
        s *= 2
        if s > max_s:
            rep = check_s_inequalities(max_s, grid, stats, d_x, skip_expensive=True)
            failing = ", ".join(
                f"{c.name} (lhs={c.lhs:.3g}, rhs={c.rhs:.3g})" for c in rep.checks if not c.passed
            )
            raise BudgetUnattainable(
                f"accuracy budget unattainable at this n (n={grid.n}, epsilon={grid.epsilon:g}); "
                f"failing at s={max_s}: {failing}"
            )
    while s > 1 and check_s_inequalities(s - 1, grid, stats, d_x, skip_expensive=True).passed:
        s -= 1
    return grid.with_s(s)


# -- amplitudes and targets -------------------------------------------------


def compute_amplitudes(d_x: DensitySpec, grid: GridParams) -> Amplitudes:
    if grid.s is None:
        raise ValueError("grid has no s yet")
    j = np.arange(grid.jmin, -grid.jmin)
    f = d_x.pdf(j * grid.h)
    if np.any(f < 0) or not np.all(np.isfinite(f)):
        raise ValueError("malformed density: negative or non-finite pdf value")
    a = np.sqrt(grid.h * f)
    a.flags.writeable = False
    return Amplitudes(a=a, jmin=grid.jmin)


def target_bin_masses(d_p: DensitySpec, grid: GridParams) -> TargetBinMasses:
    """f_P mass on the half-shifted bins [(l - 1/2) dp, (l + 1/2) dp], l = -J .. J-1."""
    l = np.arange(-grid.J, grid.J)
    pr = interval_mass(d_p, (l - 0.5) * grid.dp, (l + 0.5) * grid.dp)
    pr = np.asarray(pr, dtype=float)
    pr.flags.writeable = False
    return TargetBinMasses(pr_p=pr, J=grid.J)


# -- the recursion ----------------------------------------------------------


def build_modulation_map(a: Amplitudes, pr_p: TargetBinMasses, grid: GridParams) -> ModulationMap:
    """Assign every sample j to a momentum bin m_j.

    Step II takes the unique z with pr_x(z) <= pr_p[l] < pr_x(z+1) and
    accepts it when the undershoot is within epsilon/(2(2J+1)); otherwise it
    falls back to k = sJ - j, which absorbs every remaining sample.
    Samples beyond sJ - 1 count as zero mass and pr_x(sJ - j + 1) = +inf.
    """
    J, sJ = grid.J, grid.s * grid.J
    n = 2 * sJ
    if a.a.size != n or pr_p.pr_p.size != 2 * J:
        raise ValueError("amplitudes / target masses do not match the grid")
    window = grid.step2_window
    mass = a.a * a.a
    cum = np.concatenate(([0.0], np.cumsum(mass), [0.0]))
    cum[-1] = cum[-2]  # a_{sJ} := 0

    m = np.full(n, J, dtype=np.int64)
    closure = {l: "unvisited" for l in range(-J, J)}
    j, l = -sJ, -J
    limit = 2 * J + 2 * sJ
    it = 0
    while True:
        it += 1
        if it > limit:
            raise AssertionError("modulation recursion exceeded its iteration bound")
        i = j + sJ
        target = pr_p[l]
        # prefix masses pr_x(z) for z = -1 .. sJ - j, stored at offset z + 1
        prefix = cum[i:] - cum[i]
        zp1 = int(np.searchsorted(prefix, target, side="right")) - 1
        z = zp1 - 1
        under = target - prefix[zp1]
        # the crossing condition holds by construction of z (or via +inf at the end)
        if 0.0 <= under <= window:
            k = z
            closure[l] = "match"
        else:
            k = sJ - j
            closure[l] = "fallback"
        if k >= 0:
            m[i:min(i + k + 1, n)] = l
        j += k + 1
        l += 1
        if j >= sJ:
            break
        if l + 1 == J:
            m[j + sJ:] = J
            break
    m.flags.writeable = False
    return ModulationMap(m=m, jmin=-sJ, J=J, closure=closure, iterations=it)
