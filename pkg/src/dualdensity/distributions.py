"""Built-in probability densities plus the quadrature and extrema helpers
the construction needs.

Three families are supported: gaussian, exponential (shifted, with a jump
at the support start) and finite gaussian mixtures.  Every density carries a
closed-form pdf, cdf and pdf derivative.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

import numpy as np
from scipy import optimize, special

if TYPE_CHECKING:  # pragma: no cover
    from .construction import GridParams

SQRT_2PI = math.sqrt(2.0 * math.pi)

DEFAULT_TOL = 1e-12
SIMPSON_MAX_DEPTH = 60
SCAN_POINTS = 2**17
# threshold below which a density is treated as "zero" in relaxed mode
RELAXED_FLOOR = 1e-30


class AssumptionViolation(ValueError):
    """A density does not meet the regularity/positivity requirements."""


class AssumptionWarning(UserWarning):
    """Same as AssumptionViolation, demoted to a warning (examples mode)."""


class SmoothnessWarning(UserWarning):
    """pdf derivative requested at a point where the pdf is not differentiable."""


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class DensitySpec:
    """An immutable univariate density.

    ``kind`` is one of ``"gaussian"``, ``"exponential"`` or
    ``"gaussian-mixture"``; ``params`` holds the family parameters as a
    tuple of floats (or tuples of floats for mixtures).
    """

    kind: str
    params: tuple
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind == "gaussian":
            mean, std = self.params
            if not std > 0:
                raise ValueError("stddev must be positive")
        elif self.kind == "exponential":
            rate, start = self.params
            if not rate > 0:
                raise ValueError("rate must be positive")
        elif self.kind == "gaussian-mixture":
            weights, means, stds = self.params
            if not (len(weights) == len(means) == len(stds)) or not weights:
                raise ValueError("mixture components must have equal, non-zero length")
            if any(w < 0 for w in weights) or abs(math.fsum(weights) - 1.0) > 1e-12:
                raise ValueError("mixture weights must be non-negative and sum to 1")
            if any(not s > 0 for s in stds):
                raise ValueError("stddevs must be positive")
        else:
            raise ValueError(f"unknown density kind {self.kind!r}")

    # -- closed forms -----------------------------------------------------

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            mean, std = self.params
            z = (x - mean) / std
            return np.exp(-0.5 * z * z) / (std * SQRT_2PI)
        if self.kind == "exponential":
            rate, start = self.params
            inside = x >= start
            # clamp the exponent so values outside the support do not overflow
            arg = np.where(inside, x - start, 0.0)
            return np.where(inside, rate * np.exp(-rate * arg), 0.0)
        out = np.zeros_like(x)
        for w, m, s in zip(*self.params):
            z = (x - m) / s
            out = out + w * np.exp(-0.5 * z * z) / (s * SQRT_2PI)
        return out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            mean, std = self.params
            return special.ndtr((x - mean) / std)
        if self.kind == "exponential":
            rate, start = self.params
            arg = np.where(x >= start, x - start, 0.0)
            return np.where(x >= start, -np.expm1(-rate * arg), 0.0)
        out = np.zeros_like(x)
        for w, m, s in zip(*self.params):
            out = out + w * special.ndtr((x - m) / s)
        return out

    def sf(self, x):
        """Upper tail mass, accurate where cdf(x) is close to 1."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            mean, std = self.params
            return special.ndtr(-(x - mean) / std)
        if self.kind == "exponential":
            rate, start = self.params
            arg = np.where(x >= start, x - start, 0.0)
            return np.where(x >= start, np.exp(-rate * arg), 1.0)
        out = np.zeros_like(x)
        for w, m, s in zip(*self.params):
            out = out + w * special.ndtr(-(x - m) / s)
        return out

    def pdf_derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            mean, std = self.params
            z = (x - mean) / std
            return -z / std * np.exp(-0.5 * z * z) / (std * SQRT_2PI)
        if self.kind == "exponential":
            rate, start = self.params
            if np.any(x == start):
                warnings.warn(
                    f"exponential pdf is not differentiable at {start}; "
                    "returning the right-hand derivative",
                    SmoothnessWarning,
                    stacklevel=2,
                )
            inside = x >= start
            arg = np.where(inside, x - start, 0.0)
            return np.where(inside, -rate * rate * np.exp(-rate * arg), 0.0)
        out = np.zeros_like(x)
        for w, m, s in zip(*self.params):
            z = (x - m) / s
            out = out - w * z / s * np.exp(-0.5 * z * z) / (s * SQRT_2PI)
        return out

    @property
    def kinks(self) -> tuple[float, ...]:
        """Points where the pdf is discontinuous."""
        if self.kind == "exponential":
            return (float(self.params[1]),)
        return ()


def gaussian(mean: float = 0.0, stddev: float = 1.0) -> DensitySpec:
    return DensitySpec("gaussian", (float(mean), float(stddev)), f"gaussian({mean:g},{stddev:g})")


def exponential(rate: float = 1.0, start: float = 0.0) -> DensitySpec:
    return DensitySpec("exponential", (float(rate), float(start)), f"exponential({rate:g},{start:g})")


def gaussian_mixture(weights, means, stddevs) -> DensitySpec:
    params = (
        tuple(float(w) for w in weights),
        tuple(float(m) for m in means),
        tuple(float(s) for s in stddevs),
    )
    return DensitySpec("gaussian-mixture", params, "mixture")


def bimodal_mixture() -> DensitySpec:
    """(4/sqrt(2 pi)) [0.75 exp(-8(x+1/2)^2) + 0.25 exp(-8(x-1/2)^2)].

    exp(-8 u^2) is a gaussian kernel with stddev 1/4, so this is a proper
    two-component mixture.
    """
    return gaussian_mixture((0.75, 0.25), (-0.5, 0.5), (0.25, 0.25))


# -- module-level operations ---------------------------------------------


def pdf(d: DensitySpec, x):
    out = d.pdf(x)
    return float(out) if np.ndim(out) == 0 else out


def cdf(d: DensitySpec, x):
    out = d.cdf(x)
    return float(out) if np.ndim(out) == 0 else out


def pdf_derivative(d: DensitySpec, x):
    """Closed-form derivative; at an exponential kink, the right-hand one (with a SmoothnessWarning)."""
    out = d.pdf_derivative(x)
    return float(out) if np.ndim(out) == 0 else out


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    max_depth: int = SIMPSON_MAX_DEPTH,
) -> float:
    """Adaptive Simpson quadrature with Richardson correction.

    Raises QuadratureError if some panel still fails the local error test
    at ``max_depth`` bisections.
    """
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    # explicit stack: (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a0, b0, fa0, fm0, fb0, s0, tol0, depth = stack.pop()
        m0 = 0.5 * (a0 + b0)
        lm, rm = 0.5 * (a0 + m0), 0.5 * (m0 + b0)
        flm, frm = f(lm), f(rm)
        left = (m0 - a0) / 6.0 * (fa0 + 4.0 * flm + fm0)
        right = (b0 - m0) / 6.0 * (fm0 + 4.0 * frm + fb0)
        delta = left + right - s0
        if abs(delta) <= 15.0 * tol0:
            total += left + right + delta / 15.0
        elif depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson did not converge on [{a!r}, {b!r}] "
                f"(stuck near [{a0!r}, {b0!r}] at depth {depth})"
            )
        else:
            stack.append((a0, m0, fa0, flm, fm0, left, 0.5 * tol0, depth + 1))
            stack.append((m0, b0, fm0, frm, fb0, right, 0.5 * tol0, depth + 1))
    return total


def integrate_pdf(
    d: DensitySpec, a: float, b: float, tol: float = DEFAULT_TOL, method: str = "auto"
) -> float:
    """Probability mass of ``d`` on [a, b].

    ``method="auto"`` uses the closed-form cdf (all built-in kinds have one);
    ``method="quadrature"`` forces adaptive Simpson, split at any jump of the
    pdf.
    """
    if not a <= b:
        raise ValueError(f"integrate_pdf needs a <= b, got [{a}, {b}]")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if a == b:
        return 0.0
    if method == "auto":
        return float(interval_mass(d, a, b))
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")

    edges = [a] + [k for k in d.kinks if a < k < b] + [b]
    f = lambda x: float(d.pdf(x))  # noqa: E731
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if d.kind == "exponential" and hi <= d.params[1]:
            pieces.append(0.0)
            continue
        pieces.append(adaptive_simpson(f, lo, hi, tol / len(edges)))
    return math.fsum(pieces)


def interval_mass(d: DensitySpec, a, b):
    """Vectorised cdf(b) - cdf(a), using the upper tail where that is more accurate."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lower = d.cdf(b) - d.cdf(a)
    upper = d.sf(a) - d.sf(b)
    use_upper = d.cdf(a) > 0.5
    return np.maximum(np.where(use_upper, upper, lower), 0.0)


# -- extrema ---------------------------------------------------------------


@dataclass(frozen=True)
class DensityStats:
    Q_x: float   # max f_X on [-X_b, X_b]
    P_x: float   # min f_X on [-X_b, X_b]
    P_p: float   # min f_P on [-P_b - dp/2, P_b]
    Qp_x: float  # max |f_X'| on [-X_b, X_b]


def _scan_extremum(g: Callable, lo: float, hi: float, maximize: bool, points: int = SCAN_POINTS) -> float:
    xs = np.linspace(lo, hi, points)
    vals = g(xs)
    i = int(np.argmax(vals) if maximize else np.argmin(vals))
    best = float(vals[i])
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, points - 1)]
    if b > a:
        sign = -1.0 if maximize else 1.0
        res = optimize.minimize_scalar(
            lambda x: sign * float(g(x)), bounds=(a, b), method="bounded",
            options={"xatol": 1e-12 * max(1.0, abs(a), abs(b))},
        )
        cand = float(g(res.x))
        best = max(best, cand) if maximize else min(best, cand)
    return best


def _positive_subbox(d: DensitySpec, lo: float, hi: float) -> tuple[float, float]:
    xs = np.linspace(lo, hi, SCAN_POINTS)
    ok = np.nonzero(d.pdf(xs) > RELAXED_FLOOR)[0]
    if ok.size == 0:
        return lo, hi
    return float(xs[ok[0]]), float(xs[ok[-1]])


def density_stats(d_x: DensitySpec, d_p: DensitySpec, grid: "GridParams", relaxed: bool = False) -> DensityStats:
    """Extrema of the two densities on the truncation boxes.

    Dense scan of 2**17 points, refined by a bounded scalar search around the
    best sample.  With ``relaxed=True`` (examples mode) positivity failures
    are warnings and P_x, P_p, Q'_x are taken over the sub-box where the
    density exceeds 1e-30.
    """
    xlo, xhi = -grid.X_b, grid.X_b
    plo, phi = -grid.P_b - 0.5 * grid.dp, grid.P_b

    Q_x = _scan_extremum(d_x.pdf, xlo, xhi, maximize=True)
    if relaxed:
        sxlo, sxhi = _positive_subbox(d_x, xlo, xhi)
        splo, sphi = _positive_subbox(d_p, plo, phi)
    else:
        sxlo, sxhi, splo, sphi = xlo, xhi, plo, phi
    P_x = _scan_extremum(d_x.pdf, sxlo, sxhi, maximize=False)
    P_p = _scan_extremum(d_p.pdf, splo, sphi, maximize=False)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmoothnessWarning)
        Qp_x = _scan_extremum(lambda x: np.abs(d_x.pdf_derivative(x)), sxlo, sxhi, maximize=True)
        # one-sided derivative at a kink is a supremum the scan only approaches
        for k in d_x.kinks:
            if xlo <= k <= xhi:
                Qp_x = max(Qp_x, float(abs(d_x.pdf_derivative(k))))

    full_px = P_x if not relaxed else _scan_extremum(d_x.pdf, xlo, xhi, maximize=False)
    full_pp = P_p if not relaxed else _scan_extremum(d_p.pdf, plo, phi, maximize=False)
    if full_px <= 0 or full_pp <= 0:
        msg = "positivity assumption violated on the truncation box"
        if not relaxed:
            raise AssumptionViolation(msg)
        warnings.warn(msg, AssumptionWarning, stacklevel=2)
    return DensityStats(Q_x=Q_x, P_x=P_x, P_p=P_p, Qp_x=Qp_x)
