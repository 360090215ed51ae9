"""The synthesised wave function, its Fourier transform and derived masses.

psi(x) = sum_j sqrt(f_X(j h)) sinc(x/h - j) exp(2 pi i M_j x),  h = dx/s,
M_j = m_j / h.  Its transform is evaluated in closed form: every sample
contributes a rectangular window of width 1/h centred on M_j, so on the
interior of momentum bin l only the fiber S_l is active.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import correlate

from . import _lattice
from .construction import Amplitudes, GridParams, ModulationMap, _gauss_nodes

# Gauss nodes per sample subinterval for |psi|^2; |psi|^2 carries phase
# differences of up to 2J cycles per subinterval, so this is raised with J
# (see position_nodes).
MIN_POSITION_NODES = 16
MIN_MOMENTUM_NODES = 64


def position_nodes(grid: GridParams) -> int:
    """Gauss-Legendre order that resolves exp(2 pi i k u), |k| <= 2J, on [0, 1]."""
    return max(MIN_POSITION_NODES, int(math.ceil(math.pi * (2 * grid.J + 1) / 2)) + 24)


@dataclass(frozen=True)
class PsiSpec:
    grid: GridParams
    a: Amplitudes
    map: ModulationMap
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        n = self.grid.N
        if self.a.a.size != n or self.map.m.size != n:
            raise ValueError("amplitude / modulation vectors do not match 2sJ")

    @property
    def b(self) -> np.ndarray:
        """Series coefficients sqrt(f_X(j h)) = a_j sqrt(s/dx)."""
        if "b" not in self._cache:
            self._cache["b"] = self.a.a / math.sqrt(self.grid.h)
        return self._cache["b"]


def rect(q):
    """1 on (-1/2, 1/2), 1/2 at the endpoints, 0 elsewhere."""
    q = np.abs(np.asarray(q, dtype=float))
    out = np.where(q < 0.5, 1.0, np.where(q == 0.5, 0.5, 0.0))
    return float(out) if out.ndim == 0 else out


def eval_psi(psi: PsiSpec, x):
    g = psi.grid
    out = _lattice.series_direct(psi.b, g.jmin, np.asarray(x, dtype=float) / g.h, psi.map.m)
    return complex(out[0]) if np.ndim(x) == 0 else out


def _fiber_hat(psi: PsiSpec, l: int, u: np.ndarray) -> np.ndarray:
    """Contribution of fiber S_l to psi_hat at u = h q (window already known active)."""
    lo, hi = psi.map.fiber_slice(l)
    out = np.zeros(u.shape, dtype=complex)
    if hi <= lo:
        return out
    a = psi.a.a[lo:hi]
    j = np.arange(lo, hi) + psi.map.jmin
    y = u - l
    w = rect(y)
    step = max(1, 4_000_000 // (hi - lo))
    for s in range(0, u.size, step):
        ph = np.exp(-2j * np.pi * np.outer(y[s:s + step], j))
        out[s:s + step] = ph @ a
    return math.sqrt(psi.grid.h) * w * out


def eval_psi_hat(psi: PsiSpec, q):
    """Closed-form transform sqrt(h) sum_j a_j R(h(q - M_j)) exp(-2 pi i j h (q - M_j))."""
    qa = np.atleast_1d(np.asarray(q, dtype=float))
    u = qa * psi.grid.h
    m0 = np.rint(u).astype(np.int64)
    out = np.zeros(qa.shape, dtype=complex)
    lo_m, hi_m = int(psi.map.m[0]), int(psi.map.m[-1])
    for mm in np.unique(m0):
        sel = np.nonzero(m0 == mm)[0]
        uu = u[sel]
        # a window edge shared with the neighbouring fiber
        for cand in (mm - 1, mm, mm + 1):
            if cand < lo_m or cand > hi_m:
                continue
            act = np.abs(uu - cand) <= 0.5
            if np.any(act):
                idx = sel[act]
                out[idx] += _fiber_hat(psi, int(cand), u[idx])
    return complex(out[0]) if np.ndim(q) == 0 else out


# -- momentum space ---------------------------------------------------------


def momentum_bin_mass_exact(psi: PsiSpec, l: int) -> float:
    lo, hi = psi.map.fiber_slice(l)
    a = psi.a.a[lo:hi]
    return math.fsum(a * a)


def momentum_bin_mass(psi: PsiSpec, l: int, nodes: int | None = None) -> float:
    """Quadrature of t |psi_hat(q t)|^2 over [(l - 1/2) dp, (l + 1/2) dp].

    On the open bin the integrand is a trigonometric polynomial in q/dp with
    integer frequencies below |S_l|, so the K-point midpoint rule with
    K >= max(64, |S_l|) is exact up to rounding.
    """
    g = psi.grid
    lo, hi = psi.map.fiber_slice(l)
    k = nodes if nodes is not None else max(MIN_MOMENTUM_NODES, hi - lo + 1)
    qn = (l - 0.5 + (np.arange(k) + 0.5) / k) * g.dp
    vals = g.t * np.abs(eval_psi_hat(psi, qn * g.t)) ** 2
    return math.fsum(vals) * g.dp / k


def _fiber_autocorr(psi: PsiSpec, l: int) -> np.ndarray:
    key = ("acorr", l)
    if key not in psi._cache:
        lo, hi = psi.map.fiber_slice(l)
        a = psi.a.a[lo:hi]
        if a.size == 0:
            c = np.zeros(1)
        else:
            c = correlate(a, a, mode="full", method="direct")[a.size - 1:]
        psi._cache[key] = c
    return psi._cache[key]


def _partial_bin(psi: PsiSpec, l: int, y: float) -> float:
    """Integral of t|psi_hat|^2 from the left edge of bin l to (l + y) dp, y in [-1/2, 1/2]."""
    c = _fiber_autocorr(psi, l)
    d = np.arange(1, c.size)
    return c[0] * (y + 0.5) + math.fsum(c[1:] * np.sin(2 * np.pi * d * y) / (np.pi * d))


def _momentum_cumulative(psi: PsiSpec) -> np.ndarray:
    if "mcum" not in psi._cache:
        J = psi.grid.J
        masses = [momentum_bin_mass_exact(psi, l) for l in range(-J, J)]
        psi._cache["mcum"] = np.concatenate(([0.0], np.cumsum(masses)))
    return psi._cache["mcum"]


def cdf_tilde_p(psi: PsiSpec, p):
    """Running integral of t|psi_hat(qt)|^2 from -P_b - dp/2."""
    g = psi.grid
    pa = np.atleast_1d(np.asarray(p, dtype=float))
    lo_p, hi_p = -g.P_b - 0.5 * g.dp, g.P_b - 0.5 * g.dp
    if np.any(pa < lo_p - 1e-12 * g.P_b) or np.any(pa > hi_p + 1e-12 * g.P_b):
        raise ValueError(f"p outside [{lo_p}, {hi_p}]")
    cum = _momentum_cumulative(psi)
    out = np.empty(pa.shape)
    for i, pv in enumerate(pa):
        qp = pv / g.dp
        l = min(max(int(math.floor(qp + 0.5)), -g.J), g.J - 1)
        y = min(max(qp - l, -0.5), 0.5)
        out[i] = cum[l + g.J] + _partial_bin(psi, l, y)
    return float(out[0]) if np.ndim(p) == 0 else out


# -- position space ---------------------------------------------------------


def _cell_masses(psi: PsiSpec, lo: int, hi: int, nodes: int) -> np.ndarray:
    """Integral of |psi|^2 over each sample cell [j0 h, (j0+1) h], j0 = lo .. hi-1."""
    key = ("cells", lo, hi, nodes)
    if key not in psi._cache:
        g = psi.grid
        acc = np.zeros(hi - lo)
        for u, w in zip(*_gauss_nodes(nodes)):
            v = _lattice.series_on_lattice(psi.b, g.jmin, float(u), lo, hi, psi.map.m)
            acc += w * (v.real * v.real + v.imag * v.imag)
        acc *= g.h
        acc.flags.writeable = False
        psi._cache[key] = acc
    return psi._cache[key]


def position_bin_masses(psi: PsiSpec, nodes: int | None = None) -> np.ndarray:
    """Integral of |psi|^2 over [l dx, (l+1) dx] for l = -J .. J-1."""
    g = psi.grid
    k = nodes if nodes is not None else position_nodes(g)
    cells = _cell_masses(psi, g.jmin, -g.jmin, k)
    return cells.reshape(2 * g.J, g.s).sum(axis=1)


def position_bin_mass(psi: PsiSpec, l: int, nodes: int | None = None) -> float:
    return float(position_bin_masses(psi, nodes)[l + psi.grid.J])


def position_bin_mass_shortcut(psi: PsiSpec, l: int) -> float:
    """|psi((l + 1/2) dx)|^2 dx, the cheap midpoint estimate."""
    g = psi.grid
    return abs(eval_psi(psi, (l + 0.5) * g.dx)) ** 2 * g.dx


def _partial_cells(psi: PsiSpec, j0: np.ndarray, v: float, nodes: int) -> np.ndarray:
    """Integral of |psi|^2 over [j0 h, (j0 + v) h] for one fractional offset v."""
    g = psi.grid
    gx, gw = _gauss_nodes(nodes)
    acc = np.zeros(j0.size)
    if j0.size <= 4:
        for u, w in zip(gx, gw):
            vals = _lattice.series_direct(psi.b, g.jmin, j0 + v * u, psi.map.m)
            acc += w * np.abs(vals) ** 2
    else:
        lo, hi = int(j0.min()), int(j0.max()) + 1
        for u, w in zip(gx, gw):
            vals = _lattice.series_on_lattice(psi.b, g.jmin, float(v * u), lo, hi, psi.map.m)
            acc += w * np.abs(vals[j0 - lo]) ** 2
    return acc * v * g.h


def cdf_tilde_x(psi: PsiSpec, x, nodes: int | None = None):
    """Running integral of |psi|^2 from -X_b.

    Whole sample cells come from the cached cell masses; the final partial
    cell is integrated with the same Gauss rule.  Arguments within 1e-9 of a
    sample node are snapped to it.
    """
    g = psi.grid
    k = nodes if nodes is not None else position_nodes(g)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < -g.X_b * (1 + 1e-12)) or np.any(xa > g.X_b * (1 + 1e-12)):
        raise ValueError(f"x outside [{-g.X_b}, {g.X_b}]")
    cells = _cell_masses(psi, g.jmin, -g.jmin, k)
    cum = np.concatenate(([0.0], np.cumsum(cells)))
    tt = xa / g.h
    near = np.rint(tt)
    snap = np.abs(tt - near) < 1e-9
    j0 = np.where(snap, near, np.floor(tt)).astype(np.int64)
    j0 = np.clip(j0, g.jmin, -g.jmin)
    v = np.where(snap, 0.0, tt - j0)
    out = cum[j0 - g.jmin].copy()
    partial = ~snap & (j0 < -g.jmin)
    if np.any(partial):
        vr = np.round(v, 12)
        for vv in np.unique(vr[partial]):
            sel = np.nonzero(partial & (vr == vv))[0]
            out[sel] += _partial_cells(psi, j0[sel], float(vv), k)
    return float(out[0]) if np.ndim(x) == 0 else out


def total_mass_on(psi: PsiSpec, half_width_cells: int, nodes: int | None = None) -> float:
    """Integral of |psi|^2 over [-W h, W h] with W = half_width_cells."""
    k = nodes if nodes is not None else position_nodes(psi.grid)
    return math.fsum(_cell_masses(psi, -half_width_cells, half_width_cells, k))
