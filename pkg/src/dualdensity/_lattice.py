"""Fast evaluation of modulated sinc series on shifted sample lattices.

A series  g(x) = sum_j b_j sinc(x/h - j) exp(2 pi i m_j x/h)  with integer
m_j, evaluated at x = (j0 + u) h for a fixed offset u, becomes

    g = (-1)^j0 sin(pi u)/pi * sum_j [(-1)^j b_j exp(2 pi i m_j u)] / (j0 - j + u)

which is a discrete convolution in j0.  One FFT convolution per offset gives
the series on a whole lattice of subintervals.
"""
from __future__ import annotations

import numpy as np
from scipy.signal import fftconvolve


def _sign(idx: np.ndarray) -> np.ndarray:
    return np.where(idx % 2 == 0, 1.0, -1.0)


def series_on_lattice(
    b: np.ndarray,
    jmin: int,
    u: float,
    lo: int,
    hi: int,
    m: np.ndarray | None = None,
) -> np.ndarray:
    """Values g((j0 + u) h) for j0 = lo .. hi-1.

    ``b[i]`` is the coefficient of node j = jmin + i and ``m`` the optional
    integer modulation per node.  ``u`` is any real offset; u == 0 returns
    the node values exactly.
    """
    b = np.asarray(b)
    n = b.size
    out_len = hi - lo
    if out_len <= 0:
        return np.zeros(0, dtype=complex)
    if u == 0.0:
        out = np.zeros(out_len, dtype=complex)
        a0, a1 = max(lo, jmin), min(hi, jmin + n)
        if a1 > a0:
            out[a0 - lo:a1 - lo] = b[a0 - jmin:a1 - jmin]
        return out

    j = np.arange(jmin, jmin + n)
    c = b * _sign(j)
    if m is not None:
        c = c * np.exp(2j * np.pi * m * u)
    kmin = lo - (jmin + n - 1)
    k = np.arange(kmin, hi - 1 - jmin + 1)
    kern = 1.0 / (k + u)
    conv = fftconvolve(kern, c.astype(complex), mode="valid")
    j0 = np.arange(lo, hi)
    return _sign(j0) * (np.sin(np.pi * u) / np.pi) * conv


def series_direct(b: np.ndarray, jmin: int, x_over_h, m: np.ndarray | None = None) -> np.ndarray:
    """Direct O(N)-per-point evaluation at arbitrary points x/h (reference path).

    Uses the nearest node j0 and offset u = x/h - j0, so the phase
    exp(2 pi i m x/h) reduces to exp(2 pi i m u).  ``m`` must be
    non-decreasing (fibers are contiguous).
    """
    t = np.atleast_1d(np.asarray(x_over_h, dtype=float)).ravel()
    b = np.asarray(b, dtype=float)
    n = b.size
    j = np.arange(jmin, jmin + n)
    c = _sign(j) * b
    j0 = np.rint(t)
    u = t - j0
    if m is None:
        starts, levels = np.array([0]), np.array([0])
    else:
        starts = np.concatenate(([0], np.nonzero(np.diff(m))[0] + 1))
        levels = np.asarray(m)[starts]
    out = np.empty(t.shape, dtype=complex)
    step = max(1, 4_000_000 // max(n, 1))
    for s in range(0, t.size, step):
        uu = u[s:s + step, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            kern = c[None, :] / ((j0[s:s + step, None] - j[None, :]) + uu)
        kern[~np.isfinite(kern)] = 0.0
        per_fiber = np.add.reduceat(kern, starts, axis=1)
        phase = np.exp(2j * np.pi * uu * levels[None, :])
        out[s:s + step] = (per_fiber * phase).sum(axis=1)
    out *= _sign(j0) * np.sin(np.pi * u) / np.pi
    # exact nodes: only the j = j0 term survives
    at_node = u == 0.0
    if np.any(at_node):
        idx = (j0[at_node] - jmin).astype(np.int64)
        inside = (idx >= 0) & (idx < n)
        vals = np.zeros(idx.size, dtype=complex)
        vals[inside] = b[idx[inside]]
        out[at_node] = vals
    return out.reshape(np.shape(x_over_h)) if np.ndim(x_over_h) else out
