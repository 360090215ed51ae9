import math

import numpy as np
import pytest
from scipy import integrate

from dualdensity import distributions as D
from dualdensity import synthesis as S
from dualdensity.construction import Amplitudes, ModulationMap


def _arrays(c):
    g = c.grid
    j = np.arange(g.jmin, -g.jmin)
    return g, j, np.asarray(c.amplitudes.a), np.asarray(c.map.m)


def _psi_brute(c, x):
    g, j, a, m = _arrays(c)
    x = np.asarray(x, float)[:, None]
    return (a / math.sqrt(g.h) * np.sinc(x / g.h - j) * np.exp(2j * np.pi * m / g.h * x)).sum(1)


def _rect_brute(v):
    v = abs(v)
    return 1.0 if v < 0.5 else (0.5 if v == 0.5 else 0.0)


def _psi_hat_brute(c, q):
    g, j, a, m = _arrays(c)
    total = 0j
    for aj, jj, mj in zip(a, j, m):
        v = g.h * q - mj
        r = _rect_brute(v)
        if r:
            total += aj * r * np.exp(-2j * np.pi * jj * v)
    return math.sqrt(g.h) * total


def test_rect():
    assert S.rect(0.0) == 1.0
    assert S.rect(0.5) == S.rect(-0.5) == 0.5
    assert S.rect(0.51) == 0.0
    assert list(S.rect([0.2, -0.7])) == [1.0, 0.0]


def test_position_nodes():
    assert S.position_nodes(type("G", (), {"J": 128})()) == 428
    assert S.position_nodes(type("G", (), {"J": 1})()) == 29


def test_psi_matches_brute_sum(small):
    rng = np.random.default_rng(3)
    xs = rng.uniform(-6, 6, 200)
    assert np.max(np.abs(S.eval_psi(small.psi, xs) - _psi_brute(small, xs))) < 1e-12


def test_psi_interpolates_at_nodes(gg):
    g = gg.grid
    j = np.arange(g.jmin, -g.jmin, 37)
    vals = S.eval_psi(gg.psi, j * g.h)
    assert np.allclose(np.abs(vals) ** 2, D.pdf(gg.d_x, j * g.h), rtol=1e-12, atol=1e-300)
    assert isinstance(S.eval_psi(gg.psi, 0.0), complex)


def test_zero_amplitudes_give_zero_psi(small):
    g = small.grid
    z = S.PsiSpec(g, Amplitudes(np.zeros(g.N), g.jmin), small.map)
    assert np.all(S.eval_psi(z, np.linspace(-3, 3, 11)) == 0)
    assert S.eval_psi_hat(z, 0.3 / g.h) == 0
    assert S.momentum_bin_mass_exact(z, 0) == 0.0


def _unmodulated(c):
    g = c.grid
    flat = ModulationMap(m=np.zeros(g.N, dtype=np.int64), jmin=g.jmin, J=g.J)
    return S.PsiSpec(g, c.amplitudes, flat)


def test_between_nodes_modulated_vs_plain(gg):
    # the plain sinc series tracks sqrt(f_X) closely between nodes; the
    # modulation makes neighbouring fibers interfere, so |psi|^2 only
    # follows f_X on average.
    g = gg.grid
    rng = np.random.default_rng(5)
    xs = (rng.integers(-g.s * g.J // 2, g.s * g.J // 2, 100) + rng.uniform(0.1, 0.9, 100)) * g.h
    f = D.pdf(gg.d_x, xs)
    plain = np.abs(S.eval_psi(_unmodulated(gg), xs)) ** 2
    assert np.max(np.abs(plain - f)) < 1e-6
    mod = np.abs(S.eval_psi(gg.psi, xs)) ** 2
    dev = np.abs(mod - f)
    assert np.median(dev) < 1e-2
    assert np.max(dev) < 0.5
    assert np.median(dev) > 100 * np.max(np.abs(plain - f))


def test_psi_hat_matches_brute_formula(small):
    g = small.grid
    rng = np.random.default_rng(9)
    us = np.concatenate([rng.uniform(-g.J - 1, g.J + 1, 60), np.arange(-g.J, g.J + 1) + 0.5])
    qs = us / g.h
    got = S.eval_psi_hat(small.psi, qs)
    ref = np.array([_psi_hat_brute(small, q) for q in qs])
    assert np.max(np.abs(got - ref)) < 1e-13


def test_psi_hat_outside_windows_is_zero(small):
    g = small.grid
    top = int(small.map.m[-1])
    bottom = int(small.map.m[0])
    qs = np.array([top + 0.6, top + 3.0, bottom - 0.6, -100.0]) / g.h
    assert np.all(S.eval_psi_hat(small.psi, qs) == 0)


def test_psi_hat_half_weight_at_shared_edge(small):
    g = small.grid
    l = int(small.map.m[0])
    edge = (l + 0.5) / g.h
    inner = S._fiber_hat(small.psi, l, np.array([l + 0.5]))[0]
    outer = S._fiber_hat(small.psi, l + 1, np.array([l + 0.5]))[0]
    # each neighbour already carries its half weight
    assert S.eval_psi_hat(small.psi, edge) == pytest.approx(inner + outer, abs=1e-15)
    full = S._fiber_hat(small.psi, l, np.array([l + 0.4999999]))[0]
    assert abs(inner) == pytest.approx(0.5 * abs(full), rel=1e-5)


def test_psi_hat_matches_numeric_fourier_integral(small):
    g = small.grid
    L, K = 32.0, 2**19
    x = np.linspace(-L, L, K + 1)
    vals = np.concatenate([_psi_brute(small, x[i:i + 8192]) for i in range(0, K + 1, 8192)])
    w = np.full(K + 1, x[1] - x[0])
    w[[0, -1]] /= 2
    rng = np.random.default_rng(1)
    centers = rng.integers(int(small.map.m[0]), int(small.map.m[-1]) + 1, 6)
    us = centers + rng.uniform(-0.4, 0.4, 6)
    for q in us / g.h:
        num = np.sum(vals * np.exp(-2j * np.pi * q * x) * w)
        assert abs(num - S.eval_psi_hat(small.psi, q)) < 1e-4


def test_momentum_bin_identity(gg):
    g = gg.grid
    a2 = gg.amplitudes.mass
    for l in (-g.J, -60, -1, 0, 5, 90, g.J - 2):
        lo, hi = gg.map.fiber_slice(l)
        exact = math.fsum(a2[lo:hi])
        assert S.momentum_bin_mass_exact(gg.psi, l) == pytest.approx(exact, abs=1e-15)
        assert S.momentum_bin_mass(gg.psi, l) == pytest.approx(exact, abs=1e-12)


def test_momentum_bin_empty_fiber(gg):
    l = gg.grid.J - 1
    assert gg.map.fiber(l).size == 0
    assert S.momentum_bin_mass(gg.psi, l) == 0.0
    assert S.momentum_bin_mass_exact(gg.psi, l) == 0.0


def test_position_masses_sum(figures):
    for c in figures.values():
        pb = S.position_bin_masses(c.psi)
        assert pb.shape == (2 * c.grid.J,)
        assert abs(pb.sum() - c.amplitudes.mass.sum()) < 1e-3


def test_position_mass_single_bin_matches_vector(gg):
    pb = S.position_bin_masses(gg.psi)
    for l in (-128, -3, 0, 77):
        assert S.position_bin_mass(gg.psi, l) == pytest.approx(pb[l + 128], abs=1e-15)


def test_position_mass_against_adaptive_quadrature(small):
    g = small.grid
    for l in (-3, 0, 2):
        ref, _ = integrate.quad(lambda x: abs(_psi_brute(small, [x])[0]) ** 2,
                                l * g.dx, (l + 1) * g.dx, epsabs=1e-13, limit=200)
        assert S.position_bin_mass(small.psi, l) == pytest.approx(ref, abs=1e-11)


def test_position_mass_shortcut(figures):
    c = figures["exp-gaussian"]
    J = c.grid.J
    full = S.position_bin_masses(c.psi)
    quick = np.array([S.position_bin_mass_shortcut(c.psi, l) for l in range(-J, J)])
    assert np.sum(np.abs(full - quick)) < 0.01


def test_cdf_tilde_x_endpoints_and_monotone(gg):
    g = gg.grid
    assert S.cdf_tilde_x(gg.psi, -g.X_b) == 0.0
    assert S.cdf_tilde_x(gg.psi, g.X_b) == pytest.approx(S.position_bin_masses(gg.psi).sum(), abs=1e-12)
    xs = np.linspace(-g.X_b, g.X_b, 41)
    vals = S.cdf_tilde_x(gg.psi, xs)
    assert np.all(np.diff(vals) >= -1e-15)
    with pytest.raises(ValueError):
        S.cdf_tilde_x(gg.psi, g.X_b + 0.1)


def test_cdf_tilde_x_partial_cell(small):
    g = small.grid
    x0, x1 = 0.3 * g.h, 2.71 * g.h
    ref, _ = integrate.quad(lambda x: abs(_psi_brute(small, [x])[0]) ** 2, x0, x1, epsabs=1e-13)
    assert S.cdf_tilde_x(small.psi, x1) - S.cdf_tilde_x(small.psi, x0) == pytest.approx(ref, abs=1e-11)


def test_cdf_tilde_x_at_zero(gg):
    assert abs(S.cdf_tilde_x(gg.psi, 0.0) - 0.5) < 2 * 0.5 / 128


def test_cdf_tilde_p_endpoints_and_monotone(gg):
    g = gg.grid
    lo, hi = -g.P_b - g.dp / 2, g.P_b - g.dp / 2
    assert abs(S.cdf_tilde_p(gg.psi, lo)) < 1e-15
    total = math.fsum(S.momentum_bin_mass_exact(gg.psi, l) for l in range(-g.J, g.J))
    assert S.cdf_tilde_p(gg.psi, hi) == pytest.approx(total, abs=1e-12)
    vals = S.cdf_tilde_p(gg.psi, np.linspace(lo, hi, 257))
    assert np.all(np.diff(vals) >= -1e-15)
    with pytest.raises(ValueError):
        S.cdf_tilde_p(gg.psi, hi + 0.1)


def test_cdf_tilde_p_partial_bin_against_quadrature(gg):
    g = gg.grid
    l, y = 2, 0.3
    k = 4000
    qn = (l - 0.5 + (np.arange(k) + 0.5) / k * (y + 0.5)) * g.dp
    num = np.sum(g.t * np.abs(S.eval_psi_hat(gg.psi, qn * g.t)) ** 2) * g.dp * (y + 0.5) / k
    got = S.cdf_tilde_p(gg.psi, (l + y) * g.dp) - S.cdf_tilde_p(gg.psi, (l - 0.5) * g.dp)
    assert got == pytest.approx(num, abs=1e-8)
    assert abs(S.cdf_tilde_p(gg.psi, 0.0) - 0.5) < 2 * 0.5 / 128


def test_total_mass_on_window(gg):
    g = gg.grid
    inner = S.total_mass_on(gg.psi, g.s * g.J)
    assert inner == pytest.approx(S.position_bin_masses(gg.psi).sum(), abs=1e-12)
