import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualdensity.construction import (
    Amplitudes,
    TargetBinMasses,
    build_modulation_map,
    examples_grid,
)
from oracles import step_through_map


def _inputs(a, pr, n, s, eps):
    grid = examples_grid(n, s, 1.0, 1.0, eps)
    sJ = s * grid.J
    return grid, Amplitudes(np.asarray(a, float), -sJ), TargetBinMasses(np.asarray(pr, float), grid.J)


def _claim1(mp, a2, pr, J):
    got = {l: 0.0 for l in range(-J, J)}
    for mj, w in zip(mp.m, a2):
        if mj < J:
            got[int(mj)] += w
    return sum(abs(got[l] - pr[l + J]) for l in range(-J, J))


def test_hand_worked_example():
    a2 = [0.1] * 6 + [0.2] * 2
    pr = [0.2, 0.2, 0.3, 0.3]
    grid, a, p = _inputs(np.sqrt(a2), pr, n=1, s=2, eps=0.5)
    assert grid.step2_window == pytest.approx(0.05)
    mp = build_modulation_map(a, p, grid)
    assert list(mp.fiber(-2)) == [-4, -3]
    assert list(mp.fiber(-1)) == [-2, -1]
    assert list(mp.fiber(0)) == [0, 1, 2, 3]
    assert mp.fiber(1).size == 0
    assert mp.closure == {-2: "match", -1: "match", 0: "fallback", 1: "unvisited"}
    assert _claim1(mp, a2, pr, 2) == pytest.approx(0.6)


def test_single_bin_absorbs_everything():
    a = np.full(8, 0.5) / np.sqrt(2)  # a^2 = 1/8, total exactly 1
    grid, amp, p = _inputs(a, [1.0, 0.0, 0.0, 0.0], n=1, s=2, eps=0.5)
    mp = build_modulation_map(amp, p, grid)
    assert np.all(mp.m == -2)
    assert mp.closure[-2] == "match"


def test_zero_amplitudes_fall_into_first_bin():
    grid, amp, p = _inputs(np.zeros(8), [0.2, 0.2, 0.3, 0.3], n=1, s=2, eps=0.5)
    mp = build_modulation_map(amp, p, grid)
    assert np.all(mp.m == -2)
    assert mp.closure[-2] == "fallback"


def test_shape_mismatch_rejected():
    grid, amp, p = _inputs(np.zeros(8), [0.25] * 4, n=1, s=2, eps=0.5)
    with pytest.raises(ValueError):
        build_modulation_map(Amplitudes(np.zeros(6), -3), p, grid)


@st.composite
def dyadic_case(draw):
    n = draw(st.integers(1, 2))
    s = draw(st.integers(1, 3))
    J = 2**n
    # a_j = k/32 keeps every partial sum of a_j^2 exact in binary floating point
    ks = draw(st.lists(st.integers(0, 16), min_size=2 * s * J, max_size=2 * s * J))
    prs = draw(st.lists(st.integers(0, 64), min_size=2 * J, max_size=2 * J))
    eps = draw(st.sampled_from([0.0, 0.125, 0.5, 1.0, 4.0]))
    a = np.array(ks, float) / 32
    pr = np.array(prs, float) / 256
    return n, s, a, pr, eps


@settings(max_examples=300, deadline=None)
@given(dyadic_case())
def test_matches_literal_recursion(case):
    n, s, a, pr, eps = case
    grid, amp, p = _inputs(a, pr, n, s, eps)
    mp = build_modulation_map(amp, p, grid)
    m_ref, closure_ref = step_through_map(list(a * a), list(pr), s, grid.J, eps)
    assert [int(v) for v in mp.m] == m_ref
    visited = {l: how for l, how in mp.closure.items() if how != "unvisited"}
    assert visited == closure_ref


@settings(max_examples=300, deadline=None)
@given(dyadic_case())
def test_map_invariants(case):
    n, s, a, pr, eps = case
    grid, amp, p = _inputs(a, pr, n, s, eps)
    J = grid.J
    mp = build_modulation_map(amp, p, grid)
    m = np.asarray(mp.m)
    assert np.all(np.diff(m) >= 0)
    assert m[0] >= -J and m[-1] <= J
    assert not np.any(m == J - 1)
    assert mp.iterations <= 2 * J + 2 * s * J
    sizes = sum(mp.fiber(l).size for l in range(-J, J + 1))
    assert sizes == m.size
    a2 = a * a
    for l in mp.matched_bins:
        lo, hi = mp.fiber_slice(l)
        got = a2[lo:hi].sum()
        assert 0 <= pr[l + J] - got <= grid.step2_window
        nxt = a2[hi] if hi < m.size else np.inf
        assert got + nxt > pr[l + J]


def test_map_on_gg_grid(gg):
    mp, g = gg.map, gg.grid
    assert mp.fallback_bins == []
    a2 = gg.amplitudes.mass
    for l in mp.matched_bins:
        lo, hi = mp.fiber_slice(l)
        assert 0 <= gg.targets[l] - a2[lo:hi].sum() <= g.step2_window
