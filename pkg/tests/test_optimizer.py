import math

import numpy as np
import pytest

from smholab.analytics import max_handovers, throughput
from smholab.detector import DetectorConstraints
from smholab.optimizer import (
    InfeasibleError,
    alpha_breakpoints,
    golden_section_max,
    optimize_tau,
    resize,
    saturation_threshold,
    sweep,
    with_idle_probability,
)

from conftest import T, TAU_HO, baseline

TAU_MIN = 0.0110583833698194


def brute(sc, n=100_000, include_edge=False):
    grid = np.linspace(sc.tau_min, T, n + 2)[1:-1]
    if include_edge:
        # the supremum over the open interval may sit at tau_min itself
        grid = np.append(grid, sc.tau_min * (1 + 1e-12))
    vals = np.array([throughput(sc, t) for t in grid])
    i = int(np.argmax(vals))
    return grid[i], vals[i], grid[1] - grid[0]


def test_golden_section():
    x, fx, n = golden_section_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0, xtol=1e-10)
    assert x == pytest.approx(0.3, abs=1e-9)
    assert n > 10


def test_breakpoints_change_alpha(sc10):
    pts = alpha_breakpoints(sc10, TAU_MIN, T)
    assert pts == sorted(pts)
    for t in pts:
        assert max_handovers(sc10, t * (1 - 1e-7)) == max_handovers(sc10, t * (1 + 1e-7)) + 1


@pytest.mark.slow
def test_single_channel_matches_brute_grid():
    sc = baseline(1)
    res = optimize_tau(sc)
    g_tau, g_r, h = brute(sc)
    assert res.feasible
    assert TAU_MIN < res.tau_opt < T
    assert abs(res.tau_opt - g_tau) <= h
    assert res.r_max >= g_r
    assert res.r_max == pytest.approx(g_r, rel=1e-9)


@pytest.mark.slow
def test_ten_channels_matches_brute_grid(sc10):
    res = optimize_tau(sc10)
    _, g_r, _ = brute(sc10, include_edge=True)
    assert res.r_max == pytest.approx(g_r, rel=1e-6)


def test_infeasible():
    sc = baseline(10, gamma=1e-4)
    assert sc.tau_min >= T
    res = optimize_tau(sc)
    assert not res.feasible
    assert math.isnan(res.tau_opt) and math.isnan(res.r_max)
    with pytest.raises(InfeasibleError):
        saturation_threshold(sc)


def test_result_respects_constraint(sc10):
    res = optimize_tau(sc10)
    assert res.tau_min == pytest.approx(TAU_MIN, rel=1e-12)
    assert res.tau_opt > res.tau_min
    assert res.evaluations > 2000


def test_saturation_threshold(sc10):
    assert saturation_threshold(sc10) == 8
    assert math.floor((T - TAU_MIN) / (TAU_MIN + TAU_HO)) + 1 == 8
    assert saturation_threshold(baseline(10, constraints=DetectorConstraints(0.9, 0.1))) == 8


def test_saturation_near_slot_end():
    # push tau_min up against T by lowering the SNR
    lo, hi = 1e-4, 0.01
    for _ in range(80):
        g = math.sqrt(lo * hi)
        if baseline(2, gamma=g).tau_min >= T:
            lo = g
        else:
            hi = g
    sc = baseline(2, gamma=hi)
    assert sc.tau_min < T
    assert saturation_threshold(sc) == 1


def test_doubling_slot():
    sc = baseline(10)
    from dataclasses import replace
    assert saturation_threshold(replace(sc, slot_T=0.2)) == 17


def test_sweep_n_p_saturates():
    rows = sweep(baseline(1), "n_p", range(1, 21))
    r = [row["r_max"] for row in rows]
    assert all(b >= a - 1e-12 for a, b in zip(r, r[1:]))
    n_star = saturation_threshold(baseline(1))
    assert all(x == r[n_star - 1] for x in r[n_star - 1:])
    for n in (1, 4, 12):
        assert r[n - 1] == optimize_tau(resize(baseline(1), n)).r_max


def test_sweep_tau_single():
    sc = baseline(10)
    rows = sweep(sc, "tau", [0.02])
    assert len(rows) == 1
    assert rows[0]["R"] == throughput(sc, 0.02)
    assert rows[0]["alpha"] == max_handovers(sc, 0.02)


def test_sweep_tau_out_of_range_flagged():
    rows = sweep(baseline(2), "tau", [0.15])
    assert rows[0]["feasible"] is False


def test_sweep_p0_increasing():
    rows = sweep(baseline(10), "p0", [0.3, 0.65, 0.9])
    r = [row["r_max"] for row in rows]
    assert r[0] < r[1] < r[2]


def test_sweep_rejects():
    with pytest.raises(ValueError):
        sweep(baseline(2), "tau", [])
    with pytest.raises(ValueError):
        sweep(baseline(2), "gamma", [1])


def test_resize_and_idle():
    sc = resize(baseline(2), 5)
    assert sc.n_p == 5
    assert [c.index for c in sc.channels] == list(range(5))
    assert resize(sc, 3).n_p == 3
    sc2 = with_idle_probability(baseline(4), 0.8)
    assert sc2.idle_probs == pytest.approx([0.8] * 4, abs=1e-12)


def test_fading_objective(sc10):
    res = optimize_tau(sc10, "fading", n_grid=400, mean_gamma_s=1.0, mean_gamma_p=1.0)
    assert res.feasible and res.tau_opt > TAU_MIN
    with pytest.raises(ValueError):
        optimize_tau(sc10, "fading")
    with pytest.raises(ValueError):
        optimize_tau(sc10, "nope")
