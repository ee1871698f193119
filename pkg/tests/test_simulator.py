import numpy as np
import pytest

from smholab import simulator
from smholab.analytics import Scenario, avg_throughput
from smholab.detector import DetectorConstraints
from smholab.fading import FadingModel
from smholab.simulator import SimConfig, compare_policies, run
from smholab.traffic import CHAIN_STATIONARY, OnOffChannel
from smholab.wbho import IDLE_FAVORING, WbhoConfig

from conftest import FS, GAMMA, T, TAU_HO, baseline


def hetero(n, seed=3):
    rng = np.random.default_rng(seed)
    return [OnOffChannel(float(a), float(b), i) for i, (a, b) in enumerate(rng.uniform(0.1, 0.9, size=(n, 2)))]


def fades(n):
    return tuple(FadingModel.build(K=11, mean_snr=10.0, fd=0.2, slot_T=T) for _ in range(n))


def test_perfect_detector_is_deterministic(monkeypatch):
    clean = Scenario(T, TAU_HO, [OnOffChannel(1 - 1e-13, 1e-13)], DetectorConstraints(0.9, 0.1), GAMMA, FS,
                     c1_over_c0=0.1, idle_convention=CHAIN_STATIONARY)
    monkeypatch.setattr(simulator, "operating_point", lambda sc, tau: (1.0, 0.0))
    for engine in ("auto", "loop"):
        s = run(SimConfig(clean, n_slots=500, n_replications=4, seed=1), 0.02, engine=engine)
        assert s.avg_throughput == pytest.approx(1.0 - 0.02 / T, rel=1e-14)
        assert s.se_throughput == 0.0
        assert s.avg_handovers == 0.0 and s.slots_blocked == 0 and s.collision_slots == 0


@pytest.mark.slow
@pytest.mark.parametrize("tau", [0.012, 0.03])
def test_smho_matches_closed_forms(tau):
    sc = baseline(10, convention=CHAIN_STATIONARY)
    s = run(SimConfig(sc, n_slots=100_000, n_replications=10, seed=11), tau)
    b = avg_throughput(sc, tau)
    assert abs(s.avg_throughput - b.total) < 3 * s.se_throughput
    assert abs(s.avg_handovers - b.g_bar) < 3 * s.se_handovers
    assert s.avg_sensing_time == pytest.approx(b.expected_sensing_time, rel=0.01)


def test_single_channel_policies_agree():
    sc = baseline(1, convention=CHAIN_STATIONARY)
    fm = fades(1)
    a = SimConfig(sc, "wbho", WbhoConfig(), fm, n_slots=800, n_replications=5, seed=4)
    b = SimConfig(sc, "smho", None, fm, n_slots=800, n_replications=5, seed=4)
    for tau in (0.015, 0.04):
        ra, rb = run(a, tau), run(b, tau)
        assert np.array_equal(ra.rep_throughput, rb.rep_throughput)
        assert np.array_equal(ra.rep_handovers, rb.rep_handovers)


@pytest.mark.parametrize("policy", ["smho", "wbho"])
def test_identical_policies_zero_difference(policy):
    sc = Scenario(T, TAU_HO, hetero(5), DetectorConstraints(0.9, 0.1), GAMMA, FS, c1_over_c0=0.1,
                  idle_convention=CHAIN_STATIONARY)
    cfg = SimConfig(sc, policy, fading=fades(5), n_slots=400, n_replications=4, seed=8)
    for r in compare_policies(cfg, cfg, [0.015, 0.05]):
        assert r.diff_throughput == 0.0 and r.diff_handovers == 0.0


@pytest.mark.parametrize("policy", ["smho", "wbho"])
def test_long_sensing_allows_one_channel(policy):
    sc = Scenario(T, TAU_HO, hetero(6), DetectorConstraints(0.9, 0.1), GAMMA, FS, c1_over_c0=0.1,
                  idle_convention=CHAIN_STATIONARY)
    s = run(SimConfig(sc, policy, fading=fades(6), n_slots=2000, n_replications=3, seed=2), 0.55 * T)
    assert s.max_senses <= 1
    assert s.avg_handovers == 0.0


def test_deterministic_under_seed():
    sc = baseline(4, convention=CHAIN_STATIONARY)
    cfg = SimConfig(sc, "wbho", fading=fades(4), n_slots=300, n_replications=3, seed=99)
    a, b = run(cfg, 0.02), run(cfg, 0.02)
    assert np.array_equal(a.rep_throughput, b.rep_throughput)
    c = run(SimConfig(sc, "wbho", fading=fades(4), n_slots=300, n_replications=3, seed=100), 0.02)
    assert not np.array_equal(a.rep_throughput, c.rep_throughput)


@pytest.mark.parametrize("fading", [False, True])
def test_loop_engine_matches_vectorized(fading):
    sc = Scenario(T, TAU_HO, hetero(7), DetectorConstraints(0.9, 0.1), GAMMA, FS, c1_over_c0=0.1,
                  idle_convention=CHAIN_STATIONARY)
    cfg = SimConfig(sc, fading=fades(7) if fading else None, n_slots=1500, n_replications=3, seed=5)
    for tau in (0.005, 0.012, 0.04):
        v, l = run(cfg, tau), run(cfg, tau, engine="loop")
        assert np.array_equal(v.rep_throughput, l.rep_throughput)
        assert np.array_equal(v.rep_handovers, l.rep_handovers)
        assert (v.slots_blocked, v.collision_slots, v.max_senses) == (l.slots_blocked, l.collision_slots, l.max_senses)
        assert v.avg_sensing_time == l.avg_sensing_time


def test_handovers_bounded_by_cap():
    sc = baseline(10, convention=CHAIN_STATIONARY, p0=0.1)
    s = run(SimConfig(sc, "wbho", WbhoConfig(weight_form=IDLE_FAVORING), fades(10), n_slots=1000, n_replications=2), 0.02)
    from smholab.analytics import max_handovers
    assert s.max_senses <= max_handovers(sc, 0.02) + 1
    assert s.slots_blocked > 0


def test_wbho_idle_favoring_beats_smho():
    chans = hetero(10, seed=21)
    sc = Scenario(T, TAU_HO, chans, DetectorConstraints(0.9, 0.1), GAMMA, FS, c1_over_c0=0.1,
                  idle_convention=CHAIN_STATIONARY)
    fm = fades(10)
    a = SimConfig(sc, "wbho", WbhoConfig(weight_form=IDLE_FAVORING), fm, n_slots=1200, n_replications=20, seed=7)
    b = SimConfig(sc, "smho", None, fm, n_slots=1200, n_replications=20, seed=7)
    for r in compare_policies(a, b, [0.012, 0.03]):
        assert r.diff_throughput > 2 * r.se_diff_throughput
        assert r.diff_handovers <= 0


def test_validation():
    sc = baseline(2)
    with pytest.raises(ValueError):
        SimConfig(sc, "other")
    with pytest.raises(ValueError):
        SimConfig(sc, n_slots=0)
    with pytest.raises(ValueError):
        SimConfig(sc, fading=fades(3))
    with pytest.raises(ValueError):
        run(SimConfig(sc), T)
    with pytest.raises(ValueError):
        run(SimConfig(sc), 0.01, engine="gpu")
    with pytest.raises(ValueError):
        compare_policies(SimConfig(sc, seed=1), SimConfig(sc, seed=2), [0.01])
    with pytest.raises(ValueError):
        compare_policies(SimConfig(sc), SimConfig(baseline(3)), [0.01])
    with pytest.raises(ValueError):
        compare_policies(SimConfig(sc), SimConfig(sc, fading=fades(2)), [0.01])
