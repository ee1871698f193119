import math
import warnings

import numpy as np
import pytest

from smholab.detector import (
    DetectorConstraints,
    DetectorParams,
    SmallSampleWarning,
    db_to_linear,
    detection_probability,
    false_alarm_at_target_pd,
    false_alarm_probability,
    min_sensing_time,
    threshold_for_pd,
)

from oracles import bisect, q_by_quadrature

GAMMA = 0.01
FS = 6e6
TAU_MIN_BISECT = 0.0110583833698194  # bisection of the pinned-pd false alarm at 0.1
TAU_MIN_BISECT_G02 = 0.00279176811812309
LAMBDA_TABLE1 = 1.00497523555  # threshold for pd 0.9 at tau*fs = 66350


def params(tau=0.01, lam=1.0, gamma=GAMMA, fs=FS):
    return DetectorParams(tau=tau, lambda_norm=lam, gamma=gamma, fs=fs)


def test_gamma_from_db():
    assert db_to_linear(-20.0) == pytest.approx(0.01, rel=1e-15)


def test_pd_at_mean_threshold_is_half():
    assert detection_probability(params(lam=1 + GAMMA)) == pytest.approx(0.5, abs=1e-12)


def test_pd_tends_to_one_for_low_threshold():
    assert detection_probability(params(lam=1e-9)) > 1 - 1e-12


def test_pd_roundtrip_baseline():
    tau = 0.011058
    lam = threshold_for_pd(0.9, tau, GAMMA, FS)
    assert detection_probability(params(tau, lam)) == pytest.approx(0.9, abs=1e-9)


def test_pfa_at_unit_threshold():
    assert false_alarm_probability(params(lam=1.0)) == 0.5
    assert false_alarm_probability(params(lam=1.0, fs=2 * FS)) == 0.5


def test_pfa_via_threshold_matches_closed_form():
    tau = 0.011058
    lam = threshold_for_pd(0.9, tau, GAMMA, FS)
    direct = false_alarm_probability(params(tau, lam))
    # oracle: quadrature Q of the closed-form argument
    beta = -1.2815515655446 * math.sqrt(1 + 2 * GAMMA)
    oracle = q_by_quadrature(beta + GAMMA * math.sqrt(tau * FS))
    assert direct == pytest.approx(oracle, rel=1e-9)
    assert direct == pytest.approx(0.1, abs=1e-4)


def test_pfa_below_pd_when_signal_present():
    p = params(lam=1.003)
    assert false_alarm_probability(p) < detection_probability(p)


def test_threshold_values():
    assert threshold_for_pd(0.5, 0.01, GAMMA, FS) == pytest.approx(1 + GAMMA, abs=1e-15)
    assert threshold_for_pd(0.9, 1e6, GAMMA, FS) == pytest.approx(1 + GAMMA, abs=1e-6)
    assert threshold_for_pd(0.9, 66350 / FS, GAMMA, FS) == pytest.approx(LAMBDA_TABLE1, abs=1e-10)


@pytest.mark.parametrize("pd", [0.5, 0.9, 0.99])
@pytest.mark.parametrize("tau_ms", [1, 10, 50])
def test_threshold_roundtrip(pd, tau_ms):
    tau = tau_ms * 1e-3
    lam = threshold_for_pd(pd, tau, GAMMA, FS)
    assert detection_probability(params(tau, lam)) == pytest.approx(pd, abs=1e-9)


def test_pinned_pfa_examples():
    assert false_alarm_at_target_pd(0.5, 1e-16, GAMMA, FS) == pytest.approx(0.5, abs=1e-6)
    v = false_alarm_at_target_pd(0.9, 0.011058, GAMMA, FS)
    assert v == pytest.approx(0.100007836225, rel=1e-9)
    assert false_alarm_at_target_pd(0.9, 0.040, GAMMA, FS) < 0.1


def test_pinned_pfa_strictly_decreasing():
    taus = np.linspace(1e-4, 0.1, 400)
    vals = np.array([false_alarm_at_target_pd(0.9, t, GAMMA, FS) for t in taus])
    assert np.all(np.diff(vals) < 0)


def test_min_sensing_time_baseline():
    c = DetectorConstraints(0.9, 0.1)
    oracle = bisect(lambda t: q_by_quadrature(-1.2815515655446 * math.sqrt(1.02) + GAMMA * math.sqrt(t * FS)) - 0.1, 1e-6, 0.1)
    assert oracle == pytest.approx(TAU_MIN_BISECT, rel=1e-9)
    r = min_sensing_time(c, GAMMA, FS)
    assert not r.unconstrained
    assert r.tau == pytest.approx(TAU_MIN_BISECT, rel=1e-9)
    assert r.tau == pytest.approx(11.06e-3, abs=0.01e-3)
    assert false_alarm_at_target_pd(0.9, r.tau, GAMMA, FS) == pytest.approx(0.1, abs=1e-9)


def test_min_sensing_time_doubling_snr():
    c = DetectorConstraints(0.9, 0.1)
    t1 = min_sensing_time(c, 0.01, FS).tau
    t2 = min_sensing_time(c, 0.02, FS).tau
    assert t2 == pytest.approx(TAU_MIN_BISECT_G02, rel=1e-9)
    assert t1 / t2 == pytest.approx(4.0, rel=0.02)


def test_constraints_invariant():
    with pytest.raises(ValueError):
        DetectorConstraints(0.5, 0.5)
    with pytest.raises(ValueError):
        DetectorConstraints(0.1, 0.9)


def test_unconstrained_flag():
    # with pd_min below 1/2 and a strong signal, Q^-1(pfa_max) <= beta: met at any sensing time
    r = min_sensing_time(DetectorConstraints(0.45, 0.44), 1.0, FS)
    assert r.unconstrained and r.tau == 0.0


def test_lambda_ordering():
    tau = 0.01
    low, high = params(tau, 1.002), params(tau, 1.006)
    assert detection_probability(low) > detection_probability(high)
    assert false_alarm_probability(low) > false_alarm_probability(high)


def test_small_sample_warning():
    with pytest.warns(SmallSampleWarning):
        params(tau=1e-5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        params(tau=1e-3)


@pytest.mark.parametrize("kw", [dict(tau=0.0), dict(fs=-1.0), dict(gamma=0.0), dict(tau=1e-8)])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        params(**kw)
