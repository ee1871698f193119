"""Finite-state Markov model of a Rayleigh-fading link.

The exponential SNR density is cut into K cells; neighbouring cells are
linked through level-crossing rates, which gives a tridiagonal chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .stats import RandomStream

ROW_TOL = 1e-12


class ModelValidityError(ValueError):
    """The level-crossing approximation produced an invalid transition row."""


def equal_probability_thresholds(K: int, mean_snr: float) -> np.ndarray:
    """Thresholds giving every state steady-state mass 1/K."""
    m = np.arange(K)
    th = np.empty(K + 1)
    th[:K] = -mean_snr * np.log1p(-m / K)
    th[0] = 0.0
    th[K] = np.inf
    return th


def conditional_mean_snr(lo: float, hi: float, mean_snr: float) -> float:
    """E[snr | lo <= snr < hi] for exponential snr."""
    a = math.exp(-lo / mean_snr)
    if math.isinf(hi):
        return lo + mean_snr
    b = math.exp(-hi / mean_snr)
    return mean_snr + (lo * a - hi * b) / (a - b)


def log2_midpoint_rates(thresholds: np.ndarray, mean_snr: float) -> np.ndarray:
    return np.array(
        [math.log2(1.0 + conditional_mean_snr(thresholds[i], thresholds[i + 1], mean_snr)) for i in range(len(thresholds) - 1)]
    )


@dataclass(frozen=True)
class FadingModel:
    K: int
    thresholds: np.ndarray
    mean_snr: float
    fd: float
    slot_T: float
    rates: np.ndarray
    _tp: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        th = np.asarray(self.thresholds, dtype=float)
        rates = np.asarray(self.rates, dtype=float)
        object.__setattr__(self, "thresholds", th)
        object.__setattr__(self, "rates", rates)
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if th.shape != (self.K + 1,) or rates.shape != (self.K,):
            raise ValueError("need K+1 thresholds and K rates")
        if th[0] != 0.0 or not np.isinf(th[-1]) or np.any(np.diff(th) <= 0):
            raise ValueError("thresholds must start at 0, increase strictly and end at +inf")
        if np.any(rates < 0):
            raise ValueError("AMC rates must be nonnegative")
        if not (self.mean_snr > 0 and self.fd >= 0 and self.slot_T > 0):
            raise ValueError("mean_snr and slot_T must be positive, fd nonnegative")
        object.__setattr__(self, "_tp", _build_transitions(self))

    @classmethod
    def build(cls, K=11, mean_snr=10.0, fd=0.2, slot_T=0.1, thresholds="equal-probability", rates="log2-midpoint"):
        if isinstance(thresholds, str):
            if thresholds != "equal-probability":
                raise ValueError(f"unknown threshold rule {thresholds!r}")
            thresholds = equal_probability_thresholds(K, mean_snr)
        else:
            thresholds = np.asarray(thresholds, dtype=float)
        if isinstance(rates, str):
            if rates != "log2-midpoint":
                raise ValueError(f"unknown rate rule {rates!r}")
            rates = log2_midpoint_rates(thresholds, mean_snr)
        return cls(K, thresholds, mean_snr, fd, slot_T, rates)

    def with_rates(self, rates) -> "FadingModel":
        return FadingModel(self.K, self.thresholds, self.mean_snr, self.fd, self.slot_T, np.asarray(rates, dtype=float))


def steady_state_probs(m: FadingModel) -> np.ndarray:
    e = np.exp(-m.thresholds / m.mean_snr)
    return e[:-1] - e[1:]


def level_crossing_rate(m: FadingModel, idx: int) -> float:
    if not (0 <= idx <= m.K - 1):
        raise IndexError(f"state index {idx} outside 0..{m.K - 1}")
    ratio = m.thresholds[idx] / m.mean_snr
    return math.sqrt(2.0 * math.pi * ratio) * m.fd * math.exp(-ratio)


def _build_transitions(m: FadingModel) -> np.ndarray:
    K = m.K
    pi = steady_state_probs(m)
    tp = np.zeros((K, K))
    for i in range(K):
        if i <= K - 2:
            tp[i, i + 1] = level_crossing_rate(m, i + 1) * m.slot_T / pi[i]
        if i >= 1:
            tp[i, i - 1] = level_crossing_rate(m, i) * m.slot_T / pi[i]
        off = tp[i].sum()
        if off > 1.0:
            raise ModelValidityError(
                f"state {i}: crossing probabilities sum to {off:.4g} > 1; shrink the slot time or Doppler"
            )
        tp[i, i] = 1.0 - off
    return tp


def transition_matrix(m: FadingModel) -> np.ndarray:
    return m._tp.copy()


def sample_state(m: FadingModel, prev_state: int, rng: RandomStream) -> int:
    if not (0 <= prev_state < m.K):
        raise ValueError(f"invalid state {prev_state!r}")
    row = m._tp[prev_state]
    u = rng.random()
    down = row[prev_state - 1] if prev_state > 0 else 0.0
    if u < down:
        return prev_state - 1
    if u < down + row[prev_state]:
        return prev_state
    return prev_state + 1 if prev_state < m.K - 1 else prev_state


def sample_trajectory(m: FadingModel, n_slots: int, rng: RandomStream, initial: int | None = None) -> np.ndarray:
    """n_slots states, started from the stationary law unless `initial` is given."""
    if initial is None:
        initial = int(np.searchsorted(np.cumsum(steady_state_probs(m)), rng.random(), side="right"))
        initial = min(initial, m.K - 1)
    tp = m._tp
    K = m.K
    down = [tp[i, i - 1] if i > 0 else 0.0 for i in range(K)]
    stay = [down[i] + tp[i, i] for i in range(K)]
    u = rng.random(n_slots).tolist()
    out = np.empty(n_slots, dtype=np.int16)
    state = initial
    out[0] = state
    for t in range(1, n_slots):
        x = u[t]
        if x < down[state]:
            state -= 1
        elif x >= stay[state] and state < K - 1:
            state += 1
        out[t] = state
    return out
