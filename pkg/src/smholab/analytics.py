"""Closed-form performance of sequential handover (SMHO).

Channels are sensed in index order each slot until one is declared idle or
the per-slot handover cap is reached. Detection is pinned at pd_min and the
false-alarm probability follows from the sensing time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .detector import DetectorConstraints, false_alarm_at_target_pd, min_sensing_time
from .stats import integrate_semi_infinite
from .traffic import EQ2_LITERAL, IDLE_CONVENTIONS, OnOffChannel, steady_state_idle

# guards the floor in the handover cap against (T - tau)/(tau + tau_ho) landing a hair under an integer
_FLOOR_EPS = 1e-9


def capacities(gamma_s: float, gamma_p: float) -> tuple[float, float]:
    """SU capacity with the channel idle and with PU interference present."""
    return math.log2(1.0 + gamma_s), math.log2(1.0 + gamma_s / (1.0 + gamma_p))


@dataclass(frozen=True)
class Scenario:
    """Immutable experiment definition.

    Capacities come either from (gamma_s, gamma_p) or, in ratio mode, from
    `c1_over_c0` with C0 = 1.
    """

    slot_T: float
    tau_ho: float
    channels: tuple[OnOffChannel, ...]
    constraints: DetectorConstraints
    gamma: float
    fs: float
    gamma_s: float | None = None
    gamma_p: float | None = None
    c1_over_c0: float | None = None
    idle_convention: str = EQ2_LITERAL
    _idle: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        if not (0.0 < self.tau_ho < self.slot_T):
            raise ValueError("need 0 < tau_ho < slot_T")
        if len(self.channels) < 1:
            raise ValueError("at least one primary channel is required")
        if not (self.gamma > 0 and self.fs > 0):
            raise ValueError("gamma and fs must be positive")
        if self.idle_convention not in IDLE_CONVENTIONS:
            raise ValueError(f"unknown idle convention {self.idle_convention!r}")
        if self.c1_over_c0 is None:
            if self.gamma_s is None or self.gamma_p is None:
                raise ValueError("give gamma_s and gamma_p, or c1_over_c0")
            if not (self.gamma_s > 0 and self.gamma_p > 0):
                raise ValueError("gamma_s and gamma_p must be positive so that 0 < C1 < C0")
        elif not (0.0 < self.c1_over_c0 < 1.0):
            raise ValueError("c1_over_c0 must lie in (0, 1)")
        idle = np.array([steady_state_idle(ch, self.idle_convention) for ch in self.channels])
        object.__setattr__(self, "_idle", idle)

    @property
    def n_p(self) -> int:
        return len(self.channels)

    @property
    def c0(self) -> float:
        if self.c1_over_c0 is not None:
            return 1.0
        return capacities(self.gamma_s, self.gamma_p)[0]

    @property
    def c1(self) -> float:
        if self.c1_over_c0 is not None:
            return self.c1_over_c0
        return capacities(self.gamma_s, self.gamma_p)[1]

    @property
    def idle_probs(self) -> np.ndarray:
        return self._idle.copy()

    @property
    def tau_min(self) -> float:
        return min_sensing_time(self.constraints, self.gamma, self.fs).tau

    def with_channels(self, channels) -> "Scenario":
        return replace(self, channels=tuple(channels))


@dataclass(frozen=True)
class ThroughputBreakdown:
    total: float
    per_handover_terms: np.ndarray
    alpha: int
    g_bar: float
    expected_sensing_time: float
    pfa: float
    pd: float


def operating_point(sc: Scenario, tau: float) -> tuple[float, float]:
    """(pd, pfa) with detection pinned at pd_min."""
    pd = sc.constraints.pd_min
    return pd, false_alarm_at_target_pd(pd, tau, sc.gamma, sc.fs)


def busy_probability(ch, pfa: float, pd: float, idle_convention: str = EQ2_LITERAL) -> float:
    """Probability a channel is declared busy. `ch` is an OnOffChannel or its idle probability."""
    p0 = steady_state_idle(ch, idle_convention) if isinstance(ch, OnOffChannel) else float(ch)
    return pfa * p0 + pd * (1.0 - p0)


def busy_vector(sc: Scenario, tau: float) -> np.ndarray:
    pd, pfa = operating_point(sc, tau)
    return pfa * sc._idle + pd * (1.0 - sc._idle)


def max_handovers(sc: Scenario, tau: float) -> int:
    if not (0.0 < tau < sc.slot_T):
        raise ValueError(f"sensing time {tau} must lie in (0, T={sc.slot_T})")
    budget = math.floor((sc.slot_T - tau) / (tau + sc.tau_ho) + _FLOOR_EPS)
    return min(budget, sc.n_p - 1)


def avg_handovers(q, alpha: int) -> float:
    """Mean handovers per slot for per-channel busy probabilities q[0] = q_1, q[1] = q_2, ..."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if alpha == 0:
        return 0.0
    q = np.asarray(q, dtype=float)
    if q.size < alpha + 1:
        raise ValueError(f"need at least alpha+1 = {alpha + 1} busy probabilities, got {q.size}")
    g = 0.0
    prod = 1.0
    for m in range(1, alpha):
        prod *= q[m - 1]
        g += m * (1.0 - q[m]) * prod
    prod *= q[alpha - 1]
    return g + alpha * prod


def avg_sensing_time(g_bar: float, tau: float, tau_ho: float) -> float:
    if g_bar < 0:
        raise ValueError("g_bar must be nonnegative")
    return tau + g_bar * (tau + tau_ho)


def elapsed_time(m: int, tau: float, tau_ho: float) -> float:
    """Time spent before transmitting on the (m+1)-th channel."""
    return tau + m * (tau + tau_ho)


def per_handover_rate(sc: Scenario, m: int, tau: float, pfa: float, pd: float) -> float:
    """Rate earned when the SU transmits on channel m (0-based) after m handovers."""
    et = elapsed_time(m, tau, sc.tau_ho)
    if et > sc.slot_T:
        raise ValueError(f"elapsed time {et} exceeds the slot")
    frac = 1.0 - et / sc.slot_T
    p0 = sc._idle[m]
    return sc.c0 * p0 * frac * (1.0 - pfa) + sc.c1 * (1.0 - p0) * frac * (1.0 - pd)


def _terms(sc: Scenario, tau: float, alpha: int, q: np.ndarray, pd: float, pfa: float, c0: float, c1: float):
    p0 = sc._idle[: alpha + 1]
    m = np.arange(alpha + 1)
    t1 = c1 * (1.0 - p0) * (1.0 - pd) + c0 * p0 * (1.0 - pfa)
    reach = np.concatenate(([1.0], np.cumprod(q[:alpha])))
    frac = 1.0 - (tau + m * (tau + sc.tau_ho)) / sc.slot_T
    return t1 * reach * frac


def avg_throughput(sc: Scenario, tau: float) -> ThroughputBreakdown:
    alpha = max_handovers(sc, tau)
    pd, pfa = operating_point(sc, tau)
    q = busy_vector(sc, tau)
    terms = _terms(sc, tau, alpha, q, pd, pfa, sc.c0, sc.c1)
    g = avg_handovers(q, alpha)
    return ThroughputBreakdown(
        total=float(terms.sum()),
        per_handover_terms=terms,
        alpha=alpha,
        g_bar=g,
        expected_sensing_time=avg_sensing_time(g, tau, sc.tau_ho),
        pfa=pfa,
        pd=pd,
    )


def throughput(sc: Scenario, tau: float) -> float:
    return avg_throughput(sc, tau).total


def throughput_recurrence_check(sc: Scenario, tau: float, k: int, q=None, atol: float = 1e-12) -> bool:
    """Check R^(k+1) = R^(k) + r^(k+1) * q_1 ... q_(k+1).

    Both partial sums are built directly from their summands; the right-hand
    side goes through per_handover_rate and the (optionally supplied) busy
    probabilities.
    """
    alpha = max_handovers(sc, tau)
    if not (0 <= k < alpha):
        raise ValueError(f"need 0 <= k < alpha = {alpha}")
    pd, pfa = operating_point(sc, tau)
    q_true = busy_vector(sc, tau)
    q_rec = q_true if q is None else np.asarray(q, dtype=float)

    def partial(n):
        total = 0.0
        for m in range(n + 1):
            reach = 1.0
            for j in range(m):
                reach *= q_true[j]
            total += per_handover_rate(sc, m, tau, pfa, pd) * reach
        return total

    lhs = partial(k + 1)
    rhs = partial(k) + per_handover_rate(sc, k + 1, tau, pfa, pd) * float(np.prod(q_rec[: k + 1]))
    return abs(lhs - rhs) <= atol


@lru_cache(maxsize=256)
def expected_capacities(mean_gamma_s: float, mean_gamma_p: float) -> tuple[float, float]:
    """E[C0], E[C1] for independent exponential SU and PU SNRs."""
    e_c0 = integrate_semi_infinite(lambda gs: math.log2(1.0 + gs), mean_gamma_s)
    e_c1 = integrate_semi_infinite(
        lambda gp: integrate_semi_infinite(lambda gs: math.log2(1.0 + gs / (1.0 + gp)), mean_gamma_s),
        mean_gamma_p,
    )
    return e_c0, e_c1


def fading_avg_throughput(sc: Scenario, tau: float, mean_gamma_s: float, mean_gamma_p: float) -> float:
    """Throughput averaged over Rayleigh-faded SU and PU SNRs.

    R is linear in (C0, C1) and nothing else depends on the SNRs, so the
    double integral reduces to the two expected capacities. Capacities are
    always taken from the SNRs here, ratio mode or not.
    """
    if not (mean_gamma_s > 0 and mean_gamma_p > 0):
        raise ValueError("mean SNRs must be positive")
    alpha = max_handovers(sc, tau)
    pd, pfa = operating_point(sc, tau)
    q = busy_vector(sc, tau)
    idle_part = _terms(sc, tau, alpha, q, pd, pfa, 1.0, 0.0).sum()
    busy_part = _terms(sc, tau, alpha, q, pd, pfa, 0.0, 1.0).sum()
    e_c0, e_c1 = expected_capacities(float(mean_gamma_s), float(mean_gamma_p))
    return float(e_c0 * idle_part + e_c1 * busy_part)
