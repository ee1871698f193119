"""Slot-level Monte Carlo of SMHO and WBHO spectrum handover.

Every replication draws its PU trajectories, sensing noise and fading
trajectories from dedicated sub-streams keyed by (replication, channel,
purpose). Two configurations that share a seed therefore see the same
channel realizations and differ only in their decisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fading as fad
from . import traffic
from .analytics import Scenario, max_handovers, operating_point
from .fading import FadingModel
from .stats import RandomStream
from .wbho import WbhoConfig, build_sensing_sequence, handover_trigger

SMHO = "smho"
WBHO = "wbho"
POLICIES = (SMHO, WBHO)

_PU, _SENSE, _FADE = 0, 1, 2
_TIME_TOL = 1e-12


@dataclass(frozen=True)
class SimConfig:
    scenario: Scenario
    policy: str = SMHO
    wbho: WbhoConfig | None = None
    fading: tuple[FadingModel, ...] | None = None
    n_slots: int = 1200
    n_replications: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.n_slots < 1 or self.n_replications < 1:
            raise ValueError("n_slots and n_replications must be positive")
        if self.fading is not None:
            object.__setattr__(self, "fading", tuple(self.fading))
            if len(self.fading) != self.scenario.n_p:
                raise ValueError("need one fading model per primary channel")
        if self.policy == WBHO and self.wbho is None:
            object.__setattr__(self, "wbho", WbhoConfig())


@dataclass(frozen=True)
class ReplicationResult:
    throughput: float
    handovers: float
    sensing_time: float
    slots_blocked: int
    collision_slots: int
    max_senses: int


@dataclass(frozen=True)
class SimSummary:
    avg_throughput: float
    se_throughput: float
    avg_handovers: float
    se_handovers: float
    avg_sensing_time: float
    slots_blocked: int
    collision_slots: int
    max_senses: int
    n_slots: int
    n_replications: int
    rep_throughput: np.ndarray = field(repr=False)
    rep_handovers: np.ndarray = field(repr=False)

    @classmethod
    def reduce(cls, reps: list[ReplicationResult], n_slots: int) -> "SimSummary":
        thr = np.array([r.throughput for r in reps])
        hos = np.array([r.handovers for r in reps])
        n = len(reps)
        return cls(
            avg_throughput=float(thr.mean()),
            se_throughput=_se(thr),
            avg_handovers=float(hos.mean()),
            se_handovers=_se(hos),
            avg_sensing_time=float(np.mean([r.sensing_time for r in reps])),
            slots_blocked=sum(r.slots_blocked for r in reps),
            collision_slots=sum(r.collision_slots for r in reps),
            max_senses=max(r.max_senses for r in reps),
            n_slots=n_slots,
            n_replications=n,
            rep_throughput=thr,
            rep_handovers=hos,
        )


def _se(x: np.ndarray) -> float:
    return float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan


def _draws(cfg: SimConfig, rep: int):
    base = RandomStream(cfg.seed)
    sc = cfg.scenario
    n = cfg.n_slots
    pu = np.stack([traffic.sample_trajectory(ch, n, base.substream(rep, k, _PU)) for k, ch in enumerate(sc.channels)])
    sense = np.stack([base.substream(rep, k, _SENSE).random(n) for k in range(sc.n_p)])
    fade = None
    if cfg.fading is not None:
        fade = np.stack([fad.sample_trajectory(fm, n, base.substream(rep, k, _FADE)) for k, fm in enumerate(cfg.fading)])
    return pu, sense, fade


def _rates(cfg: SimConfig, pu, fade):
    """Per-(channel, slot) rate earned on a full slot, by true PU state."""
    sc = cfg.scenario
    if fade is None:
        return np.where(pu == traffic.BUSY, sc.c1, sc.c0)
    amc = np.stack([fm.rates[fade[k]] for k, fm in enumerate(cfg.fading)])
    return np.where(pu == traffic.BUSY, amc * (sc.c1 / sc.c0), amc)


def _weight_models(cfg: SimConfig):
    if cfg.fading is not None:
        return cfg.fading
    # AWGN ablation: equal rates, so weights rank on absence probability alone
    flat = FadingModel(1, np.array([0.0, np.inf]), 1.0, 0.0, cfg.scenario.slot_T, np.array([cfg.scenario.c0]))
    return (flat,) * cfg.scenario.n_p


def _replicate_vectorized(cfg: SimConfig, tau: float, rep: int) -> ReplicationResult:
    """SMHO: every slot senses channels 0, 1, ... so all slots are handled at once."""
    sc = cfg.scenario
    alpha = max_handovers(sc, tau)
    pd, pfa = operating_point(sc, tau)
    pu, sense, fade = _draws(cfg, rep)
    busy_verdict = sense < np.where(pu == traffic.BUSY, pd, pfa)
    window = ~busy_verdict[: alpha + 1]
    found = window.any(axis=0)
    first = np.argmax(window, axis=0)
    h = np.where(found, first, alpha)
    elapsed = tau + h * (tau + sc.tau_ho)
    assert np.all(elapsed <= sc.slot_T + _TIME_TOL)
    cols = np.arange(cfg.n_slots)
    rates = _rates(cfg, pu, fade)[first, cols]
    thr = np.where(found, rates * (1.0 - elapsed / sc.slot_T), 0.0)
    collided = found & (pu[first, cols] == traffic.BUSY)
    return ReplicationResult(
        throughput=float(thr.mean()),
        handovers=float(h.mean()),
        sensing_time=float(elapsed.mean()),
        slots_blocked=int((~found).sum()),
        collision_slots=int(collided.sum()),
        max_senses=int(h.max()) + 1,
    )


def _replicate_loop(cfg: SimConfig, tau: float, rep: int) -> ReplicationResult:
    sc = cfg.scenario
    alpha = max_handovers(sc, tau)
    pd, pfa = operating_point(sc, tau)
    pu, sense, fade = _draws(cfg, rep)
    rates = _rates(cfg, pu, fade)
    wbho = cfg.policy == WBHO
    if wbho:
        models = _weight_models(cfg)
        triggers = [handover_trigger(ch, cfg.wbho) for ch in sc.channels]

        def ranking():
            return build_sensing_sequence(sc.channels, models, cfg.wbho, sc.idle_convention)

    fixed = list(range(sc.n_p))
    current = None
    restart = True
    n = cfg.n_slots
    # per-slot records, reduced exactly like the vectorized engine
    thr = np.zeros(n)
    hs = np.zeros(n, dtype=np.int64)
    blocked = collided = 0
    T = sc.slot_T
    for t in range(cfg.n_slots):
        if not wbho:
            order = fixed
        elif current is None or restart:
            order = ranking()
        else:
            order = [current]
        chosen = None
        h = 0
        k = 0
        while True:
            c = order[k]
            threshold = pd if pu[c, t] == traffic.BUSY else pfa
            if sense[c, t] >= threshold:
                chosen = c
                break
            if h == alpha:
                break
            h += 1
            k += 1
            if k == len(order):
                # the retained channel was busy: hand over along a fresh ranking
                order = order + [i for i in ranking() if i != current]
        elapsed = tau + h * (tau + sc.tau_ho)
        assert elapsed <= T + _TIME_TOL and h <= alpha
        hs[t] = h
        if chosen is None:
            blocked += 1
            current = None
        else:
            thr[t] = rates[chosen, t] * (1.0 - elapsed / T)
            collided += int(pu[chosen, t] == traffic.BUSY)
            current = chosen
            # trigger evaluated at the end of the slot for the channel in use
            restart = wbho and triggers[chosen]
    elapsed = tau + hs * (tau + sc.tau_ho)
    return ReplicationResult(
        float(thr.mean()), float(hs.mean()), float(elapsed.mean()), blocked, collided, int(hs.max()) + 1
    )


def run(cfg: SimConfig, tau: float, map_fn=map, engine: str = "auto") -> SimSummary:
    """Simulate n_replications independent runs of n_slots slots at sensing time tau.

    `engine="loop"` forces the slot-by-slot engine; SMHO otherwise uses the
    equivalent vectorized path.
    """
    if not (0.0 < tau < cfg.scenario.slot_T):
        raise ValueError(f"sensing time {tau} must lie in (0, T)")
    if engine not in ("auto", "loop"):
        raise ValueError(f"unknown engine {engine!r}")
    one = _replicate_vectorized if (cfg.policy == SMHO and engine == "auto") else _replicate_loop
    reps = list(map_fn(lambda r: one(cfg, tau, r), range(cfg.n_replications)))
    return SimSummary.reduce(reps, cfg.n_slots)


@dataclass(frozen=True)
class PairedRow:
    tau: float
    throughput_a: float
    throughput_b: float
    diff_throughput: float
    se_diff_throughput: float
    handovers_a: float
    handovers_b: float
    diff_handovers: float
    se_diff_handovers: float


def compare_policies(cfg_a: SimConfig, cfg_b: SimConfig, taus, map_fn=map) -> list[PairedRow]:
    """Common-random-number comparison; differences are a minus b."""
    if cfg_a.scenario != cfg_b.scenario:
        raise ValueError("paired runs need identical scenarios")
    if (cfg_a.seed, cfg_a.n_slots, cfg_a.n_replications) != (cfg_b.seed, cfg_b.n_slots, cfg_b.n_replications):
        raise ValueError("paired runs need identical seed, slot count and replication count")
    if (cfg_a.fading is None) != (cfg_b.fading is None):
        raise ValueError("paired runs need the same fading setup")
    rows = []
    for tau in taus:
        a = run(cfg_a, tau, map_fn)
        b = run(cfg_b, tau, map_fn)
        dt = a.rep_throughput - b.rep_throughput
        dh = a.rep_handovers - b.rep_handovers
        rows.append(
            PairedRow(
                tau=tau,
                throughput_a=a.avg_throughput,
                throughput_b=b.avg_throughput,
                diff_throughput=float(dt.mean()),
                se_diff_throughput=_se(dt),
                handovers_a=a.avg_handovers,
                handovers_b=b.avg_handovers,
                diff_handovers=float(dh.mean()),
                se_diff_handovers=_se(dh),
            )
        )
    return rows
