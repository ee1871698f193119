"""Weighted handover (WBHO): rank channels by expected rate and PU absence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fading import FadingModel, steady_state_probs
from .traffic import (
    EQ2_LITERAL,
    MARKOV_CONSISTENT,
    RUN_CONVENTIONS,
    OnOffChannel,
    absence_probability,
    entrance_probability,
)

EQ31_LITERAL = "eq31-literal"  # expected rate divided by absence probability, as printed
IDLE_FAVORING = "idle-favoring"  # expected rate times absence probability
WEIGHT_FORMS = (EQ31_LITERAL, IDLE_FAVORING)


class DegenerateChannelError(ValueError):
    pass


@dataclass(frozen=True)
class WbhoConfig:
    s: int = 5
    s0: int = 3
    p0: float = 0.9
    weight_form: str = EQ31_LITERAL
    run_convention: str = MARKOV_CONSISTENT

    def __post_init__(self):
        if self.s < 1 or self.s0 < 1:
            raise ValueError("s and s0 must be positive integers")
        if not (0.0 < self.p0 < 1.0):
            raise ValueError("p0 must lie in (0, 1)")
        if self.weight_form not in WEIGHT_FORMS:
            raise ValueError(f"unknown weight form {self.weight_form!r}")
        if self.run_convention not in RUN_CONVENTIONS:
            raise ValueError(f"unknown run convention {self.run_convention!r}")


def expected_horizon_throughput(fm: FadingModel, s: int) -> float:
    """Expected AMC throughput summed over the next s slots of a stationary link."""
    if s < 1:
        raise ValueError("s must be a positive integer")
    return s * float(np.dot(steady_state_probs(fm), fm.rates))


def channel_weight(fm: FadingModel, ch: OnOffChannel, cfg: WbhoConfig, idle_convention: str = EQ2_LITERAL) -> float:
    er = expected_horizon_throughput(fm, cfg.s)
    ap = absence_probability(ch, cfg.s, cfg.run_convention, idle_convention)
    if cfg.weight_form == IDLE_FAVORING:
        return er * ap
    if ap == 0.0:
        raise DegenerateChannelError(f"channel {ch.index}: absence probability is zero")
    return er / ap


def build_sensing_sequence(channels, fading, cfg: WbhoConfig, idle_convention: str = EQ2_LITERAL) -> list[int]:
    """Channel positions sorted by decreasing weight; ties keep ascending position."""
    if len(channels) != len(fading):
        raise ValueError("need one fading model per channel")
    w = [channel_weight(fm, ch, cfg, idle_convention) for ch, fm in zip(channels, fading)]
    return sorted(range(len(w)), key=lambda i: (-w[i], i))


def handover_trigger(ch: OnOffChannel, cfg: WbhoConfig) -> bool:
    return entrance_probability(ch, cfg.s0) > cfg.p0
