"""ON-OFF Markov model of primary-user activity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stats import RandomStream

IDLE = 0
BUSY = 1

# Steady-state idle mass: the printed closed form, or the stationary vector of
# the chain whose p00 is the idle->idle transition. They agree only for p00 == p11.
EQ2_LITERAL = "eq2-literal"
CHAIN_STATIONARY = "chain-stationary"
IDLE_CONVENTIONS = (EQ2_LITERAL, CHAIN_STATIONARY)

# Idle-run survival: printed (1 - p00)^(s-1) or the Markov-consistent p00^(s-1).
PAPER_LITERAL = "paper-literal"
MARKOV_CONSISTENT = "markov-consistent"
RUN_CONVENTIONS = (PAPER_LITERAL, MARKOV_CONSISTENT)


class DegenerateChainError(ValueError):
    pass


def _check(value, allowed, what):
    if value not in allowed:
        raise ValueError(f"unknown {what} {value!r}; expected one of {allowed}")


@dataclass(frozen=True)
class OnOffChannel:
    p00: float
    p11: float
    index: int = 0

    def __post_init__(self):
        if self.p00 + self.p11 == 2.0:
            raise DegenerateChainError("p00 + p11 = 2: chain is reducible")
        if not (0.0 < self.p00 < 1.0 and 0.0 < self.p11 < 1.0):
            raise ValueError(f"need 0 < p00, p11 < 1, got p00={self.p00}, p11={self.p11}")

    @classmethod
    def from_idle_probability(cls, p0: float, convention: str = EQ2_LITERAL, mixing: float = 1.0, index: int = 0):
        """Build a chain whose steady-state idle probability is p0 under `convention`.

        `mixing` is 2 - p00 - p11; the default of 1 makes consecutive slots
        independent.
        """
        _check(convention, IDLE_CONVENTIONS, "idle convention")
        if not (0.0 < p0 < 1.0):
            raise ValueError("p0 must lie in (0, 1)")
        if convention == EQ2_LITERAL:
            p00, p11 = 1.0 - p0 * mixing, 1.0 - (1.0 - p0) * mixing
        else:
            p11, p00 = 1.0 - p0 * mixing, 1.0 - (1.0 - p0) * mixing
        return cls(p00, p11, index)

    def transition_matrix(self) -> np.ndarray:
        return np.array([[self.p00, 1.0 - self.p00], [1.0 - self.p11, self.p11]])


def steady_state_idle(ch: OnOffChannel, convention: str = EQ2_LITERAL) -> float:
    _check(convention, IDLE_CONVENTIONS, "idle convention")
    denom = 2.0 - ch.p00 - ch.p11
    if convention == EQ2_LITERAL:
        return (1.0 - ch.p00) / denom
    return (1.0 - ch.p11) / denom


def run_length_survival(ch: OnOffChannel, s: int, convention: str = MARKOV_CONSISTENT) -> float:
    _check(convention, RUN_CONVENTIONS, "run convention")
    if s < 1:
        raise ValueError("s must be a positive integer")
    base = 1.0 - ch.p00 if convention == PAPER_LITERAL else ch.p00
    return base ** (s - 1)


def absence_probability(
    ch: OnOffChannel,
    s: int,
    convention: str = MARKOV_CONSISTENT,
    idle_convention: str = EQ2_LITERAL,
) -> float:
    """Probability the PU stays absent for the next s slots."""
    return steady_state_idle(ch, idle_convention) * run_length_survival(ch, s, convention)


def entrance_probability(ch: OnOffChannel, s0: int) -> float:
    """Probability the PU shows up within s0 slots, given the channel is idle now."""
    if s0 < 1:
        raise ValueError("s0 must be a positive integer")
    return 1.0 - ch.p00**s0


def sample_state(ch: OnOffChannel, prev_state: int, rng: RandomStream) -> int:
    if prev_state == IDLE:
        return IDLE if rng.random() < ch.p00 else BUSY
    if prev_state == BUSY:
        return BUSY if rng.random() < ch.p11 else IDLE
    raise ValueError(f"invalid state {prev_state!r}")


def sample_trajectory(ch: OnOffChannel, n_slots: int, rng: RandomStream, initial: int | None = None) -> np.ndarray:
    """Vectorized trajectory of n_slots states.

    Sojourn lengths of a two-state chain are geometric, so the path is
    assembled from alternating idle/busy runs. With `initial=None` the first
    state is drawn from the chain's stationary law.
    """
    if initial is None:
        initial = IDLE if rng.random() < steady_state_idle(ch, CHAIN_STATIONARY) else BUSY
    first_exit = 1.0 - (ch.p00 if initial == IDLE else ch.p11)
    other_exit = 1.0 - (ch.p11 if initial == IDLE else ch.p00)
    runs: list[np.ndarray] = []
    covered = 0
    while covered < n_slots:
        # pairs of (initial-state run, other-state run)
        block = int(n_slots * max(first_exit, other_exit) / 2) + 16
        pair = np.empty(2 * block, dtype=np.int64)
        pair[0::2] = rng.geometric(first_exit, block)
        pair[1::2] = rng.geometric(other_exit, block)
        runs.append(pair)
        covered += int(pair.sum())
    lengths = np.concatenate(runs)
    # cut at the run that crosses n_slots so near-absorbing chains stay cheap
    ends = np.cumsum(lengths)
    last = int(np.searchsorted(ends, n_slots))
    lengths = lengths[: last + 1]
    lengths[last] -= ends[last] - n_slots
    states = np.empty(lengths.size, dtype=np.int8)
    states[0::2] = initial
    states[1::2] = 1 - initial
    return np.repeat(states, lengths)


def random_channels(n: int, rng: RandomStream, low: float = 0.1, high: float = 0.9) -> list[OnOffChannel]:
    """Channels with p00 and p11 drawn uniformly from [low, high]."""
    draws = rng.uniform(low, high, size=(n, 2))
    return [OnOffChannel(float(a), float(b), i) for i, (a, b) in enumerate(draws)]
