import math

import pytest

from smholab.analytics import Scenario
from smholab.detector import DetectorConstraints, db_to_linear
from smholab.traffic import CHAIN_STATIONARY, EQ2_LITERAL, OnOffChannel

T = 0.1
TAU_HO = 1e-4
FS = 6e6
GAMMA = db_to_linear(-20.0)


def baseline(n_p=10, p0=0.65, convention=EQ2_LITERAL, **kw):
    """Default scenario in ratio mode with identical channels of idle probability p0."""
    chans = [OnOffChannel.from_idle_probability(p0, convention, 1.0, i) for i in range(n_p)]
    args = dict(
        slot_T=T, tau_ho=TAU_HO, channels=chans, constraints=DetectorConstraints(0.9, 0.1),
        gamma=GAMMA, fs=FS, c1_over_c0=0.1, idle_convention=convention,
    )
    args.update(kw)
    return Scenario(**args)


@pytest.fixture
def sc10():
    return baseline(10)


@pytest.fixture
def sc10_chain():
    return baseline(10, convention=CHAIN_STATIONARY)


def floor_budget(tau):
    return math.floor((T - tau) / (tau + TAU_HO))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
