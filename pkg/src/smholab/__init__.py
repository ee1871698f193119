"""Cognitive-radio spectrum handover: energy detection, SMHO analysis, WBHO policy, simulation."""

from .config import load_config, parse_config
from .analytics import Scenario, ThroughputBreakdown, avg_throughput, fading_avg_throughput
from .detector import DetectorConstraints, DetectorParams, min_sensing_time
from .fading import FadingModel
from .optimizer import OptResult, optimize_tau, saturation_threshold, sweep
from .simulator import SimConfig, SimSummary, compare_policies, run
from .stats import RandomStream
from .traffic import OnOffChannel
from .wbho import WbhoConfig

__version__ = "0.1.0"
