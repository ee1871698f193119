"""Energy-detector sensing model under the Gaussian approximation.

Thresholds are carried normalized by the primary-signal energy, so the
physical value of sigma_u^2 is never needed for the analysis.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .stats import gaussian_tail, gaussian_tail_inverse

MIN_SAMPLES_GAUSSIAN = 100


class SmallSampleWarning(UserWarning):
    """Sample count too small for the Gaussian approximation to be trusted."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _check_samples(tau: float, fs: float) -> None:
    if not (tau > 0 and fs > 0):
        raise ValueError("tau and fs must be positive")
    n = tau * fs
    if n < 1:
        raise ValueError(f"sample count tau*fs = {n:g} is below one")
    if n < MIN_SAMPLES_GAUSSIAN:
        warnings.warn(f"only {n:g} samples; Gaussian approximation is loose", SmallSampleWarning, stacklevel=3)


@dataclass(frozen=True)
class DetectorParams:
    tau: float
    lambda_norm: float
    gamma: float
    fs: float
    sigma_u_sq: float = 1.0

    def __post_init__(self):
        if not (self.gamma > 0 and self.sigma_u_sq > 0):
            raise ValueError("gamma and sigma_u_sq must be positive")
        if not math.isfinite(self.lambda_norm):
            raise ValueError("lambda_norm must be finite")
        _check_samples(self.tau, self.fs)

    @property
    def n_samples(self) -> float:
        return self.tau * self.fs


@dataclass(frozen=True)
class DetectorConstraints:
    pd_min: float
    pfa_max: float

    def __post_init__(self):
        if not (0.0 < self.pfa_max < self.pd_min < 1.0):
            raise ValueError(f"need 0 < pfa_max < pd_min < 1, got pfa_max={self.pfa_max}, pd_min={self.pd_min}")


def detection_probability(p: DetectorParams) -> float:
    arg = (p.lambda_norm - 1.0 - p.gamma) * math.sqrt(p.tau * p.fs / (1.0 + 2.0 * p.gamma))
    return gaussian_tail(arg)


def false_alarm_probability(p: DetectorParams) -> float:
    arg = (p.lambda_norm - 1.0) * math.sqrt(p.tau * p.fs)
    return gaussian_tail(arg)


def threshold_for_pd(pd_bar: float, tau: float, gamma: float, fs: float) -> float:
    """Normalized threshold that pins the detection probability at pd_bar."""
    _check_samples(tau, fs)
    return gaussian_tail_inverse(pd_bar) * math.sqrt((1.0 + 2.0 * gamma) / (tau * fs)) + 1.0 + gamma


def beta(pd_bar: float, gamma: float) -> float:
    return gaussian_tail_inverse(pd_bar) * math.sqrt(1.0 + 2.0 * gamma)


def false_alarm_at_target_pd(pd_bar: float, tau: float, gamma: float, fs: float) -> float:
    """False-alarm probability once the threshold is set for detection pd_bar."""
    if not (tau > 0 and fs > 0):
        raise ValueError("tau and fs must be positive")
    return gaussian_tail(beta(pd_bar, gamma) + gamma * math.sqrt(tau * fs))


@dataclass(frozen=True)
class MinSensingTime:
    tau: float
    unconstrained: bool

    def __float__(self):
        return self.tau


def min_sensing_time(c: DetectorConstraints, gamma: float, fs: float) -> MinSensingTime:
    """Smallest sensing time meeting pfa_max while detection is held at pd_min."""
    if not (gamma > 0 and fs > 0):
        raise ValueError("gamma and fs must be positive")
    gap = gaussian_tail_inverse(c.pfa_max) - beta(c.pd_min, gamma)
    if gap <= 0:
        return MinSensingTime(0.0, True)
    return MinSensingTime((gap / gamma) ** 2 / fs, False)
