"""Sensing-time optimization over (tau_min, T) and parameter sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .analytics import Scenario, avg_throughput, fading_avg_throughput, max_handovers, throughput
from .traffic import OnOffChannel

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class InfeasibleError(ValueError):
    """The detector constraints cannot be met inside one slot."""


@dataclass(frozen=True)
class OptResult:
    tau_opt: float
    r_max: float
    feasible: bool
    evaluations: int
    grid_resolution: float
    tau_min: float


def golden_section_max(f, a: float, b: float, xtol: float = 1e-12):
    """Maximize a unimodal f on [a, b]; returns (x, f(x), evaluations)."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        n += 1
    return (c, fc, n) if fc >= fd else (d, fd, n)


def alpha_breakpoints(sc: Scenario, lo: float, hi: float) -> list[float]:
    """Sensing times in (lo, hi) where the handover cap changes."""
    pts = []
    for j in range(1, sc.n_p):
        t = (sc.slot_T - j * sc.tau_ho) / (j + 1)
        if lo < t < hi:
            pts.append(t)
    return sorted(pts)


def _objective(sc: Scenario, objective: str, mean_gamma_s, mean_gamma_p):
    if objective == "awgn":
        return lambda tau: throughput(sc, tau)
    if objective == "fading":
        if mean_gamma_s is None or mean_gamma_p is None:
            raise ValueError("fading objective needs mean_gamma_s and mean_gamma_p")
        return lambda tau: fading_avg_throughput(sc, tau, mean_gamma_s, mean_gamma_p)
    raise ValueError(f"unknown objective {objective!r}")


def optimize_tau(
    sc: Scenario,
    objective: str = "awgn",
    n_grid: int = 2000,
    mean_gamma_s: float | None = None,
    mean_gamma_p: float | None = None,
) -> OptResult:
    """Global maximizer of the throughput over tau_min < tau < T.

    The handover cap is a floor function of tau, so the objective is only
    piecewise smooth. A dense grid locates the best cell of every
    constant-cap interval; each is refined by golden-section search and its
    closed right end (where the cap is still the larger value) is checked.
    """
    T = sc.slot_T
    tau_min = sc.tau_min
    if tau_min >= T:
        return OptResult(math.nan, math.nan, False, 0, math.nan, tau_min)
    f = _objective(sc, objective, mean_gamma_s, mean_gamma_p)
    h = (T - tau_min) / (n_grid + 1)
    grid = tau_min + h * np.arange(1, n_grid + 1)
    vals = np.array([f(t) for t in grid])
    evals = n_grid
    best_i = int(np.argmax(vals))
    best_tau, best_r = float(grid[best_i]), float(vals[best_i])

    edges = [tau_min, *alpha_breakpoints(sc, tau_min, T), T]
    for a, b in zip(edges[:-1], edges[1:]):
        inside = np.nonzero((grid > a) & (grid <= b))[0]
        if inside.size:
            i = inside[np.argmax(vals[inside])]
            lo = grid[i - 1] if i - 1 >= 0 and grid[i - 1] > a else a
            hi = grid[i + 1] if i + 1 < n_grid and grid[i + 1] <= b else b
        else:
            lo, hi = a, b
        x, fx, n = golden_section_max(f, lo, hi, xtol=1e-12 * T)
        evals += n
        cands = [(x, fx)]
        if b < T:
            cands.append((b, f(b)))
            evals += 1
        for t, r in cands:
            if r > best_r:
                best_tau, best_r = float(t), float(r)
    return OptResult(best_tau, best_r, True, evals, h, tau_min)


def saturation_threshold(sc: Scenario) -> int:
    """Smallest N_p beyond which extra channels cannot raise the optimum."""
    tau_min = sc.tau_min
    if tau_min >= sc.slot_T:
        raise InfeasibleError(f"tau_min = {tau_min:g} s is not below the slot time")
    return math.floor((sc.slot_T - tau_min) / (tau_min + sc.tau_ho)) + 1


def resize(sc: Scenario, n_p: int) -> Scenario:
    """Scenario with n_p channels: truncated, or padded with copies of the last channel."""
    if n_p < 1:
        raise ValueError("n_p must be at least 1")
    chans = list(sc.channels[:n_p])
    while len(chans) < n_p:
        chans.append(replace(sc.channels[-1], index=len(chans)))
    return sc.with_channels(chans)


def with_idle_probability(sc: Scenario, p0: float, mixing: float = 1.0) -> Scenario:
    chans = [OnOffChannel.from_idle_probability(p0, sc.idle_convention, mixing, i) for i in range(sc.n_p)]
    return sc.with_channels(chans)


def _tau_row(sc, tau):
    if not (0.0 < tau < sc.slot_T):
        return {"value": tau, "feasible": False, "R": math.nan, "alpha": -1, "g_bar": math.nan}
    b = avg_throughput(sc, tau)
    return {"value": tau, "feasible": True, "R": b.total, "alpha": b.alpha, "g_bar": b.g_bar}


def _opt_row(sc, value, objective, n_grid, kw):
    r = optimize_tau(sc, objective, n_grid, **kw)
    return {"value": value, "feasible": r.feasible, "r_max": r.r_max, "tau_opt": r.tau_opt}


def sweep(sc: Scenario, axis: str, values, objective: str = "awgn", n_grid: int = 2000, map_fn=map, **kw) -> list[dict]:
    """One row per value along `axis` in {tau, n_p, p0}.

    Rows are independent; `map_fn` may be any order-preserving parallel map.
    """
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    if axis == "tau":
        return list(map_fn(lambda t: _tau_row(sc, t), values))
    if axis == "n_p":
        return list(map_fn(lambda n: _opt_row(resize(sc, int(n)), int(n), objective, n_grid, kw), values))
    if axis == "p0":
        return list(map_fn(lambda p: _opt_row(with_idle_probability(sc, p), p, objective, n_grid, kw), values))
    raise ValueError(f"unknown sweep axis {axis!r}")


def handovers_at(sc: Scenario, tau: float) -> float:
    return avg_throughput(sc, tau).g_bar


__all__ = [
    "InfeasibleError",
    "OptResult",
    "alpha_breakpoints",
    "golden_section_max",
    "handovers_at",
    "max_handovers",
    "optimize_tau",
    "resize",
    "saturation_threshold",
    "sweep",
    "with_idle_probability",
]
