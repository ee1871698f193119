"""Command-line entry point: analyze, optimize, simulate, figures, sweep."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analytics, optimizer
from .config import ConfigError, ExperimentConfig, load_config
from .simulator import compare_policies, run
from .stats import NumericalError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

FIGURES = (1, 2, 3, 4, 5, 8, 9)
FIG1_NP = (1, 3, 10)
FIG1_POINTS = 199
NP_RANGE = range(1, 21)
FIG3_TAUS_MS = (12.0, 25.0, 50.0)
FIG5_P0 = (0.3, 0.5, 0.65, 0.8, 0.95)
FIG8_NP = (1, 3, 10)
FIG8_TAU_OVER_T = (0.12, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "" if math.isnan(v) else repr(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        def clean(v):
            if isinstance(v, (float, np.floating)):
                return None if math.isnan(v) else float(v)
            if isinstance(v, np.integer):
                return int(v)
            return v

        return json.dumps([{k: clean(v) for k, v in r.items()} for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(rows[0].keys())
        for r in rows:
            w.writerow(_cell(v) for v in r.values())
    return buf.getvalue()


def _emit(rows, args, name: str):
    text = render(rows, args.format)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.{args.format}").write_text(text)
    else:
        sys.stdout.write(text)


# rows -------------------------------------------------------------------------


def analyze_rows(cfg: ExperimentConfig, taus_ms) -> list[dict]:
    sc = cfg.scenario()
    tau_min = sc.tau_min
    rows = []
    for t_ms in taus_ms:
        tau = t_ms * 1e-3
        if not (0.0 < tau < sc.slot_T):
            rows.append({"tau_ms": t_ms, "feasible": False, "meets_pfa_max": False, "R": math.nan, "g_bar": math.nan,
                         "alpha": "", "sensing_time_ms": math.nan, "pfa": math.nan})
            continue
        b = analytics.avg_throughput(sc, tau)
        rows.append({
            "tau_ms": t_ms,
            "feasible": True,
            "meets_pfa_max": tau >= tau_min,
            "R": b.total,
            "g_bar": b.g_bar,
            "alpha": b.alpha,
            "sensing_time_ms": b.expected_sensing_time * 1e3,
            "pfa": b.pfa,
        })
    return rows


def optimize_row(cfg: ExperimentConfig, objective: str = "awgn", n_grid: int = 2000) -> dict:
    sc = cfg.scenario()
    kw = {}
    if objective == "fading":
        if sc.gamma_s is None:
            raise ConfigError("fading objective needs scenario.gamma_s_db and scenario.gamma_p_db")
        kw = {"mean_gamma_s": sc.gamma_s, "mean_gamma_p": sc.gamma_p}
    r = optimizer.optimize_tau(sc, objective, n_grid, **kw)
    n_star = optimizer.saturation_threshold(sc) if r.feasible else ""
    return {
        "feasible": r.feasible,
        "tau_opt_ms": r.tau_opt * 1e3,
        "r_max": r.r_max,
        "tau_min_ms": r.tau_min * 1e3,
        "n_p_star": n_star,
        "evaluations": r.evaluations,
        "grid_resolution_ms": r.grid_resolution * 1e3,
        "objective": objective,
    }


def simulate_rows(cfg: ExperimentConfig, taus_ms) -> list[dict]:
    sim = cfg.sim_config()
    sc = sim.scenario
    rows = []
    for t_ms in taus_ms:
        tau = t_ms * 1e-3
        if not (0.0 < tau < sc.slot_T):
            rows.append({"tau_ms": t_ms, "feasible": False, "policy": sim.policy})
            continue
        s = run(sim, tau)
        row = {
            "tau_ms": t_ms,
            "feasible": True,
            "policy": sim.policy,
            "avg_throughput": s.avg_throughput,
            "se_throughput": s.se_throughput,
            "avg_handovers": s.avg_handovers,
            "se_handovers": s.se_handovers,
            "avg_sensing_time_ms": s.avg_sensing_time * 1e3,
            "slots_blocked": s.slots_blocked,
            "collision_slots": s.collision_slots,
        }
        if sim.policy == "smho" and sim.fading is None:
            b = analytics.avg_throughput(sc, tau)
            row["analytic_R"] = b.total
            row["analytic_g_bar"] = b.g_bar
        rows.append(row)
    # blank-fill so every CSV row has the same columns
    keys = list(dict.fromkeys(k for r in rows for k in r))
    return [{k: r.get(k, "") for k in keys} for r in rows]


def fig1_rows(cfg):
    rows = []
    base = cfg.scenario(n_p=max(FIG1_NP))
    tau_min = base.tau_min
    for n in FIG1_NP:
        sc = optimizer.resize(base, n)
        for i in range(1, FIG1_POINTS + 1):
            x = i / (FIG1_POINTS + 1)
            tau = x * sc.slot_T
            rows.append({"n_p": n, "tau_over_T": x, "rate": analytics.throughput(sc, tau), "above_tau_min": tau > tau_min})
    return rows


def _np_optima(cfg, n_grid):
    base = cfg.scenario(n_p=max(NP_RANGE))
    return base, {n: optimizer.optimize_tau(optimizer.resize(base, n), n_grid=n_grid) for n in NP_RANGE}


def fig2_rows(cfg, n_grid=2000):
    _, opt = _np_optima(cfg, n_grid)
    return [{"n_p": n, "r_max": r.r_max, "tau_opt_ms": r.tau_opt * 1e3, "feasible": r.feasible} for n, r in opt.items()]


def fig3_rows(cfg):
    base = cfg.scenario(n_p=max(NP_RANGE))
    rows = []
    for t_ms in FIG3_TAUS_MS:
        for n in NP_RANGE:
            sc = optimizer.resize(base, n)
            b = analytics.avg_throughput(sc, t_ms * 1e-3)
            rows.append({"tau_ms": t_ms, "n_p": n, "avg_handovers": b.g_bar, "alpha": b.alpha})
    return rows


def fig4_rows(cfg, n_grid=2000):
    base, opt = _np_optima(cfg, n_grid)
    return [{"n_p": n, "tau_opt_ms": r.tau_opt * 1e3, "tau_min_ms": base.tau_min * 1e3} for n, r in opt.items()]


def fig5_rows(cfg, n_grid=2000):
    base = cfg.scenario(n_p=max(NP_RANGE))
    rows = []
    for p0 in FIG5_P0:
        sc_p = optimizer.with_idle_probability(base, p0, cfg.raw["traffic"]["mixing"])
        for n in NP_RANGE:
            r = optimizer.optimize_tau(optimizer.resize(sc_p, n), n_grid=n_grid)
            rows.append({"p0": p0, "n_p": n, "r_max": r.r_max, "tau_opt_ms": r.tau_opt * 1e3})
    return rows


def fig89_rows(cfg):
    """Paired SMHO/WBHO runs on a random heterogeneous roster (shared by figures 8 and 9)."""
    roster = cfg.random_channels(max(FIG8_NP))
    rows = []
    for n in FIG8_NP:
        chans = roster[:n]
        a = cfg.sim_config("wbho", n, chans, fading=True)
        b = cfg.sim_config("smho", n, chans, fading=True)
        taus = [x * a.scenario.slot_T for x in FIG8_TAU_OVER_T]
        for x, r in zip(FIG8_TAU_OVER_T, compare_policies(a, b, taus)):
            rows.append({
                "n_p": n, "tau_over_T": x,
                "wbho_throughput": r.throughput_a, "smho_throughput": r.throughput_b,
                "diff_throughput": r.diff_throughput, "se_diff_throughput": r.se_diff_throughput,
                "wbho_handovers": r.handovers_a, "smho_handovers": r.handovers_b,
                "diff_handovers": r.diff_handovers, "se_diff_handovers": r.se_diff_handovers,
            })
    return rows


def figure_rows(cfg: ExperimentConfig, fig: int, cache: dict | None = None) -> list[dict]:
    cache = {} if cache is None else cache
    if fig == 1:
        return fig1_rows(cfg)
    if fig == 2:
        return fig2_rows(cfg)
    if fig == 3:
        return fig3_rows(cfg)
    if fig == 4:
        return fig4_rows(cfg)
    if fig == 5:
        return fig5_rows(cfg)
    if fig in (8, 9):
        if "fig89" not in cache:
            cache["fig89"] = fig89_rows(cfg)
        keep = ("throughput",) if fig == 8 else ("handovers",)
        return [{k: v for k, v in r.items() if k in ("n_p", "tau_over_T") or k.endswith(keep)} for r in cache["fig89"]]
    raise ConfigError(f"unknown figure {fig}; choose from {FIGURES}")


def sweep_rows(cfg: ExperimentConfig, axis: str, values) -> list[dict]:
    sc = cfg.scenario()
    if axis == "tau":
        rows = optimizer.sweep(sc, "tau", [v * 1e-3 for v in values])
        for r in rows:
            r["value"] = r["value"] * 1e3
        return [{"tau_ms": r.pop("value"), **r} for r in rows]
    if axis == "n_p":
        values = [int(v) for v in values]
        if any(v < 1 for v in values):
            raise ConfigError("n_p values must be positive integers")
    return optimizer.sweep(sc, axis, values)


# argparse -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smholab", description="Spectrum handover analysis and simulation.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment config (built-in defaults if omitted)")
    common.add_argument("--seed", type=int, help="override the run seed")
    common.add_argument("--out", metavar="DIR", help="write files here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="closed-form SMHO metrics per sensing time")
    a.add_argument("--tau", metavar="MS", type=float, action="append", default=[], help="sensing time in ms (repeatable)")

    o = sub.add_parser("optimize", parents=[common], help="optimal sensing time")
    o.add_argument("--objective", choices=("awgn", "fading"), default="awgn")

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo run per sensing time")
    s.add_argument("--tau", metavar="MS", type=float, action="append", default=[])
    s.add_argument("--policy", choices=("smho", "wbho"))

    f = sub.add_parser("figures", parents=[common], help="figure data as CSV")
    f.add_argument("--figure", metavar="ID", type=int, action="append", default=[], help=f"one of {FIGURES}; all if omitted")

    w = sub.add_parser("sweep", parents=[common], help="parameter sweep")
    w.add_argument("--axis", choices=("tau", "n_p", "p0"), required=True)
    w.add_argument("--values", required=True, help="comma-separated values (tau in ms)")
    return p


def _run(args, parser) -> int:
    cfg = load_config(args.config, args.seed)
    if args.format is None:
        args.format = cfg.raw["output"]["format"]
    if args.command == "analyze":
        if not args.tau:
            parser.error("analyze needs at least one --tau")
        _emit(analyze_rows(cfg, args.tau), args, "analyze")
    elif args.command == "optimize":
        _emit([optimize_row(cfg, args.objective)], args, "optimize")
    elif args.command == "simulate":
        if not args.tau:
            parser.error("simulate needs at least one --tau")
        if args.policy:
            cfg.raw["run"]["policy"] = args.policy
        _emit(simulate_rows(cfg, args.tau), args, "simulate")
    elif args.command == "figures":
        figs = args.figure or list(FIGURES)
        bad = [x for x in figs if x not in FIGURES]
        if bad:
            parser.error(f"unknown figure id(s) {bad}; choose from {FIGURES}")
        if args.out is None:
            args.out = cfg.raw["output"]["dir"]
        cache: dict = {}
        for fig in figs:
            _emit(figure_rows(cfg, fig, cache), args, f"fig{fig}")
    elif args.command == "sweep":
        try:
            values = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            parser.error("--values must be comma-separated numbers")
        if not values:
            parser.error("--values is empty")
        _emit(sweep_rows(cfg, args.axis, values), args, f"sweep_{args.axis}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args, parser)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
