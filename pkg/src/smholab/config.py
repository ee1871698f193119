"""Experiment configuration: JSON file, schema-validated, with built-in defaults."""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .analytics import Scenario
from .detector import DetectorConstraints, db_to_linear
from .fading import FadingModel
from .simulator import SimConfig
from .stats import RandomStream
from .traffic import CHAIN_STATIONARY, IDLE_CONVENTIONS, MARKOV_CONSISTENT, RUN_CONVENTIONS, OnOffChannel, random_channels
from .wbho import EQ31_LITERAL, WEIGHT_FORMS, WbhoConfig

SCHEMA_VERSION = "smholab/1"
SEED_ENV = "SMHOLAB_SEED"

# stream id reserved for drawing random channel rosters
TRAFFIC_STREAM = 1 << 32


class ConfigError(ValueError):
    pass


def _obj(props: dict) -> dict:
    return {"type": "object", "properties": props, "additionalProperties": False}


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_prob = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
_posint = {"type": "integer", "minimum": 1}

SCHEMA = _obj(
    {
        "schema": {"const": SCHEMA_VERSION},
        "scenario": _obj(
            {
                "pd_min": _prob,
                "pfa_max": _prob,
                "fs_hz": _pos,
                "gamma_db": _num,
                "T_ms": _pos,
                "tau_ho_ms": _pos,
                "n_p": _posint,
                "c1_over_c0": {"type": ["number", "null"], "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "gamma_s_db": {"type": ["number", "null"]},
                "gamma_p_db": {"type": ["number", "null"]},
            }
        ),
        "traffic": _obj(
            {
                "p0": _prob,
                "mixing": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 2},
                "p00": _prob,
                "p11": _prob,
                "channels": {"type": "array", "minItems": 1, "items": {**_obj({"p00": _prob, "p11": _prob}), "required": ["p00", "p11"]}},
                "random": _obj({"low": _prob, "high": _prob}),
                "idle_convention": {"enum": list(IDLE_CONVENTIONS)},
                "run_convention": {"enum": list(RUN_CONVENTIONS)},
            }
        ),
        "wbho": _obj({"s": _posint, "s0": _posint, "p0": _prob, "weight_form": {"enum": list(WEIGHT_FORMS)}}),
        "fading": _obj(
            {
                "K": _posint,
                "mean_snr": {"oneOf": [_pos, {"type": "array", "minItems": 1, "items": _pos}]},
                "fd_hz": {"type": "number", "minimum": 0},
                "thresholds": {"oneOf": [{"const": "equal-probability"}, {"type": "array", "items": {"type": ["number", "string"]}}]},
                "rates": {"oneOf": [{"const": "log2-midpoint"}, {"type": "array", "items": {"type": "number", "minimum": 0}}]},
            }
        ),
        "run": _obj(
            {
                "policy": {"enum": ["smho", "wbho"]},
                "n_slots": _posint,
                "n_replications": _posint,
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
            }
        ),
        "output": _obj({"dir": {"type": "string"}, "format": {"enum": ["csv", "json"]}}),
    }
)

DEFAULTS = {
    "schema": SCHEMA_VERSION,
    "scenario": {
        "pd_min": 0.9,
        "pfa_max": 0.1,
        "fs_hz": 6e6,
        "gamma_db": -20.0,
        "T_ms": 100.0,
        "tau_ho_ms": 0.1,
        "n_p": 10,
        "c1_over_c0": 0.1,
        "gamma_s_db": None,
        "gamma_p_db": None,
    },
    "traffic": {"idle_convention": CHAIN_STATIONARY, "run_convention": MARKOV_CONSISTENT, "mixing": 1.0},
    "wbho": {"s": 5, "s0": 3, "p0": 0.9, "weight_form": EQ31_LITERAL},
    "fading": {"K": 11, "mean_snr": 10.0, "fd_hz": 0.2, "thresholds": "equal-probability", "rates": "log2-midpoint"},
    "run": {"policy": "smho", "n_slots": 1200, "n_replications": 30},
    "output": {"dir": ".", "format": "csv"},
}

_TRAFFIC_SOURCES = ("p0", "p00", "channels", "random")


@dataclass
class ExperimentConfig:
    raw: dict
    has_fading_block: bool

    @property
    def seed(self) -> int:
        return int(self.raw["run"]["seed"])

    @property
    def n_p(self) -> int:
        return int(self.raw["scenario"]["n_p"])

    def scenario(self, n_p: int | None = None, channels=None) -> Scenario:
        s = self.raw["scenario"]
        n = self.n_p if n_p is None else n_p
        if channels is None:
            channels = self.channels(n)
        ratio = s.get("c1_over_c0")
        gs, gp = s.get("gamma_s_db"), s.get("gamma_p_db")
        if gs is not None and gp is not None:
            ratio = None
        try:
            return Scenario(
                slot_T=s["T_ms"] * 1e-3,
                tau_ho=s["tau_ho_ms"] * 1e-3,
                channels=channels,
                constraints=DetectorConstraints(s["pd_min"], s["pfa_max"]),
                gamma=db_to_linear(s["gamma_db"]),
                fs=s["fs_hz"],
                gamma_s=None if gs is None else db_to_linear(gs),
                gamma_p=None if gp is None else db_to_linear(gp),
                c1_over_c0=ratio,
                idle_convention=self.raw["traffic"]["idle_convention"],
            )
        except ValueError as exc:
            raise ConfigError(f"scenario: {exc}") from exc

    def channels(self, n: int) -> list[OnOffChannel]:
        t = self.raw["traffic"]
        try:
            if "channels" in t:
                if len(t["channels"]) < n:
                    raise ConfigError(f"traffic.channels lists {len(t['channels'])} channels, {n} needed")
                return [OnOffChannel(c["p00"], c["p11"], i) for i, c in enumerate(t["channels"][:n])]
            if "random" in t:
                return self.random_channels(n)
            if "p00" in t:
                return [OnOffChannel(t["p00"], t["p11"], i) for i in range(n)]
            p0 = t.get("p0", 0.65)
            return [OnOffChannel.from_idle_probability(p0, t["idle_convention"], t["mixing"], i) for i in range(n)]
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"traffic: {exc}") from exc

    def random_channels(self, n: int, low: float | None = None, high: float | None = None) -> list[OnOffChannel]:
        r = self.raw["traffic"].get("random", {})
        low = r.get("low", 0.1) if low is None else low
        high = r.get("high", 0.9) if high is None else high
        if not low < high:
            raise ConfigError("traffic.random: need low < high")
        return random_channels(n, RandomStream(self.seed, TRAFFIC_STREAM), low, high)

    def wbho(self, weight_form: str | None = None) -> WbhoConfig:
        w = self.raw["wbho"]
        return WbhoConfig(
            s=w["s"],
            s0=w["s0"],
            p0=w["p0"],
            weight_form=weight_form or w["weight_form"],
            run_convention=self.raw["traffic"]["run_convention"],
        )

    def fading(self, n: int) -> list[FadingModel]:
        f = self.raw["fading"]
        means = f["mean_snr"] if isinstance(f["mean_snr"], list) else [f["mean_snr"]] * n
        if len(means) < n:
            raise ConfigError(f"fading.mean_snr lists {len(means)} values, {n} needed")
        th = f["thresholds"]
        if isinstance(th, list):
            th = [float(x) for x in th]
        try:
            return [
                FadingModel.build(f["K"], means[i], f["fd_hz"], self.raw["scenario"]["T_ms"] * 1e-3, th, f["rates"])
                for i in range(n)
            ]
        except ValueError as exc:
            raise ConfigError(f"fading: {exc}") from exc

    def sim_config(self, policy: str | None = None, n_p: int | None = None, channels=None, fading: bool | None = None,
                   weight_form: str | None = None) -> SimConfig:
        r = self.raw["run"]
        policy = policy or r["policy"]
        sc = self.scenario(n_p, channels)
        use_fading = (self.has_fading_block or policy == "wbho") if fading is None else fading
        return SimConfig(
            scenario=sc,
            policy=policy,
            wbho=self.wbho(weight_form) if policy == "wbho" else None,
            fading=self.fading(sc.n_p) if use_fading else None,
            n_slots=r["n_slots"],
            n_replications=r["n_replications"],
            seed=self.seed,
        )


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = {**out[k], **v}
        else:
            out[k] = v
    return out


def parse_config(doc: dict | None = None, seed: int | None = None, env=None) -> ExperimentConfig:
    """Validate a config document and fill defaults.

    Seed precedence: explicit `seed`, then the config file, then the
    SMHOLAB_SEED environment variable, then 0.
    """
    doc = {} if doc is None else doc
    env = os.environ if env is None else env
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    sources = [k for k in _TRAFFIC_SOURCES if k in doc.get("traffic", {})]
    if len(sources) > 1:
        raise ConfigError(f"traffic: give only one of {_TRAFFIC_SOURCES}, got {sources}")
    if ("p00" in doc.get("traffic", {})) != ("p11" in doc.get("traffic", {})):
        raise ConfigError("traffic: p00 and p11 must be given together")
    raw = _merge(DEFAULTS, doc)
    if seed is None:
        seed = doc.get("run", {}).get("seed")
    if seed is None and env.get(SEED_ENV):
        try:
            seed = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    raw["run"]["seed"] = 0 if seed is None else int(seed)
    if not (0 <= raw["run"]["seed"] < 2**64):
        raise ConfigError("seed must be a 64-bit unsigned integer")
    return ExperimentConfig(raw, "fading" in doc)


def load_config(path: str | Path | None = None, seed: int | None = None, env=None) -> ExperimentConfig:
    if path is None:
        return parse_config(None, seed, env)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return parse_config(doc, seed, env)
