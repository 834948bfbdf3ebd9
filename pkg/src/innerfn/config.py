"""Experiment configuration: JSON files describing a function, a weight and a suite."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .inner import (
    AtomicSingular,
    FiniteBlaschke,
    Frostman,
    InfiniteBlaschke,
    InnerFunction,
    exponential_zeros,
    polynomial_decay_zeros,
)
from .weights import RadialWeight, power_weight, weight_from_config


class ConfigError(ValueError):
    """Schema violation; ``path`` is the dotted location of the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def parse_complex(x, path: str = "value") -> complex:
    """Accept a number, a [re, im] pair or a string such as '0.3+0.2j'."""
    if isinstance(x, bool):
        raise ConfigError(path, "expected a complex number")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        try:
            return complex(x.replace(" ", "").replace("i", "j"))
        except ValueError:
            pass
    raise ConfigError(path, f"cannot read {x!r} as a complex number")


def function_from_config(cfg, path: str = "function") -> InnerFunction:
    """Build an inner function from a config entry.

    Strings: 'atomic' (exp((z+1)/(z-1))), 'exponential' / 'polynomial_decay'
    (infinite Blaschke products).  Dicts carry a ``kind`` among atomic,
    blaschke, infinite_blaschke and frostman.
    """
    if isinstance(cfg, str):
        name = cfg.strip().lower()
        if name in ("atomic", "s", "singular"):
            return AtomicSingular()
        if name in ("exponential", "polynomial_decay"):
            return function_from_config({"kind": "infinite_blaschke", "generator": name}, path)
        raise ConfigError(path, f"unknown function {cfg!r}")
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError(path, "expected a name or an object with 'kind'")
    kind = cfg["kind"]
    if kind == "atomic":
        return AtomicSingular(float(cfg.get("mass", 2.0)))
    if kind == "blaschke" and "generator" in cfg:
        kind = "infinite_blaschke"
    if kind == "blaschke":
        if "zeros" not in cfg:
            raise ConfigError(f"{path}.zeros", "missing")
        zs = [parse_complex(z, f"{path}.zeros[{i}]") for i, z in enumerate(cfg["zeros"])]
        try:
            return FiniteBlaschke(np.array(zs, dtype=complex), float(cfg.get("lambda", 0.0)))
        except ValueError as exc:
            raise ConfigError(f"{path}.zeros", str(exc)) from None
    if kind == "infinite_blaschke":
        gen = cfg.get("generator", "exponential")
        if gen == "exponential":
            seq = exponential_zeros()
        elif gen == "polynomial_decay":
            seq = polynomial_decay_zeros(float(cfg.get("c", 1.0)))
        else:
            raise ConfigError(f"{path}.generator", f"unknown generator {gen!r}")
        return InfiniteBlaschke(seq, float(cfg.get("lambda", 0.0)), float(cfg.get("tol", 1e-10)))
    if kind == "frostman":
        base = function_from_config(cfg.get("base"), f"{path}.base")
        return Frostman(base, parse_complex(cfg.get("a", 0), f"{path}.a"))
    raise ConfigError(f"{path}.kind", f"unknown kind {kind!r}")


def parse_weight(spec, path: str = "weight") -> RadialWeight:
    """A weight from a dict, or from a short string 'power:0.25', 'power_log:1,1', 'exponential:1'."""
    if spec is None:
        return power_weight(0.0)
    if isinstance(spec, str):
        fam, _, args = spec.partition(":")
        vals = [float(v) for v in args.split(",") if v.strip()]
        keys = {"power": ["alpha"], "power_log": ["alpha", "beta"], "exponential": ["c"],
                "custom": []}.get(fam)
        if keys is None:
            raise ConfigError(path, f"unknown weight family {fam!r}")
        cfg = {"family": fam, **dict(zip(keys, vals))}
        if fam == "custom":
            cfg["name"] = args
        spec = cfg
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected an object or a 'family:args' string")
    try:
        return weight_from_config(spec)
    except (KeyError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None


# parameters each suite needs; defaults are filled in and echoed in reports
SUITE_PARAMS = {
    "theorem1b": (("p", "q"), {"delta": 0.5, "m_range": [8, 14], "nodes": 64,
                              "window": [0.02, 50.0]}),
    "theorem1": (("p", "q"), {"a": [math.exp(-1), 0.0], "m": 16}),
    "theorem3": (("p",), {"a": [math.exp(-1), 0.0], "C": 0.5, "m": 16}),
    "corollary-hp": (("p",), {"a": [math.exp(-1), 0.0], "alpha_list": [0.0, 1.0], "C": 0.5, "m": 16}),
    "besov": (("p", "q", "alpha"), {"delta": 0.5, "m": 16, "nodes": 64}),
    "remark1": (("p",), {"m": 16}),
    "shift": (("p", "q", "x"), {"m_range": [10, 16]}),
}


@dataclass
class ExperimentConfig:
    suite: str
    function: Any
    weight: Any = None
    parameters: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    seed: int = 0

    def theta(self) -> InnerFunction:
        return function_from_config(self.function)

    def omega(self) -> RadialWeight:
        return parse_weight(self.weight)

    def resolved(self) -> dict:
        """The parameter set actually used, defaults included."""
        _, defaults = SUITE_PARAMS[self.suite]
        out = dict(defaults)
        out.update(self.parameters)
        return out

    def to_dict(self) -> dict:
        return {"suite": self.suite, "function": self.function, "weight": self.weight,
                "parameters": self.resolved(), "outputs": self.outputs, "seed": self.seed}


def _positive(params: dict, key: str) -> None:
    v = params[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
        raise ConfigError(f"parameters.{key}", "must be a positive number")


def validate_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    suite = raw.get("suite")
    if suite not in SUITE_PARAMS:
        raise ConfigError("suite", f"unknown suite {suite!r}; choose from {sorted(SUITE_PARAMS)}")
    if "function" not in raw:
        raise ConfigError("function", "missing")
    params = raw.get("parameters")
    if not isinstance(params, dict):
        raise ConfigError("parameters", "missing or not an object")
    required, _ = SUITE_PARAMS[suite]
    for key in required:
        if key not in params:
            raise ConfigError(f"parameters.{key}", "missing")
        if key != "alpha":
            _positive(params, key)
    if "a" in params:
        a = parse_complex(params["a"], "parameters.a")
        if abs(a) >= 1:
            raise ConfigError("parameters.a", "must satisfy |a| < 1")
    if "C" in params and not 0 < params["C"] < 1:
        raise ConfigError("parameters.C", "must lie in (0, 1)")
    if "delta" in params and not 0 < params["delta"] < 1:
        raise ConfigError("parameters.delta", "must lie in (0, 1)")
    for key in ("m",):
        if key in params and not (isinstance(params[key], int) and 6 <= params[key] <= 20):
            raise ConfigError(f"parameters.{key}", "must be an integer in 6..20")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed", "must be an integer")
    outputs = raw.get("outputs", {})
    if not isinstance(outputs, dict):
        raise ConfigError("outputs", "must be an object")
    cfg = ExperimentConfig(suite, raw["function"], raw.get("weight"), dict(params), outputs, seed)
    cfg.theta()  # surface function errors with their path
    if cfg.weight is not None:
        cfg.omega()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON: {exc}") from None
    return validate_config(raw)


def run_config(cfg: ExperimentConfig):
    """Dispatch a validated config to its suite."""
    from . import verify

    theta = cfg.theta()
    omega = cfg.omega()
    P = cfg.resolved()
    s = cfg.suite
    if s == "theorem1b":
        return verify.verify_theorem1b(theta, P["p"], P["q"], omega, P["delta"],
                                       tuple(P["m_range"]), tuple(P["window"]), P["nodes"])
    if s == "theorem1":
        return verify.verify_theorem1(theta, P["p"], P["q"], omega, parse_complex(P["a"]), P["m"])
    if s == "theorem3":
        return verify.verify_theorem3(theta, P["p"], omega, parse_complex(P["a"]), P["C"], P["m"])
    if s == "corollary-hp":
        return verify.verify_corollary_hp(theta, P["p"], parse_complex(P["a"]),
                                          tuple(P["alpha_list"]), P["C"], P["m"])
    if s == "besov":
        return verify.verify_besov(theta, P["p"], P["q"], P["alpha"], P["delta"], P["m"], nodes=P["nodes"])
    if s == "remark1":
        return verify.verify_remark1(theta, P["p"], P["m"])
    if s == "shift":
        return verify.verify_shift(theta, P["p"], P["q"], P["x"], omega, tuple(P["m_range"]))
    raise ConfigError("suite", f"unknown suite {s!r}")
