"""
Run configuration.

Precedence, lowest first: built-in defaults, environment (DEEPCOND_SEED,
DEEPCOND_THREADS), a JSON config file, explicit command-line flags.

Public API:
- RunConfig
- resolve_config(subcommand, flags, config_path=None, environ=None) -> RunConfig
- DEFAULTS, COMMON_DEFAULTS, ENV_SEED, ENV_THREADS
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional

from deepcond.dual.activations import NORMRELU_DEFAULT_C
from deepcond.errors import ConfigurationError, ParseError

ENV_SEED = "DEEPCOND_SEED"
ENV_THREADS = "DEEPCOND_THREADS"
FORMATS = ("csv", "json")

COMMON_DEFAULTS: Dict[str, Any] = {
    "seed": 0,
    "threads": 1,
    "out": None,
    "format": "csv",
    "log_level": "WARNING",
}

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "dual-table": {
        "activations": ["relu", "step", "exp", "identity", "hermite2"],
        "rho_points": 21,
    },
    "profile": {
        "kind": "toplayer",
        "activation": "relu-normalized",
        "L_max": 60,
        "inputs": None,
        "gram": None,
        "synthetic": [8, 0.1, 0],
    },
    "simulate": {
        "experiment": "kernel",
        "activation": "relu-normalized",
        "m": [256, 1024, 4096],
        "L": 3,
        "n": [4],
        "delta": 0.2,
        "rho": 0.8,
        "trials": 50,
        "draws": 20000,
    },
    "train": {
        "mode": "gd",
        "activation": "relu-normalized",
        "n": [8],
        "delta": 0.1,
        "depth": "L1",
        "width": 1024,
        "T": 200,
        "eps": 1e-3,
        "labels": "linear",
        "n_test": 2000,
        "dim": 16,
    },
    "normrelu": {
        "c": NORMRELU_DEFAULT_C,
        "eps": 0.01,
    },
}


def _int(v: Any) -> int:
    if isinstance(v, bool):
        raise ValueError("boolean where an integer is expected")
    if isinstance(v, float) and not v.is_integer():
        raise ValueError(f"{v} is not an integer")
    return int(v)


def _list(item: Callable[[Any], Any]) -> Callable[[Any], List[Any]]:
    def convert(v: Any) -> List[Any]:
        if isinstance(v, str):
            parts = [p.strip() for p in v.split(",") if p.strip()]
        elif isinstance(v, (list, tuple)):
            parts = list(v)
        else:
            parts = [v]
        return [item(p) for p in parts]
    return convert


def _optional(item: Callable[[Any], Any]) -> Callable[[Any], Any]:
    return lambda v: None if v is None else item(v)


def _choice(*options: str) -> Callable[[Any], str]:
    def convert(v: Any) -> str:
        if v not in options:
            raise ValueError(f"{v!r} is not one of {list(options)}")
        return str(v)
    return convert


def _depth(v: Any) -> Any:
    return "L1" if v == "L1" else _int(v)


def _synthetic(v: Any) -> Optional[List[Any]]:
    if v is None:
        return None
    parts = _list(str)(v)
    if len(parts) != 3:
        raise ValueError("synthetic takes n, delta and seed")
    return [_int(float(parts[0])), float(parts[1]), _int(float(parts[2]))]


CONVERTERS: Dict[str, Callable[[Any], Any]] = {
    "seed": _int,
    "threads": _int,
    "out": _optional(str),
    "format": _choice(*FORMATS),
    "log_level": _choice("DEBUG", "INFO", "WARNING", "ERROR"),
    "activations": _list(str),
    "rho_points": _int,
    "kind": _choice("toplayer", "ntk"),
    "activation": str,
    "L_max": _int,
    "inputs": _optional(str),
    "gram": _optional(str),
    "synthetic": _synthetic,
    "experiment": _choice("kernel", "ntk", "decay", "sigma-min", "bn-invariance"),
    "m": _list(_int),
    "L": _int,
    "n": _list(_int),
    "delta": float,
    "rho": float,
    "trials": _int,
    "draws": _int,
    "mode": _choice("gd", "sgd", "interpolate", "risk"),
    "depth": _depth,
    "width": _int,
    "T": _int,
    "eps": float,
    "labels": _choice("linear", "zeros", "noise"),
    "n_test": _int,
    "dim": _int,
    "c": float,
}


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    values: Dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    @property
    def seed(self) -> int:
        return self.values["seed"]

    @property
    def threads(self) -> int:
        return self.values["threads"]

    def as_dict(self) -> Dict[str, Any]:
        return {"subcommand": self.subcommand, **self.values}


def _convert(key: str, value: Any, source: str) -> Any:
    try:
        return CONVERTERS[key](value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid value for {key!r} from {source}: {exc}",
                                 {"key": key, "value": value, "source": source}) from exc


def _load_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8-sig") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}", {"path": path, "reason": exc.strerror}) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, {"path": path}) from exc
    if not isinstance(data, dict):
        raise ConfigurationError("config file must hold a JSON object", {"path": path})
    return data


def resolve_config(subcommand: str, flags: Mapping[str, Any], config_path: Optional[str] = None,
                   environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    if subcommand not in DEFAULTS:
        raise ConfigurationError(f"unknown subcommand {subcommand!r}", {"known": sorted(DEFAULTS)})
    environ = os.environ if environ is None else environ
    known = {**COMMON_DEFAULTS, **DEFAULTS[subcommand]}
    values = {k: (list(v) if isinstance(v, list) else v) for k, v in known.items()}

    for key, var in (("seed", ENV_SEED), ("threads", ENV_THREADS)):
        if environ.get(var):
            values[key] = _convert(key, environ[var], var)

    if config_path:
        data = _load_file(config_path)
        named = data.pop("subcommand", subcommand)
        if named != subcommand:
            raise ConfigurationError("config file names another subcommand",
                                     {"file": named, "command": subcommand})
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigurationError(f"unknown config keys: {unknown}", {"unknown": unknown, "known": sorted(known)})
        for key, value in data.items():
            values[key] = _convert(key, value, config_path)

    for key, value in flags.items():
        if key not in known:
            raise ConfigurationError(f"flag {key!r} does not apply to {subcommand}", {"key": key})
        values[key] = _convert(key, value, "command line")

    if values["threads"] < 1:
        raise ConfigurationError("threads must be positive", {"threads": values["threads"]})
    if values["seed"] < 0:
        raise ConfigurationError("seed must be non-negative", {"seed": values["seed"]})
    return RunConfig(subcommand=subcommand, values=values)
