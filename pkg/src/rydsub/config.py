"""INI-style run configuration.

Every recognised key and its default is listed in ``SCHEMA``; unknown
sections or keys are rejected. List values are comma separated.

Example::

    [model]
    d_b = 2.0

    [fidelity]
    alpha_g = 2.0
    points = 24
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .core import FieldSpec, ModelParams
from .errors import ConfigError, RydsubError


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _fmt(text: str) -> str:
    if text not in ("csv", "json"):
        raise ValueError("format must be csv or json")
    return text


# section -> key -> (parser, default text)
SCHEMA = {
    "model": {
        "d_b": (float, "1.0"),
        "length": (float, "20.0"),
        "quad_rel_tol": (float, "1e-10"),
        "grid_points": (int, "64"),
        "v_cap": (float, "1e9"),
    },
    "fields": {
        "alpha_g": (float, "2.0"),
        "alpha_s": (float, "0.0"),
        "eta_S": (float, "1.0"),
        "eta_R": (float, "1.0"),
    },
    "run": {
        "out": (str, "out"),
        "format": (_fmt, "csv"),
        "seed": (int, "20240601"),
        "threads": (int, "1"),
    },
    "fig1d": {
        "d_b": (float, "2.0"),
        "r": (_floats, "6.0, 10.0, 14.0"),
        "n_s": (int, "5"),
        "mode": (str, "gaussian"),
        "mode_center": (float, "10.0"),
        "mode_width": (float, "3.0"),
        "points_per_zb": (int, "8"),
    },
    "retrieval": {
        "p": (float, "0.5"),
        "alpha_g": (_floats, "0.5, 1.0, 2.0, 4.0"),
        "alpha_s_bar_max": (float, "3.0"),
        "points": (int, "61"),
        "eta_R": (float, "1.0"),
    },
    "subtract": {
        "p": (float, "0.5"),
        "alpha_s": (_floats, "0.0, 1.0, 3.0, 10.0"),
        "alpha_g_max": (float, "4.0"),
        "points": (int, "41"),
        "eta_R": (float, "1.0"),
    },
    "fidelity": {
        "alpha_g": (float, "2.0"),
        "d_b_min": (float, "0.25"),
        "d_b_max": (float, "6.0"),
        "points": (int, "24"),
        "alpha_s_min": (float, "1e-3"),
        "alpha_s_max": (float, "50.0"),
        "ratio_min": (float, "10.0"),
        "surfaces": (_bool, "true"),
        "surface_d_b": (_floats, "0.5, 1.0, 5.0"),
        "surface_points": (int, "11"),
        "surface_n_g": (int, "2"),
    },
    "verify": {
        "trials": (int, "100000"),
        "sets": (int, "20"),
        "ode_configs": (int, "50"),
        "ode_tol": (float, "1e-6"),
        "ode_step": (float, "0.015625"),
        "min_order": (float, "3.9"),
        "sigmas": (float, "3.0"),
    },
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return dict(self.values[name])

    def get(self, section: str, key: str):
        return self.values[section][key]

    @property
    def model(self) -> ModelParams:
        return ModelParams(**self.values["model"])

    @property
    def fields(self) -> FieldSpec:
        return FieldSpec(**self.values["fields"])

    @property
    def out(self) -> Path:
        return Path(self.values["run"]["out"])

    @property
    def format(self) -> str:
        return self.values["run"]["format"]

    @property
    def seed(self) -> int:
        return self.values["run"]["seed"]

    @property
    def threads(self) -> int:
        return self.values["run"]["threads"]

    def snapshot(self, *sections: str) -> dict:
        """Parameters that determine an output; the thread count is left out."""
        keep = sections or tuple(SCHEMA)
        out = {s: dict(self.values[s]) for s in keep}
        if "run" in out:
            out["run"].pop("threads", None)
            out["run"].pop("out", None)
        return out


def _parse(section: str, key: str, text: str):
    if section not in SCHEMA:
        raise ConfigError(f"unknown section [{section}]")
    if key not in SCHEMA[section]:
        raise ConfigError(f"unknown key {key!r} in [{section}]")
    parser = SCHEMA[section][key][0]
    try:
        return parser(text.strip())
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {text!r}: {exc}") from None


def load_config(path=None, overrides=()) -> RunConfig:
    """Defaults, then the file at ``path``, then ``section.key=value`` overrides."""
    values = {s: {k: _parse(s, k, d) for k, (_, d) in keys.items()}
              for s, keys in SCHEMA.items()}
    if path is not None:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        for section in cp.sections():
            for key, text in cp.items(section):
                values.setdefault(section, {})[key] = _parse(section, key, text)
    for item in overrides:
        name, sep, text = item.partition("=")
        section, dot, key = name.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        values[section][key] = _parse(section, key, text)
    cfg = RunConfig(values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    try:
        cfg.model
        cfg.fields
    except RydsubError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if not 0 <= cfg.seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    for sec, key in (("retrieval", "points"), ("subtract", "points"), ("fidelity", "points")):
        if cfg.get(sec, key) < 2:
            raise ConfigError(f"[{sec}] {key} must be >= 2")
    f = cfg.section("fidelity")
    if not 0 <= f["d_b_min"] < f["d_b_max"] or not math.isfinite(f["d_b_max"]):
        raise ConfigError("[fidelity] needs 0 <= d_b_min < d_b_max")
    if cfg.get("verify", "trials") < 1000:
        raise ConfigError("[verify] trials must be >= 1000")
