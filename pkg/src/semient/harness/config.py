"""Experiment configuration: JSON schema, presets and loading."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_INT1 = {"type": "integer", "minimum": 1}

ESTIMATOR_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["kde", "histogram"]},
        "method": {"enum": ["binned", "pairwise"]},
        "bandwidth": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "bin_width": _POS,
        "max_points": _INT1,
    },
}

GRID_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n_points"],
    "properties": {
        "t_max": {"oneOf": [_POS, {"const": "revival"}]},
        "revival_fraction": _POS,
        "n_points": {"type": "integer", "minimum": 2},
    },
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "semient experiment",
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "params", "initial", "t_grid"],
    "properties": {
        "name": {"type": "string"},
        "model": {"enum": ["dicke", "bec", "polynomial"]},
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "epsilon": _NUM, "omega": _NUM, "G": _NUM, "G_prime": _NUM,
                "lam": _NUM, "g": {"type": "number", "minimum": 0},
                "terms": {"type": "array",
                          "items": {"type": "array", "minItems": 5, "maxItems": 5}},
            },
        },
        "initial": {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4},
        "hbar": {"type": "array", "items": _POS, "minItems": 1},
        "two_j": {"type": "array", "items": _INT1, "minItems": 1},
        "n_max": {"oneOf": [_INT1, {"type": "array", "items": _INT1}]},
        "t_grid": GRID_SCHEMA,
        "M": _INT1,
        "spacing": _POS,
        "seed": {"type": "integer"},
        "shorttime": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"level": _POS, "n_points": {"type": "integer", "minimum": 8},
                           "degree": {"type": "integer", "minimum": 2, "maximum": 6}},
        },
        "classical": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "enabled": {"type": "boolean"},
                "n_samples": {"type": "integer", "minimum": 1000},
                "t_grid": GRID_SCHEMA,
                "estimator": ESTIMATOR_SCHEMA,
                "n_boot": {"type": "integer", "minimum": 0},
                "integrator": {"enum": ["exact", "symplectic", "rk4"]},
                "dt": _POS,
                "mode": {"enum": [1, 2]},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}, "members": {"type": "boolean"}},
        },
    },
}

PRESETS = {
    "fig2-bec": {
        "name": "fig2-bec",
        "model": "bec",
        "params": {"omega": 1.0, "lam": 0.2, "g": 0.1},
        "initial": [1.0, 1.0, 1.0, 1.0],
        "hbar": [0.1, 0.5, 1.0],
        "n_max": [60, 40, 40],
        "t_grid": {"t_max": "revival", "n_points": 801},
        "seed": 20050101,
        "classical": {"enabled": True, "n_samples": 100000,
                      "t_grid": {"t_max": 3 * 3.141592653589793, "n_points": 61},
                      "estimator": {"kind": "kde", "method": "binned"},
                      "n_boot": 20, "integrator": "exact"},
    },
    # r1 = (q_a, p_a, q_f, p_f) for J = 1: atoms tilted off the ground pole,
    # field in vacuum.  A stand-in default orbit; override "initial" to change it.
    "fig1-dicke": {
        "name": "fig1-dicke",
        "model": "dicke",
        "params": {"epsilon": 1.0, "omega": 1.0, "G": 0.35, "G_prime": 0.35},
        "initial": [0.5, 0.0, 0.0, 0.0],
        "two_j": [7, 13, 21],
        "hbar": [1.0],
        "n_max": [30, 45, 70],
        "t_grid": {"t_max": 120.0, "n_points": 361},
        "M": 8,
        "spacing": 1.0,
        "seed": 0,
    },
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict

    @property
    def model(self) -> str:
        return self.raw["model"]

    @property
    def name(self) -> str:
        return self.raw.get("name", self.model)

    @property
    def seed(self) -> int:
        return int(self.raw.get("seed", 0))

    def get(self, key, default=None):
        return self.raw.get(key, default)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        raw = copy.deepcopy(self.raw)
        raw.update({k: v for k, v in kw.items() if v is not None})
        return validate(raw)

    def members(self) -> list[tuple[float, int | None, int]]:
        """``(hbar, two_j, n_max)`` for each independent run."""
        hbars = self.raw.get("hbar", [1.0])
        if self.model == "dicke":
            keys = [(hbars[0], tj) for tj in self.raw["two_j"]]
        else:
            keys = [(hb, None) for hb in hbars]
        n_max = self.raw.get("n_max", 40)
        n_list = n_max if isinstance(n_max, list) else [n_max] * len(keys)
        if len(n_list) != len(keys):
            raise ConfigError(f"n_max has {len(n_list)} entries for {len(keys)} runs")
        return [(hb, tj, n) for (hb, tj), n in zip(keys, n_list)]


def validate(raw: dict) -> ExperimentConfig:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None
    if raw["model"] == "dicke" and "two_j" not in raw:
        raise ConfigError("dicke configs need 'two_j'")
    if raw["model"] == "polynomial" and "terms" not in raw["params"]:
        raise ConfigError("polynomial configs need params.terms")
    cfg = ExperimentConfig(copy.deepcopy(raw))
    cfg.members()
    return cfg


def load_config(source: str) -> ExperimentConfig:
    """Preset name or path to a JSON document."""
    if source in PRESETS:
        return validate(PRESETS[source])
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"{source!r} is neither a preset ({', '.join(PRESETS)}) nor a file")
    with path.open() as fh:
        return validate(json.load(fh))
