"""Experiment configuration: dataclass, JSON file loading, environment
overrides, and the CLI > environment > file > defaults precedence chain.

Environment variables use the ``CIRCLAW_`` prefix and mirror config keys
upper-cased: ``CIRCLAW_ENSEMBLE``, ``CIRCLAW_SIZES`` (comma-separated),
``CIRCLAW_REPLICAS``, ``CIRCLAW_MASTER_SEED``, ``CIRCLAW_METRICS``
(comma-separated), ``CIRCLAW_RESOLUTION``, ``CIRCLAW_TOL_MASS``,
``CIRCLAW_KAPPA``, ``CIRCLAW_R_LOC``, ``CIRCLAW_EPSILON``,
``CIRCLAW_OUT_DIR``, ``CIRCLAW_WORKERS``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields

from ..ensembles import ENSEMBLE_KINDS, POINT_SAMPLE_TAGS

ENV_PREFIX = "CIRCLAW_"

METRIC_NAMES = (
    "w1_sd",
    "w1_oracle",
    "kolmogorov_ball",
    "d_p",
    "potential_gap",
    "pair_energy",
    "mean_esd_w1",
    "lower_bound",
)

_SAMPLE_TAGS = ENSEMBLE_KINDS + POINT_SAMPLE_TAGS


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: an ensemble swept over sizes and replicas.

    ``r_loc`` is the localization radius of the potential-gap metric
    (must exceed 1); ``epsilon`` is the exponent slack used by rate
    checks; ``tol_mass`` of None means the solver default 1e-3/n.
    """

    ensemble: str = "ginibre"
    sizes: tuple = (16, 32, 64, 128, 256)
    replicas: int = 20
    master_seed: int = 20260817
    metrics: tuple = ("w1_sd",)
    resolution: int = 1024
    tol_mass: float | None = None
    kappa: float = 0.25
    r_loc: float = 1.05
    epsilon: float = 0.2
    out_dir: str = "results"
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "metrics", tuple(str(m) for m in self.metrics))
        if self.ensemble not in _SAMPLE_TAGS:
            raise ValueError(
                f"unknown ensemble {self.ensemble!r}; choose from {_SAMPLE_TAGS}")
        if not self.sizes:
            raise ValueError("sizes must be nonempty")
        if any(n < 1 for n in self.sizes):
            raise ValueError(f"sizes must be positive, got {self.sizes}")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError(f"sizes must be strictly increasing, got {self.sizes}")
        if self.replicas < 1:
            raise ValueError(f"replicas must be >= 1, got {self.replicas}")
        bad = [m for m in self.metrics if m not in METRIC_NAMES]
        if bad:
            raise ValueError(f"unknown metrics {bad}; choose from {METRIC_NAMES}")
        if self.resolution < 64:
            raise ValueError(f"resolution must be >= 64, got {self.resolution}")
        if self.tol_mass is not None and not self.tol_mass > 0.0:
            raise ValueError(f"tol_mass must be positive, got {self.tol_mass}")
        if not self.kappa > 0.0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not self.r_loc > 1.0:
            raise ValueError(f"r_loc must exceed 1, got {self.r_loc}")
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


_FIELD_NAMES = tuple(f.name for f in fields(ExperimentConfig))

_INT_KEYS = ("replicas", "master_seed", "resolution", "workers")
_FLOAT_KEYS = ("kappa", "r_loc", "epsilon")
_TUPLE_INT_KEYS = ("sizes",)
_TUPLE_STR_KEYS = ("metrics",)


def _parse_env_value(key: str, raw: str):
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key == "tol_mass":
        return None if raw.lower() in ("", "none", "null") else float(raw)
    if key in _TUPLE_INT_KEYS:
        return tuple(int(t) for t in raw.split(",") if t.strip())
    if key in _TUPLE_STR_KEYS:
        return tuple(t.strip() for t in raw.split(",") if t.strip())
    return raw


def config_from_file(path: str) -> dict:
    """Read a JSON config file, rejecting keys outside the schema."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - set(_FIELD_NAMES))
    if unknown:
        raise ValueError(
            f"unknown config keys {unknown} in {path}; "
            f"valid keys: {sorted(_FIELD_NAMES)}")
    return data


def env_overrides(env=None) -> dict:
    """Config overrides present in the environment (CIRCLAW_ prefix)."""
    if env is None:
        env = os.environ
    out = {}
    for key in _FIELD_NAMES:
        raw = env.get(ENV_PREFIX + key.upper())
        if raw is not None:
            out[key] = _parse_env_value(key, raw)
    return out


def load_config(path: str | None = None, env=None, **cli) -> ExperimentConfig:
    """Build a config with precedence CLI > environment > file > defaults.

    ``cli`` entries equal to None are treated as unset.
    """
    merged: dict = {}
    if path is not None:
        merged.update(config_from_file(path))
    merged.update(env_overrides(env))
    merged.update({k: v for k, v in cli.items() if v is not None})
    unknown = sorted(set(merged) - set(_FIELD_NAMES))
    if unknown:
        raise ValueError(f"unknown config keys {unknown}")
    return ExperimentConfig(**merged)
