"""Anomaly and precursor-of-anomaly detection with co-evolving neural CDEs.

Configs are plain dicts with the same layout as the CLI's JSON files; every
command returns the report it wrote to its output directory.
"""

import json
import os

from . import _pad
from ._pad import (
    ConfigError,
    CubicSpline,
    DimensionError,
    DivergenceError,
    DomainError,
    InputError,
    PadError,
    load_csv,
)

__all__ = [
    "ConfigError",
    "CubicSpline",
    "DimensionError",
    "DivergenceError",
    "DomainError",
    "InputError",
    "PadError",
    "augment",
    "default_config",
    "evaluate",
    "evaluate_scores",
    "generate_synthetic",
    "gradcheck",
    "load_csv",
    "predict",
    "resolve_config",
    "sweep",
    "synth",
    "train",
]


def _text(config):
    if config is None:
        return ""
    if isinstance(config, (str, os.PathLike)) and os.path.exists(config):
        with open(config) as f:
            return f.read()
    return json.dumps(config)


def default_config():
    return json.loads(_pad.default_config())


def resolve_config(config=None):
    """Full config with defaults filled in; unknown keys raise ConfigError."""
    return json.loads(_pad.normalize_config(_text(config)))


def synth(config, out):
    return json.loads(_pad.synth(_text(config), os.fspath(out)))


def augment(input_csv, config, out):
    return json.loads(_pad.augment(os.fspath(input_csv), _text(config), os.fspath(out)))


def train(config, out):
    return json.loads(_pad.train(_text(config), os.fspath(out)))


def evaluate(config, checkpoint, out, data=None, drop=None, threshold=None):
    data = None if data is None else os.fspath(data)
    return json.loads(_pad.evaluate(_text(config), os.fspath(checkpoint), os.fspath(out), data, drop, threshold))


def gradcheck(config=None, out="."):
    return json.loads(_pad.gradcheck(_text(config), os.fspath(out)))


def sweep(config, out):
    return json.loads(_pad.sweep(_text(config), os.fspath(out)))


def generate_synthetic(config=None):
    return _pad.generate_synthetic(_text(config))


def evaluate_scores(probabilities, labels, threshold=0.5):
    return json.loads(_pad.evaluate_scores(list(probabilities), list(labels), threshold))


def predict(checkpoint, times, values, config=None):
    """(p_anomaly, p_poa) for one window of raw observations."""
    return _pad.predict(os.fspath(checkpoint), times, values, _text(config))
