"""Hitting and return time statistics for random dynamical systems on the circle."""

import json

from ._core import (
    ConfigError,
    HitstatError,
    MeasureEstimate,
    RandomSystem,
    __version__,
    circle_dist,
    correlations,
    count_periodic_points,
    delta,
    estimate_stationary,
    eval_theta,
    expanding_in_average,
    hitting_times,
    in_ball,
    ks_exponential,
    markov_stationary,
    recurrence_rate,
)
from ._core import run as _run


def run(subcommand, config_text):
    """Run a CLI subcommand; returns (exit_code, manifest dict)."""
    code, manifest = _run(subcommand, config_text)
    return code, json.loads(manifest)


__all__ = [
    "ConfigError",
    "HitstatError",
    "MeasureEstimate",
    "RandomSystem",
    "__version__",
    "circle_dist",
    "correlations",
    "count_periodic_points",
    "delta",
    "estimate_stationary",
    "eval_theta",
    "expanding_in_average",
    "hitting_times",
    "in_ball",
    "ks_exponential",
    "markov_stationary",
    "recurrence_rate",
    "run",
]
