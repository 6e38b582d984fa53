"""Risk-sensitive tabular planning and learning.

MDPs, utilities and experiment configs use the same JSON shapes as the
``riskdp`` command-line tool; here they are plain dicts.
"""

import json

from ._core import (
    ConfigError,
    Grid,
    MDP,
    SizeError,
    Solution,
    Utility,
    recommended_eps,
    solve_optimal,
    vigu,
    vigu_ucb,
)
from . import _core

__all__ = [
    "ConfigError",
    "Grid",
    "MDP",
    "SizeError",
    "Solution",
    "Utility",
    "make_mdp",
    "make_utility",
    "recommended_eps",
    "run_experiment",
    "solve_optimal",
    "vigu",
    "vigu_ucb",
]


def make_mdp(spec):
    """Build an MDP from a generator or explicit-table dict."""
    return _core._mdp_from_json(json.dumps(spec))


def make_utility(spec, horizon):
    """Build a utility on [0, horizon] from a dict such as {"kind": "exponential", "beta": 2}."""
    return _core._utility_from_json(json.dumps(spec), int(horizon))


def run_experiment(config):
    """Run a full experiment config and return the CSV text."""
    return _core._run_experiment_json(json.dumps(config))
