"""Python front end for the bethelab engine.

Variable indices are 1-based here, matching the JSON file formats.
"""

import json

from ._core import (
    BudgetExceeded,
    DenseMeasure,
    FactorGraph,
    FormatError,
    ZeroNormalizer,
    canonical_residual,
    condition,
    gibbs,
    marginal,
    overlap_d1,
    product_of_marginals,
    symmetry_score,
    tv_distance,
)
from . import _core

__all__ = [
    "BudgetExceeded",
    "DenseMeasure",
    "FactorGraph",
    "FormatError",
    "ZeroNormalizer",
    "bethe_deviation",
    "canonical_residual",
    "condition",
    "cut_distance",
    "gibbs",
    "marginal",
    "overlap_d1",
    "product_of_marginals",
    "run_experiment",
    "sample_graph",
    "symmetry_score",
    "tv_distance",
]


def sample_graph(model):
    """Sample a factor graph from a model spec dict."""
    return _core.sample_graph(json.dumps(model))


def cut_distance(mu, nu, mode="exact"):
    """Cut distance with its adversary witness, as a dict."""
    return json.loads(_core.cut_distance(mu, nu, mode))


def bethe_deviation(graph, l, r, I=(), sigma=()):
    return json.loads(_core.bethe_deviation(graph, l, r, list(I), list(sigma)))


def run_experiment(config):
    """Run an experiment config dict; returns (summary dict, cells.csv text)."""
    summary, cells = _core.run_experiment(json.dumps(config))
    return json.loads(summary), cells
