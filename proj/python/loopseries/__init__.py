"""Loop series for binary pairwise Markov random fields."""

import json

from ._core import (
    Graph,
    IdentityViolation,
    InputError,
    NotConverged,
    coefficients,
    exact_marginals,
    exact_partition,
    f_eval,
    f_poly,
    ising_corollary,
    lbp,
    loop_count_bound,
    loop_series,
    marginal,
    run_cli,
)

__all__ = [
    "Graph",
    "IdentityViolation",
    "InputError",
    "NotConverged",
    "coefficients",
    "exact_marginals",
    "exact_partition",
    "f_eval",
    "f_poly",
    "graph_from_dict",
    "ising_corollary",
    "lbp",
    "loop_count_bound",
    "loop_series",
    "marginal",
    "run_cli",
]


def graph_from_dict(spec):
    """Builds a Graph from the same structure the JSON graph files use."""
    return Graph.from_json(json.dumps(spec))
