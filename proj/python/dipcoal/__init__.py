"""Diploid exchangeable population models and their coalescent limits.

The heavy lifting lives in the compiled extension; this package adds thin
conveniences only (JSON decoding of recipe reports).
"""

import json as _json

from ._core import (
    ConfigError,
    Estimate,
    GenealogyRecord,
    Measure,
    MergerSpec,
    Model,
    MohleDecomposition,
    __version__,
    consistency_check,
    diploid_states,
    enumerate_merger_specs,
    estimate_cn,
    estimate_phi,
    generator_matrix,
    mohle,
    partitions,
    rate,
    rate_quadrature,
    recipe_names,
    run_genealogy,
    run_recipe_json,
    sample_offspring,
    simulate_coalescent,
    tail_scaling_limit,
)

__all__ = [
    "ConfigError",
    "Estimate",
    "GenealogyRecord",
    "Measure",
    "MergerSpec",
    "Model",
    "MohleDecomposition",
    "__version__",
    "consistency_check",
    "diploid_states",
    "enumerate_merger_specs",
    "estimate_cn",
    "estimate_phi",
    "generator_matrix",
    "mohle",
    "partitions",
    "rate",
    "rate_quadrature",
    "recipe_names",
    "run_genealogy",
    "run_recipe",
    "run_recipe_json",
    "sample_offspring",
    "simulate_coalescent",
    "tail_scaling_limit",
]


def run_recipe(name, seed, threads=0):
    """Run a named experiment and return its report as a dict."""
    return _json.loads(run_recipe_json(name, seed, threads))
