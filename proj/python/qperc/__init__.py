"""Python bindings for the qperc quantum perceptron library."""

import json

from ._qperc import (
    ApproxSpec,
    ConfigError,
    DimensionMismatch,
    Error,
    InvalidArgument,
    MappingInfeasible,
    PerceptronParams,
    RydbergParams,
    basis_state,
    build_perceptron,
    build_rydberg_perceptron,
    evolve_dense,
    evolve_perceptron_blocks,
    expectation_z,
    f_circuit,
    f_cosine,
    fidelity,
    map_rydberg_to_perceptron,
    v_prep,
    verify_mapping,
)
from ._qperc import run as _run


def run_experiment(kind, config=None, seed_overrides=(), threads=0):
    """Run an experiment from a config dict (or JSON text).

    Returns (result dict, {file name: contents}, status).
    """
    if config is None:
        config = {}
    text = config if isinstance(config, str) else json.dumps(config)
    result, files, status = _run(kind, text, list(seed_overrides), threads)
    return json.loads(result), dict(files), status


__all__ = [
    "ApproxSpec",
    "ConfigError",
    "DimensionMismatch",
    "Error",
    "InvalidArgument",
    "MappingInfeasible",
    "PerceptronParams",
    "RydbergParams",
    "basis_state",
    "build_perceptron",
    "build_rydberg_perceptron",
    "evolve_dense",
    "evolve_perceptron_blocks",
    "expectation_z",
    "f_circuit",
    "f_cosine",
    "fidelity",
    "map_rydberg_to_perceptron",
    "run_experiment",
    "v_prep",
    "verify_mapping",
]
