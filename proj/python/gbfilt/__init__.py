"""Gradient boosted Hammerstein filters."""

import json

from ._core import (
    DivergenceError,
    GbfError,
    Model,
    NumericOverflowError,
    ParseError,
    PreconditionError,
    SignalFormatError,
    SingularSystemError,
    make_chirp_scene,
    make_example1_datasets,
    mse,
    nmse,
    poly_loss_gradient,
    residual_orthogonality,
    simulate_example1,
    solve_wiener_hopf,
    stage_forward,
    uniform_signal,
)
from ._core import train as _train

__all__ = [
    "DivergenceError",
    "GbfError",
    "Model",
    "NumericOverflowError",
    "ParseError",
    "PreconditionError",
    "SignalFormatError",
    "SingularSystemError",
    "make_chirp_scene",
    "make_example1_datasets",
    "mse",
    "nmse",
    "poly_loss_gradient",
    "residual_orthogonality",
    "simulate_example1",
    "solve_wiener_hopf",
    "stage_forward",
    "train",
    "uniform_signal",
]


def train(x, target, stages, **options):
    """Fit a model. `stages` is a list of (p, m) pairs; other keyword arguments
    are config keys such as learning_rate, max_iters or algorithm."""
    config = {"stages": [list(s) for s in stages], **options}
    return _train(x, target, json.dumps(config))
