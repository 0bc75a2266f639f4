"""Delay-line reservoir computer with a single nonlinear node."""
from .reservoir import (
    Feedback,
    Nonlinearity,
    ReservoirConfig,
    Trajectory,
    apply_mask,
    normalize_input,
    pad_inputs,
    run,
    run_batch,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "Feedback",
    "Nonlinearity",
    "ReservoirConfig",
    "Trajectory",
    "apply_mask",
    "normalize_input",
    "pad_inputs",
    "run",
    "run_batch",
    "step",
]
