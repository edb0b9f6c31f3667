"""Recover a periodic 1-D signal from shifted observations under mixed Gaussian noise."""

__version__ = "0.1.0"

from .core import (
    DegenerateComponentError,
    DegenerateLikelihoodError,
    NoiseModel,
    NumericalDivergenceError,
    circular_shift,
    log_sum_exp,
    soft_max_eps,
)
from .datagen import GenSpec, ObservationSet, generate_observations, make_piecewise_signal, make_random_signal
from .alignment import AlignmentResult, best_cyclic_alignment, relative_error
from .solver import SolverConfig, SolverReport, em_single_gaussian_solve, energy_J, mgg_softmax_solve

__all__ = [
    "AlignmentResult",
    "DegenerateComponentError",
    "DegenerateLikelihoodError",
    "GenSpec",
    "NoiseModel",
    "NumericalDivergenceError",
    "ObservationSet",
    "SolverConfig",
    "SolverReport",
    "best_cyclic_alignment",
    "circular_shift",
    "em_single_gaussian_solve",
    "energy_J",
    "generate_observations",
    "log_sum_exp",
    "make_piecewise_signal",
    "make_random_signal",
    "mgg_softmax_solve",
    "relative_error",
    "soft_max_eps",
]
