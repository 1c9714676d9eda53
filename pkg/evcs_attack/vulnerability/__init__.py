"""
Region-of-vulnerability sweep, participation factors and parameter sensitivity
"""

from .participation import dominant_states, modes_near, participation_factors
from .region import (
    NOT_AVAILABLE_EPSILON,
    RegionSpec,
    achieved_cell,
    cell_of,
    relocation_error,
    targets_from,
)
from .sensitivity import SensitivityRow, perturbed_builder, sensitivity
from .sweep import SweepCell, SweepResult, evaluate_cell, sweep

__all__ = [
    "NOT_AVAILABLE_EPSILON",
    "RegionSpec",
    "SensitivityRow",
    "SweepCell",
    "SweepResult",
    "achieved_cell",
    "cell_of",
    "dominant_states",
    "evaluate_cell",
    "modes_near",
    "participation_factors",
    "perturbed_builder",
    "relocation_error",
    "sensitivity",
    "sweep",
    "targets_from",
]
