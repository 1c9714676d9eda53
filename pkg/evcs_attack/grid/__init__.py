"""
Grid data model: spec types, file I/O and state-space assembly
"""

from .loader import GridLoader, dump_grid_spec, load_grid_spec
from .model import (
    StateSpaceModel,
    assemble_descriptor,
    build_admittance,
    mechanical_balance,
    perturb_parameters,
    scale_evcs_demand,
    steady_state_response,
)
from .spec import (
    DEFAULT_LOAD_DAMPING_FRACTION,
    HOURS_PER_WEEK,
    Branch,
    GeneratorParams,
    GridSpec,
    LoadParams,
    NodeRecord,
    StateIndexMap,
)
from .validator import GridValidator

__all__ = [
    "Branch",
    "DEFAULT_LOAD_DAMPING_FRACTION",
    "GeneratorParams",
    "GridLoader",
    "GridSpec",
    "GridValidator",
    "HOURS_PER_WEEK",
    "LoadParams",
    "NodeRecord",
    "StateIndexMap",
    "StateSpaceModel",
    "assemble_descriptor",
    "build_admittance",
    "dump_grid_spec",
    "load_grid_spec",
    "mechanical_balance",
    "perturb_parameters",
    "scale_evcs_demand",
    "steady_state_response",
]
