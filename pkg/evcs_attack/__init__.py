"""
EVCS Attack - load-altering attack synthesis for grids with compromisable EV charging demand
"""

__version__ = "0.1.0"

from .attack import AttackPlan, UncertaintySpec, synthesize
from .grid import GridSpec, StateSpaceModel, assemble_descriptor, load_grid_spec
from .vulnerability import RegionSpec, sensitivity, sweep

__all__ = [
    "AttackPlan",
    "GridSpec",
    "RegionSpec",
    "StateSpaceModel",
    "UncertaintySpec",
    "assemble_descriptor",
    "load_grid_spec",
    "sensitivity",
    "sweep",
    "synthesize",
]
