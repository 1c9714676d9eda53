"""
Spectral analysis and time-domain simulation
"""

from .simulate import DEFAULT_DT_S, DEFAULT_HORIZON_S, InputSchedule, SimulationTrace, discretize, simulate
from .spectral import (
    ModeRow,
    Spectrum,
    assignment_distance,
    least_damped,
    mode_table,
    sort_canonical,
    spectrum,
    unmatched,
)
from .trips import (
    TRIP_DWELL_S,
    TRIP_THRESHOLD_HZ,
    GeneratorTrip,
    TripEvent,
    capture_operating_state,
    detect_overfrequency_trip,
    disturbance_vector,
    operating_state,
)

__all__ = [
    "DEFAULT_DT_S",
    "DEFAULT_HORIZON_S",
    "GeneratorTrip",
    "InputSchedule",
    "ModeRow",
    "SimulationTrace",
    "Spectrum",
    "TRIP_DWELL_S",
    "TRIP_THRESHOLD_HZ",
    "TripEvent",
    "assignment_distance",
    "capture_operating_state",
    "detect_overfrequency_trip",
    "discretize",
    "disturbance_vector",
    "least_damped",
    "mode_table",
    "operating_state",
    "simulate",
    "sort_canonical",
    "spectrum",
    "unmatched",
]
