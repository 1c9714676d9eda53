"""
IEEE 1547 style over-frequency trip detection and the generator-trip operating state
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from evcs_attack.errors import ScenarioInfeasibleError
from evcs_attack.dynamics.simulate import DEFAULT_DT_S, DEFAULT_HORIZON_S, SimulationTrace, simulate
from evcs_attack.grid.model import StateSpaceModel
from evcs_attack.grid.spec import GridSpec

logger = logging.getLogger(__name__)

TRIP_THRESHOLD_HZ = 62.0
TRIP_DWELL_S = 0.16


@dataclass(frozen=True)
class TripEvent:
    """Generator frequency stayed above threshold_hz for at least dwell_s, starting at start_time"""

    node: str
    start_time: float
    threshold_hz: float = TRIP_THRESHOLD_HZ
    dwell_s: float = TRIP_DWELL_S

    def to_dict(self) -> dict:
        return {
            "node": self.node,
            "start_time_s": self.start_time,
            "threshold_hz": self.threshold_hz,
            "dwell_s": self.dwell_s,
        }


@dataclass(frozen=True)
class GeneratorTrip:
    """Loss of `lost_power` (per-unit) of mechanical injection at generator `node`"""

    node: str
    lost_power: float

    @classmethod
    def from_spec(cls, spec: GridSpec, node: str) -> "GeneratorTrip":
        """Trip removing the generator's scheduled dispatch"""
        if node not in spec.generator_ids:
            raise ValueError(f"'{node}' is not a generator node")
        return cls(node=node, lost_power=spec.dispatch_of(node))


def _excursions(times: np.ndarray, signal: np.ndarray, level: float) -> List[Tuple[float, float]]:
    """Intervals where signal > level, with ends placed by linear interpolation"""
    above = signal > level
    intervals = []
    start: Optional[float] = float(times[0]) if above[0] else None

    for k in range(1, len(times)):
        if above[k] == above[k - 1]:
            continue
        t0, t1 = times[k - 1], times[k]
        s0, s1 = signal[k - 1], signal[k]
        crossing = float(t0 + (level - s0) / (s1 - s0) * (t1 - t0))
        if above[k]:
            start = crossing
        else:
            intervals.append((start, crossing))
            start = None

    if start is not None:
        intervals.append((start, float(times[-1])))
    return intervals


def detect_overfrequency_trip(
    trace: SimulationTrace, threshold_hz: float = TRIP_THRESHOLD_HZ, dwell_s: float = TRIP_DWELL_S
) -> List[TripEvent]:
    """First excursion per generator above threshold_hz lasting at least dwell_s"""
    if len(trace.times) == 0:
        raise ValueError("trace is empty")
    if len(trace.times) > 1 and dwell_s < trace.dt:
        raise ValueError(f"dwell {dwell_s} s is shorter than the trace step {trace.dt} s")

    events = []
    for i, node in enumerate(trace.generator_ids):
        for start, end in _excursions(trace.times, trace.frequencies[:, i], threshold_hz):
            # Tolerance absorbs rounding in the interpolated crossing times
            if end - start >= dwell_s - 1e-9:
                events.append(TripEvent(node=node, start_time=start, threshold_hz=threshold_hz, dwell_s=dwell_s))
                break

    events.sort(key=lambda e: (e.start_time, e.node))
    for event in events:
        logger.info("Trip at %s: above %.3g Hz from t = %.4f s", event.node, threshold_hz, event.start_time)
    return events


def disturbance_vector(model: StateSpaceModel, scenario: GeneratorTrip) -> np.ndarray:
    """Regularized effect E^-1 g of losing the scenario's injection in the swing equation"""
    g_hat = np.zeros(model.n)
    # Descriptor row reads -M omega' = ... so a lost injection enters with a plus sign
    g_hat[model.index_map.omega(scenario.node)] = scenario.lost_power
    return scipy.linalg.solve(model.E, g_hat)


def capture_operating_state(
    model: StateSpaceModel,
    scenario: GeneratorTrip,
    threshold_hz: float = TRIP_THRESHOLD_HZ,
    horizon: float = DEFAULT_HORIZON_S,
    dt: float = DEFAULT_DT_S,
) -> Tuple[float, np.ndarray]:
    """Time and state at which some generator first reaches |f - f_s| = threshold_hz - f_s"""
    if scenario.node not in model.index_map.generators:
        raise ValueError(f"scenario must name a generator node, got '{scenario.node}'")
    if scenario.lost_power == 0:
        return 0.0, np.zeros(model.n)

    band_hz = abs(threshold_hz - model.f_s)
    trace = simulate(model, np.zeros(model.n), horizon=horizon, dt=dt, disturbance=disturbance_vector(model, scenario))
    deviation = np.max(np.abs(trace.frequencies - model.f_s), axis=1)
    hits = np.flatnonzero(deviation >= band_hz)
    if len(hits) == 0:
        raise ScenarioInfeasibleError(
            f"trip of {scenario.node} ({scenario.lost_power:.4g} pu) peaks at "
            f"{deviation.max():.4g} Hz deviation, never reaching {band_hz:.4g} Hz within {horizon} s"
        )

    k = int(hits[0])
    if k == 0:
        return 0.0, trace.states[0].copy()
    weight = (band_hz - deviation[k - 1]) / (deviation[k] - deviation[k - 1])
    t = float(trace.times[k - 1] + weight * dt)
    x = trace.states[k - 1] + weight * (trace.states[k] - trace.states[k - 1])
    logger.info("Operating state captured at t = %.4f s after trip of %s", t, scenario.node)
    return t, x


def operating_state(
    model: StateSpaceModel,
    scenario: GeneratorTrip,
    threshold_hz: float = TRIP_THRESHOLD_HZ,
    horizon: float = DEFAULT_HORIZON_S,
    dt: float = DEFAULT_DT_S,
) -> np.ndarray:
    """State vector reached when the generator trip first touches the trip boundary"""
    return capture_operating_state(model, scenario, threshold_hz, horizon, dt)[1]
