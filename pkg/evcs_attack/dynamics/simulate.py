"""
Exact time stepping of the (possibly feedback-compromised) LTI model
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from evcs_attack.errors import SimulationError
from evcs_attack.grid.model import StateSpaceModel

logger = logging.getLogger(__name__)

DEFAULT_DT_S = 1e-3
DEFAULT_HORIZON_S = 30.0


@dataclass(frozen=True)
class InputSchedule:
    """Piecewise-constant input: value `values[i]` from `breakpoints[i]` on, zero before the first"""

    breakpoints: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.breakpoints) != len(self.values):
            raise ValueError("breakpoints and values must have the same length")
        if any(b >= c for b, c in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def constant(cls, value: float) -> "InputSchedule":
        return cls((0.0,), (float(value),))

    @classmethod
    def step(cls, at: float, value: float) -> "InputSchedule":
        return cls((float(at),), (float(value),))

    def value_at(self, t: float) -> float:
        idx = int(np.searchsorted(self.breakpoints, t + 1e-12, side="right")) - 1
        return self.values[idx] if idx >= 0 else 0.0


@dataclass(frozen=True, eq=False)
class SimulationTrace:
    """Sampled trajectory; frequencies[:, i] = f_s + omega_i / (2 pi) for generator i"""

    times: np.ndarray
    states: np.ndarray
    frequencies: np.ndarray
    input: np.ndarray
    f_s: float = 60.0
    state_names: List[str] = field(default_factory=list)
    generator_ids: List[str] = field(default_factory=list)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def frequency_of(self, node: str) -> np.ndarray:
        return self.frequencies[:, self.generator_ids.index(node)]


def discretize(a: np.ndarray, inputs: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """Zero-order-hold pair (A_d, G_d) from the matrix exponential of [[A, G], [0, 0]] dt"""
    n, m = inputs.shape
    block = np.zeros((n + m, n + m))
    block[:n, :n] = a
    block[:n, n:] = inputs
    phi = scipy.linalg.expm(block * dt)
    return phi[:n, :n], phi[:n, n:]


def simulate(
    model: Union[StateSpaceModel, np.ndarray],
    x0: Sequence[float],
    u: Union[None, float, InputSchedule] = None,
    horizon: float = DEFAULT_HORIZON_S,
    dt: float = DEFAULT_DT_S,
    disturbance: Optional[np.ndarray] = None,
) -> SimulationTrace:
    """Step x' = A x + B u + disturbance exactly over [0, horizon].

    `model` is a StateSpaceModel (open or closed loop) or a bare state matrix. For a
    closed-loop model the recorded input includes the attacker feedback -gain @ x.
    Input breakpoints are taken at the start of each step.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if horizon < dt:
        raise ValueError(f"horizon ({horizon}) must be at least dt ({dt})")

    if isinstance(model, StateSpaceModel):
        a, b = model.A, model.B
        f_s = model.f_s
        omega = model.index_map.omega_slice
        names = model.index_map.state_names()
        gens = list(model.index_map.generators)
    else:
        a = np.asarray(model, dtype=float)
        b = np.zeros(a.shape[0])
        f_s, omega, names, gens = 60.0, slice(0, 0), [], []

    n = a.shape[0]
    x = np.array(x0, dtype=float).reshape(-1)
    if x.shape != (n,):
        raise ValueError(f"x0 must have {n} entries, got {x.shape[0]}")

    if u is None:
        schedule = InputSchedule()
    elif isinstance(u, InputSchedule):
        schedule = u
    else:
        schedule = InputSchedule.constant(u)
    d = np.zeros(n) if disturbance is None else np.asarray(disturbance, dtype=float)

    a_d, g_d = discretize(a, np.column_stack([b, d]), dt)

    steps = int(np.floor(horizon / dt + 1e-9))
    times = dt * np.arange(steps + 1)
    states = np.empty((steps + 1, n))
    inputs = np.empty(steps + 1)

    for k in range(steps + 1):
        if not np.all(np.isfinite(x)):
            raise SimulationError("state became non-finite", float(times[k]))
        external = schedule.value_at(times[k])
        states[k] = x
        inputs[k] = external + (model.feedback_input(x) if isinstance(model, StateSpaceModel) else 0.0)
        if k < steps:
            x = a_d @ x + g_d[:, 0] * external + g_d[:, 1]

    logger.debug("Simulated %d steps of %.6g s (n=%d)", steps, dt, n)
    return SimulationTrace(
        times=times,
        states=states,
        frequencies=f_s + states[:, omega] / (2 * np.pi),
        input=inputs,
        f_s=f_s,
        state_names=names,
        generator_ids=gens,
    )
