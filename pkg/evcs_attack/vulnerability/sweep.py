"""
Minimum compromisable demand over the region of vulnerability
"""

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from evcs_attack.attack.synthesis import UncertaintySpec, chance_margin, synthesize
from evcs_attack.errors import EvcsAttackError
from evcs_attack.grid.model import StateSpaceModel
from evcs_attack.grid.spec import LoadParams
from evcs_attack.vulnerability.region import NOT_AVAILABLE_EPSILON, RegionSpec, relocation_error, targets_from

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepCell:
    """Outcome of one (xi, omega_n) attack; amounts are None when synthesis failed"""

    xi: float
    omega_n: float
    targets: Tuple[complex, ...]
    delta_p_mw: Optional[float]
    epsilon: Optional[float]
    feasible: bool
    achieved: Tuple[complex, ...] = ()
    error: str = ""

    @property
    def not_available(self) -> bool:
        return self.epsilon is None or self.epsilon > NOT_AVAILABLE_EPSILON


@dataclass
class SweepResult:
    """Sweep cells in omega-major order plus the axes and run metadata"""

    cells: List[SweepCell]
    xi_values: List[float]
    omega_values: List[float]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def cell(self, xi: float, omega_n: float) -> SweepCell:
        i = _nearest_index(self.omega_values, omega_n)
        j = _nearest_index(self.xi_values, xi)
        return self.cells[i * len(self.xi_values) + j]

    def long_frame(self) -> pd.DataFrame:
        """One row per cell: xi, omega_n, delta_p_mw, epsilon, feasible, not_available, error"""
        rows = [
            {
                "xi": c.xi,
                "omega_n": c.omega_n,
                "delta_p_mw": c.delta_p_mw,
                "epsilon": c.epsilon,
                "feasible": c.feasible,
                "not_available": c.not_available,
                "error": c.error,
            }
            for c in self.cells
        ]
        columns = ["xi", "omega_n", "delta_p_mw", "epsilon", "feasible", "not_available", "error"]
        return pd.DataFrame(rows, columns=columns)

    def matrix(self) -> pd.DataFrame:
        """Minimum demand (MW) with omega_n rows and xi columns; N/A cells are missing"""
        frame = self.long_frame()
        frame.loc[frame["not_available"], "delta_p_mw"] = np.nan
        table = frame.pivot(index="omega_n", columns="xi", values="delta_p_mw")
        return table.reindex(index=self.omega_values, columns=self.xi_values)


def _nearest_index(values: List[float], value: float) -> int:
    return int(np.argmin(np.abs(np.asarray(values) - value)))


def state_digest(x: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(x, dtype=float).tobytes()).hexdigest()[:16]


def evaluate_cell(
    model: StateSpaceModel,
    x: np.ndarray,
    demand: Union[LoadParams, float],
    xi: float,
    omega_n: float,
    uncertainty: Optional[UncertaintySpec] = None,
    hour: Optional[int] = None,
) -> SweepCell:
    """Synthesize toward one cell; failures become an infeasible cell carrying the message"""
    targets = targets_from(xi, omega_n)
    try:
        plan = synthesize(model, targets, x, demand, uncertainty=uncertainty, hour=hour)
    except (EvcsAttackError, ValueError) as e:
        logger.debug("Cell (%.4g, %.4g) failed: %s", xi, omega_n, e)
        return SweepCell(xi, omega_n, tuple(targets), None, None, False, error=str(e))

    return SweepCell(
        xi=xi,
        omega_n=omega_n,
        targets=tuple(targets),
        delta_p_mw=plan.delta_p_mw,
        epsilon=relocation_error(plan.achieved, targets),
        feasible=plan.feasible,
        achieved=tuple(plan.achieved.eigenvalues),
    )


def sweep(
    model: StateSpaceModel,
    x: np.ndarray,
    demand: Union[LoadParams, float],
    region: Optional[RegionSpec] = None,
    uncertainty: Optional[UncertaintySpec] = None,
    hour: Optional[int] = None,
    workers: int = 1,
) -> SweepResult:
    """Evaluate every lattice cell of `region`; the cell order of the result never depends on `workers`"""
    region = region or RegionSpec()
    lattice = region.cells()
    logger.info("Sweeping %d cells on %s with %d worker(s)", len(lattice), model.attack_node, workers)

    def run(cell: Tuple[float, float]) -> SweepCell:
        return evaluate_cell(model, x, demand, cell[0], cell[1], uncertainty, hour)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(run, lattice))
    else:
        cells = [run(cell) for cell in lattice]

    cap = demand.cap(hour) if isinstance(demand, LoadParams) else float(demand)
    metadata = {
        "model_hash": model.fingerprint(),
        "attack_node": model.attack_node,
        "x_snapshot": state_digest(x),
        "cap_mw": cap * model.base_mva,
        "alpha_mw": (chance_margin(uncertainty) if uncertainty else 0.0) * model.base_mva,
        "cells": len(cells),
        "feasible_cells": sum(c.feasible for c in cells),
    }
    logger.info("Sweep done: %d of %d cells feasible", metadata["feasible_cells"], len(cells))
    return SweepResult(cells, region.xi_values(), region.omega_values(), metadata)
