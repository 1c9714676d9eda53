"""
Minimum demand under uniform errors in the grid parameters
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from evcs_attack.attack.synthesis import UncertaintySpec, synthesize
from evcs_attack.errors import EvcsAttackError
from evcs_attack.grid.model import StateSpaceModel, assemble_descriptor, perturb_parameters
from evcs_attack.grid.spec import GridSpec, LoadParams
from evcs_attack.vulnerability.region import NOT_AVAILABLE_EPSILON, achieved_cell, relocation_error, targets_from

logger = logging.getLogger(__name__)

ModelBuilder = Callable[[float], StateSpaceModel]


@dataclass(frozen=True)
class SensitivityRow:
    error_pct: float
    delta_p_mw: Optional[float]
    xi: Optional[float]
    omega_n: Optional[float]
    epsilon: Optional[float]
    feasible: bool
    error: str = ""

    @property
    def not_available(self) -> bool:
        return self.epsilon is None or self.epsilon > NOT_AVAILABLE_EPSILON


def perturbed_builder(spec: GridSpec, attack_node: str) -> ModelBuilder:
    """Model builder applying a uniform parameter error (percent) before assembly"""

    def build(error_pct: float) -> StateSpaceModel:
        return assemble_descriptor(perturb_parameters(spec, error_pct), attack_node)

    return build


def sensitivity(
    model_builder: ModelBuilder,
    error_pcts: Sequence[float],
    cell: Tuple[float, float],
    x: np.ndarray,
    demand: Union[LoadParams, float],
    uncertainty: Optional[UncertaintySpec] = None,
    hour: Optional[int] = None,
) -> List[SensitivityRow]:
    """Re-synthesize toward `cell` = (xi, omega_n) on a model rebuilt for each parameter error"""
    targets = targets_from(*cell)
    rows = []
    for error_pct in error_pcts:
        if not np.isfinite(error_pct):
            raise ValueError(f"parameter error must be finite, got {error_pct}")
        try:
            model = model_builder(error_pct)
            plan = synthesize(model, targets, x, demand, uncertainty=uncertainty, hour=hour)
        except (EvcsAttackError, ValueError) as e:
            logger.info("Parameter error %+g%%: %s", error_pct, e)
            rows.append(SensitivityRow(error_pct, None, None, None, None, False, error=str(e)))
            continue

        xi, omega_n = achieved_cell(plan.achieved, targets)
        rows.append(
            SensitivityRow(
                error_pct=error_pct,
                delta_p_mw=plan.delta_p_mw,
                xi=xi,
                omega_n=omega_n,
                epsilon=relocation_error(plan.achieved, targets),
                feasible=plan.feasible,
            )
        )
        logger.debug("Parameter error %+g%%: %.6g MW", error_pct, plan.delta_p_mw)
    return rows
