"""
Minimum-norm, demand-bounded attack gain synthesis
"""

import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterator, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy.stats import norm

from evcs_attack.attack.placement import (
    RANK_RTOL,
    PlacementProblem,
    char_poly,
    check_conjugate_closed,
    controllability_matrix,
    controllable_basis,
    hankel_W,
    numerical_rank,
    target_equations,
)
from evcs_attack.dynamics.spectral import Spectrum, assignment_distance, spectrum, unmatched
from evcs_attack.errors import SynthesisError
from evcs_attack.grid.model import StateSpaceModel
from evcs_attack.grid.spec import LoadParams

logger = logging.getLogger(__name__)

# relocation error above this, relative to 1 + max |target|, means the targets were missed
PLACEMENT_TOL = 1e-6


@dataclass(frozen=True)
class UncertaintySpec:
    """Gaussian error of the attacker's demand estimate: tail probability eta, standard deviation (per-unit)"""

    eta: float
    stdev: float = 0.0

    def __post_init__(self):
        if not 0 < self.eta <= 0.5:
            raise ValueError(f"eta must be in (0, 0.5], got {self.eta}")
        if not (math.isfinite(self.stdev) and self.stdev >= 0):
            raise ValueError(f"stdev must be non-negative, got {self.stdev}")


def chance_margin(u: UncertaintySpec) -> float:
    """Back-off alpha = Phi^-1(1 - eta) * stdev tightening the demand bound"""
    if u.stdev == 0:
        return 0.0
    return max(float(norm.ppf(1.0 - u.eta)) * u.stdev, 0.0)


@dataclass(frozen=True, eq=False)
class AttackPlan:
    """A synthesized gain and what it costs; amounts are per-unit on base_mva"""

    k_a: np.ndarray
    delta_p_pu: float
    feasible: bool
    alpha_pu: float = 0.0
    cap_pu: float = math.inf
    shortfall_pu: float = 0.0
    targets: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    achieved: Optional[Spectrum] = None
    epsilon: float = 0.0
    remaining: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    residual: float = 0.0
    rank_Mc: int = 0
    attack_node: str = ""
    base_mva: float = 100.0
    reason: str = ""  # why the plan is infeasible: "demand" or "placement"

    @property
    def delta_p_mw(self) -> float:
        return self.delta_p_pu * self.base_mva

    @property
    def alpha_mw(self) -> float:
        return self.alpha_pu * self.base_mva

    def to_dict(self) -> Dict[str, Any]:
        achieved = [] if self.achieved is None else self.achieved.eigenvalues
        return {
            "attack_node": self.attack_node,
            "k_a": [float(v) for v in self.k_a],
            "delta_p_pu": self.delta_p_pu,
            "delta_p_mw": self.delta_p_mw,
            "cap_pu": self.cap_pu if math.isfinite(self.cap_pu) else None,
            "alpha_pu": self.alpha_pu,
            "shortfall_pu": self.shortfall_pu,
            "feasible": self.feasible,
            "reason": self.reason,
            "targets": [_pair(v) for v in self.targets],
            "achieved": [_pair(v) for v in achieved],
            "remaining": [_pair(v) for v in self.remaining],
            "epsilon": self.epsilon,
            "rank_mc": self.rank_Mc,
            "identity_residual": self.residual,
        }


def _pair(value: complex) -> list:
    return [float(np.real(value)), float(np.imag(value))]


def solve_min_norm(
    V: np.ndarray,
    h: np.ndarray,
    x: np.ndarray,
    dpl_max: float,
    alpha: float = 0.0,
    subspace: Optional[np.ndarray] = None,
) -> AttackPlan:
    """Smallest gain with V k + h = 0 and |k @ x| <= dpl_max - alpha.

    The minimum-norm solution is tried first; if it breaks the demand bound it is moved
    along the null space of V (inside `subspace` when given) by the closed-form shortest
    step onto the bound. When x has no component in that null space the plan is infeasible.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    h = np.asarray(h, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float).reshape(-1)
    m, n = V.shape
    if h.shape != (m,) or x.shape != (n,):
        raise ValueError(f"shape mismatch: V {V.shape}, h {h.shape}, x {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("operating state has non-finite entries")
    if alpha < 0:
        raise ValueError(f"margin alpha must be non-negative, got {alpha}")
    if not dpl_max > alpha:
        raise ValueError(f"demand cap {dpl_max:.6g} pu does not exceed the margin {alpha:.6g} pu")
    if numerical_rank(V) < m:
        raise ValueError(f"V is rank deficient (rank {numerical_rank(V)} < {m})")

    cap = dpl_max - alpha
    k = -scipy.linalg.lstsq(V, h)[0]
    demand = float(k @ x)

    if abs(demand) > cap:
        if subspace is None:
            null = scipy.linalg.null_space(V, rcond=RANK_RTOL)
        else:
            null = subspace @ scipy.linalg.null_space(V @ subspace, rcond=RANK_RTOL)
        x_null = null @ (null.T @ x) if null.size else np.zeros(n)

        if np.linalg.norm(x_null) > RANK_RTOL * np.linalg.norm(x):
            goal = math.copysign(cap, demand)
            k = k + (goal - demand) / (x_null @ x_null) * x_null
            demand = float(k @ x)
            logger.debug("Moved gain along null(V) to meet the demand bound (%.6g pu)", cap)

    delta_p = abs(demand)
    feasible = delta_p <= cap * (1 + 1e-9) + 1e-15
    return AttackPlan(
        k_a=k,
        delta_p_pu=delta_p,
        feasible=feasible,
        alpha_pu=alpha,
        cap_pu=dpl_max,
        shortfall_pu=0.0 if feasible else delta_p - cap,
        reason="" if feasible else "demand",
    )


@contextmanager
def _stage(name: str) -> Iterator[None]:
    try:
        yield
    except SynthesisError:
        raise
    except (ValueError, np.linalg.LinAlgError) as e:
        raise SynthesisError(name, str(e)) from e


def synthesize(
    model: StateSpaceModel,
    targets: Sequence[complex],
    x: np.ndarray,
    demand: Union[LoadParams, float],
    uncertainty: Optional[UncertaintySpec] = None,
    hour: Optional[int] = None,
) -> AttackPlan:
    """Gain moving `targets` into the spectrum of A - B k with the least norm the demand allows.

    `demand` is the attack node's LoadParams (its cap at `hour`, or evcs_max) or a cap in per-unit.
    """
    with _stage("targets"):
        targets = check_conjugate_closed(targets)
        if len(targets) == 0:
            raise ValueError("no target eigenvalues given")
        dpl_max = demand.cap(hour) if isinstance(demand, LoadParams) else float(demand)

    with _stage("char_poly"):
        o = char_poly(model.A)

    with _stage("controllability"):
        mc, rank = controllability_matrix(model.A, model.B)
        if len(targets) > rank:
            raise ValueError(
                f"{len(targets)} targets requested but only {rank} eigenvalues are movable from {model.attack_node}"
            )

    with _stage("placement"):
        problem = PlacementProblem(
            targets=targets, o=o, W=hankel_W(o), Mc=mc, rank_Mc=rank, basis=controllable_basis(mc, rank)
        )
        if problem.a[0] == 0:
            raise ValueError("target at the origin (a0 = 0); perturb it, e.g. by 1e-9")

    with _stage("reduction"):
        V, h = target_equations(model.A, model.B, problem.targets, basis=problem.basis)

    with _stage("uncertainty"):
        alpha = chance_margin(uncertainty) if uncertainty is not None else 0.0

    with _stage("solve"):
        plan = solve_min_norm(V, h, x, dpl_max, alpha, subspace=problem.basis)
        achieved = spectrum(model.A - np.outer(model.B, plan.k_a))
        epsilon = assignment_distance(achieved.eigenvalues, problem.targets)
        missed = epsilon > PLACEMENT_TOL * (1.0 + np.max(np.abs(problem.targets)))
        if missed:
            logger.warning("Targets missed on %s: eps = %.3g", model.attack_node, epsilon)
        plan = replace(
            plan,
            feasible=plan.feasible and not missed,
            reason=plan.reason or ("placement" if missed else ""),
            targets=problem.targets,
            achieved=achieved,
            epsilon=epsilon,
            remaining=unmatched(achieved.eigenvalues, problem.targets),
            residual=problem.identity_residual(plan.k_a),
            rank_Mc=rank,
            attack_node=model.attack_node,
            base_mva=model.base_mva,
        )

    logger.info(
        "Attack on %s: |K| = %.4g, dP = %.6g MW, eps = %.3g, %s",
        model.attack_node,
        np.linalg.norm(plan.k_a),
        plan.delta_p_mw,
        plan.epsilon,
        "feasible" if plan.feasible else "infeasible",
    )
    return plan
