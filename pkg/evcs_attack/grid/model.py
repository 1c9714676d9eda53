"""
Admittance matrix and descriptor / regularized state-space assembly.

State x = [delta, omega, theta] with one delta and omega per generator node (the
reference node included) and one theta per load node. With Y the DC Laplacian
(injection P = Y @ [delta; theta]) the dynamics are

    delta' = omega
    M omega' = -(D_G + K_P) omega - K_I delta - Y_GG delta - Y_GL theta
    D_L theta' = -Y_LG delta - Y_LL theta - I_hat u

i.e. E x' = A_hat x + B_hat u with E = blkdiag(I, -M, D_L) and B_hat = [0; 0; -I_hat],
where u is the additional demand switched on at the attack node. A positive u lowers
frequency, and at equilibrium the AGC mechanical change balances u exactly.
"""

import hashlib
import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.linalg

from evcs_attack.errors import GridValidationError, SingularDescriptorError
from evcs_attack.grid.spec import GridSpec, StateIndexMap

logger = logging.getLogger(__name__)


def build_admittance(spec: GridSpec) -> np.ndarray:
    """Node-indexed susceptance Laplacian in `spec.bus_order` (generators first, then loads)"""
    order = spec.bus_order
    index = {node: i for i, node in enumerate(order)}
    y = np.zeros((len(order), len(order)))

    for branch in spec.branches:
        i, k = index[branch.from_node], index[branch.to_node]
        y[i, k] -= branch.susceptance
        y[k, i] -= branch.susceptance

    # Diagonal from the off-diagonals so row sums are exactly zero
    np.fill_diagonal(y, 0.0)
    np.fill_diagonal(y, -y.sum(axis=1))
    return y


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Descriptor pieces (E, A_hat, B_hat), their regularization (A, B) and the attacked load node.

    B and B_hat are 1-D: the input u is scalar. `gain` is set on closed-loop models
    produced by `closed_loop`, whose feedback u = -gain @ x is already folded into A.
    """

    E: np.ndarray
    A_hat: np.ndarray
    B_hat: np.ndarray
    A: np.ndarray
    B: np.ndarray
    index_map: StateIndexMap
    attack_node: str
    f_s: float = 60.0
    base_mva: float = 100.0
    k_p: Optional[np.ndarray] = None
    k_i: Optional[np.ndarray] = None
    gain: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def is_closed_loop(self) -> bool:
        return self.gain is not None

    def closed_loop(self, k: np.ndarray) -> "StateSpaceModel":
        """Model under the state feedback u = -k @ x (gains compose if already closed)"""
        k = np.asarray(k, dtype=float).reshape(-1)
        if k.shape != (self.n,):
            raise ValueError(f"gain must have {self.n} entries, got {k.shape[0]}")
        total = k if self.gain is None else self.gain + k
        return replace(
            self,
            A_hat=_frozen(self.A_hat - np.outer(self.B_hat, k)),
            A=_frozen(self.A - np.outer(self.B, k)),
            gain=_frozen(total),
        )

    def feedback_input(self, x: np.ndarray) -> float:
        """Attacker demand -gain @ x on a closed-loop model, 0 otherwise"""
        if self.gain is None:
            return 0.0
        return float(-self.gain @ x)

    def fingerprint(self) -> str:
        """Short SHA-256 of A, B and the attack node; identifies the model in reports"""
        digest = hashlib.sha256()
        digest.update(np.ascontiguousarray(self.A).tobytes())
        digest.update(np.ascontiguousarray(self.B).tobytes())
        digest.update(self.attack_node.encode("utf-8"))
        return digest.hexdigest()[:16]


def assemble_descriptor(spec: GridSpec, attack_node: str) -> StateSpaceModel:
    """Build E, A_hat, B_hat for an attack on `attack_node` and regularize to A = E^-1 A_hat, B = E^-1 B_hat"""
    if attack_node not in spec.load_ids:
        raise GridValidationError("attack_node", f"'{attack_node}' is not a load node (loads: {spec.load_ids})")

    bad = [ld.node for ld in spec.loads if not ld.damping > 0]
    if bad:
        raise SingularDescriptorError(f"load damping must be positive for E to be invertible; offending nodes: {bad}")

    index_map = StateIndexMap.from_spec(spec)
    g, nl = len(spec.generators), len(spec.loads)
    n = index_map.n

    y = build_admittance(spec)
    y_gg, y_gl = y[:g, :g], y[:g, g:]
    y_lg, y_ll = y[g:, :g], y[g:, g:]

    inertia = np.array([gen.inertia for gen in spec.generators])
    damping_g = np.array([gen.damping for gen in spec.generators])
    k_p = np.array([gen.k_p for gen in spec.generators])
    k_i = np.array([gen.k_i for gen in spec.generators])
    damping_l = np.array([ld.damping for ld in spec.loads])

    d, w, t = index_map.delta_slice, index_map.omega_slice, index_map.theta_slice

    e = np.zeros((n, n))
    e[d, d] = np.eye(g)
    e[w, w] = -np.diag(inertia)
    e[t, t] = np.diag(damping_l)

    a_hat = np.zeros((n, n))
    a_hat[d, w] = np.eye(g)
    a_hat[w, d] = np.diag(k_i) + y_gg
    a_hat[w, w] = np.diag(damping_g + k_p)
    a_hat[w, t] = y_gl
    a_hat[t, d] = -y_lg
    a_hat[t, t] = -y_ll

    b_hat = np.zeros(n)
    b_hat[index_map.theta(attack_node)] = -1.0

    try:
        regularized = scipy.linalg.solve(e, np.column_stack([a_hat, b_hat]))
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularDescriptorError(f"E could not be inverted: {exc}") from exc

    logger.info("Assembled %d-state model (G=%d, L=%d), attack node %s", n, g, nl, attack_node)
    return StateSpaceModel(
        E=_frozen(e),
        A_hat=_frozen(a_hat),
        B_hat=_frozen(b_hat),
        A=_frozen(regularized[:, :n]),
        B=_frozen(regularized[:, n]),
        index_map=index_map,
        attack_node=attack_node,
        f_s=spec.f_s,
        base_mva=spec.base_mva,
        k_p=_frozen(k_p),
        k_i=_frozen(k_i),
    )


def scale_evcs_demand(spec: GridSpec, node: str, factor: float) -> GridSpec:
    """Copy of `spec` with the EVCS mean, stdev and cap at `node` multiplied by `factor`"""
    if not factor > 0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    if node not in spec.load_ids:
        raise GridValidationError("node", f"unknown load node '{node}'")
    loads = tuple(ld.scaled(factor) if ld.node == node else ld for ld in spec.loads)
    return replace(spec, loads=loads)


def perturb_parameters(spec: GridSpec, error_pct: float) -> GridSpec:
    """Scale M, D_G, D_L and every branch susceptance by (1 + error_pct / 100)"""
    factor = 1.0 + error_pct / 100.0
    if not factor > 0:
        raise ValueError(f"parameter error {error_pct}% leaves non-positive parameters")
    generators = tuple(replace(g, inertia=g.inertia * factor, damping=g.damping * factor) for g in spec.generators)
    loads = tuple(replace(ld, damping=ld.damping * factor) for ld in spec.loads)
    branches = tuple(replace(b, susceptance=b.susceptance * factor) for b in spec.branches)
    return replace(spec, generators=generators, loads=loads, branches=branches)


def steady_state_response(model: StateSpaceModel, u: float) -> np.ndarray:
    """Equilibrium x with A x + B u = 0 for a constant input u"""
    return -scipy.linalg.solve(model.A, model.B * u)


def mechanical_balance(model: StateSpaceModel, x: np.ndarray) -> float:
    """Total AGC mechanical power change sum(-K_P omega - K_I delta) at state x"""
    if model.k_p is None or model.k_i is None:
        raise ValueError("model carries no AGC gains")
    im = model.index_map
    return float(-(model.k_p @ x[im.omega_slice]) - (model.k_i @ x[im.delta_slice]))


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array
