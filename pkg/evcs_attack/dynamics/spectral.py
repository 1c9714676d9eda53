"""
Eigenvalue spectrum and per-mode damping summary
"""

from dataclasses import dataclass
from typing import Iterator, List

import numpy as np
import scipy.linalg
import scipy.optimize


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues (rad/s) sorted by real part, then imaginary part"""

    eigenvalues: np.ndarray

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def __iter__(self) -> Iterator[complex]:
        return iter(self.eigenvalues)

    @property
    def max_real(self) -> float:
        return float(np.max(self.eigenvalues.real)) if len(self) else float("-inf")

    @property
    def is_stable(self) -> bool:
        return self.max_real < 0

    def unstable(self) -> np.ndarray:
        return self.eigenvalues[self.eigenvalues.real >= 0]


@dataclass(frozen=True)
class ModeRow:
    eigenvalue: complex
    xi: float
    omega_n: float
    f_hz: float


def sort_canonical(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    order = np.lexsort((values.imag, values.real))
    return values[order]


def spectrum(a: np.ndarray) -> Spectrum:
    """Eigenvalues of a square real matrix"""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if a.shape[0] == 0:
        return Spectrum(np.zeros(0, dtype=complex))

    values = sort_canonical(scipy.linalg.eigvals(a))
    values.setflags(write=False)
    return Spectrum(values)


def mode_table(spec: Spectrum) -> List[ModeRow]:
    """Damping ratio, natural frequency and oscillation frequency of every eigenvalue"""
    rows = []
    for value in spec.eigenvalues:
        omega_n = abs(value)
        xi = -value.real / omega_n if omega_n > 0 else 0.0
        rows.append(ModeRow(eigenvalue=complex(value), xi=xi, omega_n=omega_n, f_hz=value.imag / (2 * np.pi)))
    return rows


def assignment_distance(achieved: np.ndarray, targets: np.ndarray) -> float:
    """Euclidean norm of the differences between the targets and their optimally paired achieved eigenvalues"""
    achieved = np.asarray(achieved, dtype=complex)
    targets = np.asarray(targets, dtype=complex)
    if len(achieved) < len(targets):
        raise ValueError(f"need at least {len(targets)} achieved eigenvalues, got {len(achieved)}")
    cost = np.abs(achieved[:, None] - targets[None, :]) ** 2
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    return float(np.sqrt(cost[rows, cols].sum()))


def unmatched(achieved: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Achieved eigenvalues left over after pairing the targets as assignment_distance does"""
    achieved = np.asarray(achieved, dtype=complex)
    targets = np.asarray(targets, dtype=complex)
    if len(targets) == 0:
        return sort_canonical(achieved)
    cost = np.abs(achieved[:, None] - targets[None, :]) ** 2
    rows, _ = scipy.optimize.linear_sum_assignment(cost)
    keep = np.ones(len(achieved), dtype=bool)
    keep[rows] = False
    return sort_canonical(achieved[keep])


def least_damped(spec: Spectrum) -> int:
    """Index of the mode with the smallest damping ratio (first one on ties)"""
    if not len(spec):
        raise ValueError("empty spectrum has no modes")
    return int(np.argmin([row.xi for row in mode_table(spec)]))
