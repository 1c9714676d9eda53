"""
Region of vulnerability in the (damping ratio, natural frequency) plane
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from evcs_attack.dynamics.spectral import Spectrum, assignment_distance

NOT_AVAILABLE_EPSILON = 0.1


@dataclass(frozen=True)
class RegionSpec:
    """Lattice of candidate (xi, omega_n) cells; omega in rad/s"""

    xi_min: float = -0.09
    xi_max: float = 0.03
    xi_step: float = 0.003
    omega_min: float = 2.5
    omega_max: float = 12.6
    omega_step: float = 0.1

    def __post_init__(self):
        for name, lo, hi, step in (
            ("xi", self.xi_min, self.xi_max, self.xi_step),
            ("omega", self.omega_min, self.omega_max, self.omega_step),
        ):
            if hi < lo:
                raise ValueError(f"{name}_max ({hi}) is below {name}_min ({lo})")
            if step < 0 or (step == 0 and hi > lo):
                raise ValueError(f"{name}_step must be positive, got {step}")
        if self.xi_min <= -1 or self.xi_max >= 1:
            raise ValueError("damping ratios must lie in (-1, 1)")
        if self.omega_min <= 0:
            raise ValueError("omega_min must be positive")

    @classmethod
    def single(cls, xi: float, omega_n: float) -> "RegionSpec":
        return cls(xi_min=xi, xi_max=xi, xi_step=0.0, omega_min=omega_n, omega_max=omega_n, omega_step=0.0)

    def xi_values(self) -> List[float]:
        return _axis(self.xi_min, self.xi_max, self.xi_step)

    def omega_values(self) -> List[float]:
        return _axis(self.omega_min, self.omega_max, self.omega_step)

    def cells(self) -> List[Tuple[float, float]]:
        """All (xi, omega_n) pairs, omega-major"""
        return [(xi, omega) for omega in self.omega_values() for xi in self.xi_values()]

    def contains(self, xi: float, omega_n: float) -> bool:
        tol = 1e-9
        return (
            self.xi_min - tol <= xi <= self.xi_max + tol and self.omega_min - tol <= omega_n <= self.omega_max + tol
        )


def _axis(lo: float, hi: float, step: float) -> List[float]:
    if step == 0:
        return [lo]
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def targets_from(xi: float, omega_n: float) -> np.ndarray:
    """Conjugate pair -xi omega_n +/- j omega_n sqrt(1 - xi^2), positive imaginary part first"""
    if abs(xi) >= 1:
        raise ValueError(f"|xi| must be below 1 for an oscillatory pair, got {xi}")
    if not omega_n > 0:
        raise ValueError(f"omega_n must be positive, got {omega_n}")
    re = -xi * omega_n
    im = omega_n * math.sqrt(1.0 - xi * xi)
    return np.array([complex(re, im), complex(re, -im)])


def cell_of(eigenvalue: complex) -> Tuple[float, float]:
    """(xi, omega_n) of an eigenvalue"""
    omega_n = abs(eigenvalue)
    if omega_n == 0:
        return 0.0, 0.0
    return -eigenvalue.real / omega_n, omega_n


def achieved_cell(achieved: Spectrum, targets: Sequence[complex]) -> Tuple[float, float]:
    """Cell of the achieved eigenvalue closest to the upper target"""
    upper = max(targets, key=lambda t: t.imag)
    nearest = min(achieved.eigenvalues, key=lambda e: abs(e - upper))
    return cell_of(complex(nearest.real, abs(nearest.imag)))


def relocation_error(achieved: Spectrum, targets: Sequence[complex]) -> float:
    """Distance between the targets and the achieved eigenvalues paired with them optimally"""
    if len(achieved) < 2:
        raise ValueError("relocation error needs at least two achieved eigenvalues")
    return assignment_distance(achieved.eigenvalues, np.asarray(targets, dtype=complex))
