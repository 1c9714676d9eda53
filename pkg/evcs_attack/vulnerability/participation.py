"""
Participation factors of states in modes
"""

from typing import List, Sequence, Tuple

import numpy as np
import scipy.linalg

DEFECTIVE_CONDITION = 1e12


def participation_factors(a: np.ndarray) -> np.ndarray:
    """P[k, i] = |right[k, i] * left[i, k]| with each mode column scaled to sum to 1.

    Mode columns follow the canonical order of `spectrum(a)` (real part, then imaginary part).
    """
    a = np.asarray(a, dtype=float)
    values, right = scipy.linalg.eig(a)
    cond = np.linalg.cond(right)
    if not np.isfinite(cond) or cond > DEFECTIVE_CONDITION:
        raise ValueError(f"matrix looks defective (eigenvector condition {cond:.3g}); participation undefined")

    left = scipy.linalg.inv(right)
    p = np.abs(right * left.T)
    p = p / p.sum(axis=0, keepdims=True)

    order = np.lexsort((values.imag, values.real))
    return p[:, order]


def dominant_states(
    p: np.ndarray, state_names: Sequence[str], mode: int, count: int = 4
) -> List[Tuple[str, float]]:
    """The `count` states with the largest participation in column `mode`"""
    column = p[:, mode]
    top = np.argsort(-column, kind="stable")[:count]
    return [(state_names[k], float(column[k])) for k in top]


def modes_near(eigenvalues: np.ndarray, points: Sequence[complex]) -> List[int]:
    """Index of the eigenvalue nearest each point"""
    return [int(np.argmin(np.abs(eigenvalues - pt))) for pt in points]
