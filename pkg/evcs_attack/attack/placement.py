"""
Partial eigenvalue relocation through characteristic-polynomial coefficients.

For the feedback u = -k @ x the closed-loop polynomial is p(s) = o(s) + q(s), with the
coefficient vector q = W @ Mc.T @ k (W the Hankel matrix of o, Mc the controllability
matrix). Asking p = a * r for a monic target factor a of degree m and some monic r of
degree n - m, the low-order coefficients of the product fix r = F q + g; the remaining
m coefficients give the linear system V k + h = 0.

synthesize solves the same conditions in their evaluated form (target_equations), which
keeps full precision when the eigenvalues of A span several decades.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from evcs_attack.dynamics.spectral import sort_canonical

logger = logging.getLogger(__name__)

CHAR_POLY_MAX_ORDER = 64
RANK_RTOL = 1e-10
CONJUGATE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CharPoly:
    """Monic s^n + c[n-1] s^(n-1) + ... + c[0]; `coefficients` holds c[0..n-1]"""

    coefficients: np.ndarray

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def full(self) -> np.ndarray:
        """Ascending coefficients with the leading 1 appended"""
        return np.append(self.coefficients, 1.0)

    def __call__(self, s: complex) -> complex:
        return np.polyval(self.full()[::-1], s)

    def companion(self) -> np.ndarray:
        n = self.order
        mat = np.zeros((n, n))
        if n:
            mat[1:, :-1] = np.eye(n - 1)
            mat[:, -1] = -self.coefficients
        return mat

    def roots(self) -> np.ndarray:
        return sort_canonical(np.roots(self.full()[::-1])) if self.order else np.zeros(0, dtype=complex)


def monic_from_roots(roots: Sequence[complex]) -> np.ndarray:
    """Real ascending coefficients [c0 .. c(m-1)] of prod(s - root) for conjugate-closed roots"""
    roots = np.asarray(roots, dtype=complex)
    if len(roots) == 0:
        return np.zeros(0)
    descending = np.poly(roots)
    return np.real(descending[::-1][:-1]).copy()


def char_poly(a: np.ndarray, max_order: int = CHAR_POLY_MAX_ORDER) -> CharPoly:
    """Characteristic polynomial det(sI - A), expanded from the eigenvalues"""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > max_order:
        raise ValueError(f"matrix order {a.shape[0]} exceeds the characteristic polynomial cap {max_order}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if a.shape[0] == 0:
        return CharPoly(np.zeros(0))
    return CharPoly(monic_from_roots(scipy.linalg.eigvals(a)))


def controllability_matrix(a: np.ndarray, b: np.ndarray, rtol: float = RANK_RTOL) -> Tuple[np.ndarray, int]:
    """Mc = [b, A b, ..., A^(n-1) b] and its numerical rank (singular values above rtol * largest)"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape != (n,):
        raise ValueError(f"dimension mismatch: A {a.shape}, b {b.shape}")

    mc = np.empty((n, n))
    column = b
    for i in range(n):
        mc[:, i] = column
        column = a @ column
    return mc, numerical_rank(mc, rtol)


def numerical_rank(mat: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if mat.size == 0:
        return 0
    sv = scipy.linalg.svdvals(mat)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def controllable_basis(mc: np.ndarray, rank: int) -> np.ndarray:
    """Orthonormal basis (n x rank) of the numerical column space of Mc"""
    u, _, _ = scipy.linalg.svd(mc)
    return u[:, :rank]


def hankel_W(o: CharPoly) -> np.ndarray:
    """W[i, j] = o[i + j + 1] with o[n] = 1 and zeros below the anti-diagonal"""
    n = o.order
    first_column = np.append(o.coefficients[1:], 1.0) if n else np.zeros(0)
    return scipy.linalg.hankel(first_column, np.zeros(n))


def build_F_g(a: Sequence[float], o: CharPoly, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Affine map r = F q + g from the gain response q to the quotient r = (o + q) / a.

    `a` holds [a0 .. a(m-1)] of the monic target factor. r is returned ascending with its
    leading coefficient last (row n - m of F is zero, g[n - m] = 1).
    """
    a = np.asarray(a, dtype=float)
    n = o.order
    if m < 1:
        raise ValueError("at least one target eigenvalue is required")
    if m > n:
        raise ValueError(f"cannot place {m} eigenvalues in an order-{n} system")
    if a.shape != (m,):
        raise ValueError(f"target factor must have {m} coefficients, got {a.shape[0]}")
    if a[0] == 0:
        raise ValueError("target at the origin (a0 = 0); perturb it, e.g. by 1e-9")

    a_full = np.append(a, 1.0)
    o_full = o.full()
    rows = n - m + 1
    f = np.zeros((rows, n))
    g = np.zeros(rows)

    for i in range(rows - 1):
        f_row = np.zeros(n)
        f_row[i] = 1.0
        g_val = o_full[i]
        for j in range(1, min(i, m) + 1):
            f_row -= a_full[j] * f[i - j]
            g_val -= a_full[j] * g[i - j]
        f[i] = f_row / a[0]
        g[i] = g_val / a[0]

    g[-1] = 1.0
    return f, g


def convolution_matrix(a_full: np.ndarray, length: int) -> np.ndarray:
    """T with T @ r == np.convolve(a_full, r) for r of the given length"""
    t = np.zeros((len(a_full) + length - 1, length))
    for col in range(length):
        t[col : col + len(a_full), col] = a_full
    return t


def check_conjugate_closed(targets: Sequence[complex], tol: float = CONJUGATE_TOL) -> np.ndarray:
    targets = np.asarray(targets, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(targets)):
        raise ValueError("targets must be finite")
    mine = sort_canonical(targets)
    mirrored = sort_canonical(np.conj(targets))
    if not np.allclose(mine, mirrored, rtol=0.0, atol=tol * (1.0 + np.max(np.abs(targets), initial=0.0))):
        raise ValueError("targets must be closed under complex conjugation")
    return targets


@dataclass(frozen=True, eq=False)
class PlacementProblem:
    """Everything the reduced system depends on, for one (A, b, targets) triple"""

    targets: np.ndarray
    o: CharPoly
    W: np.ndarray
    Mc: np.ndarray
    rank_Mc: int
    basis: np.ndarray  # numerical column space of Mc

    @property
    def m(self) -> int:
        return len(self.targets)

    @property
    def a(self) -> np.ndarray:
        return monic_from_roots(self.targets)

    @classmethod
    def build(cls, a: np.ndarray, b: np.ndarray, targets: Sequence[complex]) -> "PlacementProblem":
        targets = check_conjugate_closed(targets)
        o = char_poly(a)
        mc, rank = controllability_matrix(a, b)
        if len(targets) > rank:
            raise ValueError(f"{len(targets)} targets requested but rank(Mc) = {rank}")
        return cls(targets=targets, o=o, W=hankel_W(o), Mc=mc, rank_Mc=rank, basis=controllable_basis(mc, rank))

    def response(self, k: np.ndarray) -> np.ndarray:
        """Coefficient change q = W @ Mc.T @ k that the gain adds to o"""
        return self.W @ (self.Mc.T @ k)

    def quotient(self, k: np.ndarray) -> np.ndarray:
        """Coefficients of the remaining factor r(s) for gain k (ascending, leading 1 last)"""
        f, g = build_F_g(self.a, self.o, self.m)
        return f @ self.response(k) + g

    def identity_residual(self, k: np.ndarray) -> float:
        """Relative size of conv(a, r) - o_full - [q, 0], zero when k places the targets"""
        product = np.convolve(np.append(self.a, 1.0), self.quotient(k))
        target = self.o.full() + np.append(self.response(k), 0.0)
        scale = max(np.max(np.abs(target)), 1.0)
        return float(np.max(np.abs(product - target)) / scale)


def reduce_to_Vh(
    targets: Sequence[complex],
    o: CharPoly,
    W: np.ndarray,
    Mc: np.ndarray,
    basis: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Real m x n system V k + h = 0 whose solutions place `targets`.

    The conjugate-closed targets give a real factor a(s), so every row is already real.
    With `basis` the system is restricted to gains in its column span. Rows are chosen by
    column-pivoted QR of the candidate rows; raises LinAlgError when fewer than m are independent.
    """
    targets = check_conjugate_closed(targets)
    m = len(targets)
    n = o.order
    a = monic_from_roots(targets)
    f, g = build_F_g(a, o, m)

    t = convolution_matrix(np.append(a, 1.0), n - m + 1)[:n]
    c = t @ f - np.eye(n)
    c0 = t @ g - o.coefficients
    v_all = c @ W @ Mc.T

    restricted = v_all if basis is None else v_all @ basis
    if restricted.shape[1] < m:
        raise np.linalg.LinAlgError(f"only {restricted.shape[1]} gain directions for {m} targets")

    _, r, pivots = scipy.linalg.qr(restricted.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if len(diag) < m or diag[0] == 0 or diag[m - 1] <= RANK_RTOL * diag[0]:
        raise np.linalg.LinAlgError(f"fewer than {m} independent equations; targets unreachable from this input")

    rows = np.sort(pivots[:m])
    logger.debug("Reduced system uses coefficient rows %s of %d", rows.tolist(), n)

    v = v_all[rows]
    if basis is not None:
        v = v @ basis @ basis.T
    return v, c0[rows]


def _resolvent(a: np.ndarray, b: np.ndarray, s: complex, power: int = 1) -> Optional[np.ndarray]:
    """(sI - A)^-power @ b, or None when s is numerically an eigenvalue of A"""
    shifted = s * np.eye(a.shape[0], dtype=complex) - a
    try:
        lu = scipy.linalg.lu_factor(shifted, check_finite=False)
    except (ValueError, np.linalg.LinAlgError):
        return None
    if np.min(np.abs(np.diag(lu[0]))) <= RANK_RTOL * max(np.max(np.abs(shifted)), 1.0):
        return None
    z = b.astype(complex)
    for _ in range(power):
        z = scipy.linalg.lu_solve(lu, z, check_finite=False)
    return z if np.all(np.isfinite(z)) else None


def _distinct_targets(targets: np.ndarray) -> List[Tuple[complex, int]]:
    """Upper half-plane representatives of the targets with their multiplicities"""
    scale = 1.0 + np.max(np.abs(targets), initial=0.0)
    groups: List[Tuple[complex, int]] = []
    for value in sort_canonical(targets):
        if value.imag < -CONJUGATE_TOL * scale:
            continue
        if abs(value.imag) <= CONJUGATE_TOL * scale:
            value = complex(value.real, 0.0)
        for i, (seen, count) in enumerate(groups):
            if abs(seen - value) <= CONJUGATE_TOL * scale:
                groups[i] = (seen, count + 1)
                break
        else:
            groups.append((complex(value), 1))
    return groups


def target_equations(
    a: np.ndarray,
    b: np.ndarray,
    targets: Sequence[complex],
    basis: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Real m x n system V k + h = 0 whose solutions place `targets`, evaluated at the targets.

    det(sI - A + b k') = o(s) (1 + k' (sI - A)^-1 b), so each target e asks k' z(e) = -1 with
    z(e) = (eI - A)^-1 b. This is the coefficient identity of reduce_to_Vh written at its roots,
    without the powers of A that make Mc and o lose every digit on stiff models. Rows are scaled
    to unit norm; a complex pair gives its real and imaginary part, a repeated target adds
    k' (eI - A)^-j b = 0 for the higher powers, and a target on an open-loop eigenvalue asks k to
    annihilate the eigenvector. With `basis` the rows are projected onto its span.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    targets = check_conjugate_closed(targets)
    m = len(targets)
    n = a.shape[0]
    if m < 1:
        raise ValueError("at least one target eigenvalue is required")
    if m > n:
        raise ValueError(f"cannot place {m} eigenvalues in an order-{n} system")

    rows: List[np.ndarray] = []
    rhs: List[float] = []
    for value, count in _distinct_targets(targets):
        z = _resolvent(a, b, value)
        if z is None:
            if count > 1:
                raise np.linalg.LinAlgError(f"repeated target {value:.6g} sits on an open-loop eigenvalue")
            _, _, vh = scipy.linalg.svd(value * np.eye(n) - a)
            equations = [(vh[-1].conj(), 0.0)]
        else:
            scale = np.linalg.norm(z)
            equations = [(z / scale, 1.0 / scale)]
            for power in range(2, count + 1):
                dz = _resolvent(a, b, value, power)
                equations.append((dz / np.linalg.norm(dz), 0.0))

        for row, h in equations:
            if value.imag == 0:
                rows.append(np.real(row))
                rhs.append(h)
            else:
                rows.extend([np.real(row), np.imag(row)])
                rhs.extend([h, 0.0])

    v = np.array(rows)
    h = np.array(rhs)
    if basis is not None:
        if basis.shape[1] < m or numerical_rank(v @ basis) < m:
            raise np.linalg.LinAlgError(f"fewer than {m} independent equations; targets unreachable from this input")
        v = v @ basis @ basis.T
    elif numerical_rank(v) < m:
        raise np.linalg.LinAlgError(f"fewer than {m} independent equations; targets unreachable from this input")
    return v, h
