"""
Spectral toolkit for 2x2 symmetric matrices

- Closed-form eigendecomposition (eigenvalues lambda >= mu, eigenvector angle phi)
- Closed-form log-exp-supremum (LES) and its dual infimum (LEI)
- Numeric log-sum-exp oracle used to validate the closed form

The batched kernels (`eigendecompose_array`, `les_arrays`) take a trailing
"window" axis plus a validity mask; the image engine feeds them one row band
at a time and the scalar functions below feed them a single window.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from src.colorspace import SymMatrix2
from src.error_recovery import DomainError, NumericError

logger = logging.getLogger(__name__)

# Absolute tolerance for "lambda_1 is not unique" and scalar-matrix detection
EPS_EIG = 1e-9
# Eigenvectors count as collinear iff |sin(angle difference)| <= EPS_ANGLE
EPS_ANGLE = 1e-9

HALF_PI = 0.5 * np.pi


@dataclass(frozen=True)
class SpectralPair:
    """
    Spectral decomposition lambda*u u^T + mu*v v^T with
    u = (cos phi, sin phi), v = (-sin phi, cos phi).
    """
    lam: float
    mu: float
    phi: float

    def reconstruct(self) -> SymMatrix2:
        a, b, c = compose_array(
            np.float64(self.lam), np.float64(self.mu), np.float64(self.phi)
        )
        return SymMatrix2(float(a), float(b), float(c))


@dataclass
class EigenPool:
    """All 2n (eigenvalue, eigenvector angle, source index) entries of n matrices."""
    entries: List[Tuple[float, float, int]] = field(default_factory=list)

    @classmethod
    def from_matrices(cls, matrices: Sequence[SymMatrix2]) -> "EigenPool":
        entries = []
        for idx, matrix in enumerate(matrices):
            pair = eigendecompose(matrix)
            entries.append((pair.lam, pair.phi, idx))
            entries.append((pair.mu, _normalise_angle(pair.phi + HALF_PI), idx))
        return cls(entries=entries)

    def sorted_desc(self) -> List[Tuple[float, float, int]]:
        """Entries by descending eigenvalue; ties keep insertion order."""
        return sorted(self.entries, key=lambda entry: -entry[0])

    def __len__(self) -> int:
        return len(self.entries)


def _normalise_angle(phi: float) -> float:
    """Fold an eigenvector angle into [-pi/2, pi/2] (u and -u are the same axis)."""
    while phi > HALF_PI:
        phi -= np.pi
    while phi < -HALF_PI:
        phi += np.pi
    return phi


# ============================================================================
# Batched kernels
# ============================================================================

def eigendecompose_array(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Closed-form eigendecomposition of [[a, b], [b, c]] element-wise.

    Returns:
        (lam, mu, phi) with lam >= mu and phi in [-pi/2, pi/2];
        phi = 0 wherever lam and mu coincide within EPS_EIG
    """
    mean = 0.5 * (a + c)
    half_diff = 0.5 * (a - c)
    radius = np.hypot(half_diff, b)
    lam = mean + radius
    mu = mean - radius
    phi = 0.5 * np.arctan2(b, half_diff)
    phi = np.where(lam - mu <= EPS_EIG, 0.0, phi)
    return lam, mu, phi


def compose_array(lam: np.ndarray, mu: np.ndarray, phi: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """lam*u u^T + mu*v v^T as packed (a, b, c)."""
    cs = np.cos(phi)
    sn = np.sin(phi)
    a = lam * cs * cs + mu * sn * sn
    b = (lam - mu) * cs * sn
    c = lam * sn * sn + mu * cs * cs
    return a, b, c


def les_arrays(
    lam: np.ndarray,
    mu: np.ndarray,
    phi: np.ndarray,
    valid: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Closed-form LES over the last axis of spectral arrays.

    Args:
        lam, mu, phi: Spectral data, shape (..., n)
        valid: Boolean mask, shape (..., n); at least one True per window

    Returns:
        Packed (a, b, c) of the supremum, shape (...)
    """
    neg_inf = -np.inf
    lam_valid = np.where(valid, lam, neg_inf)
    k1 = np.argmax(lam_valid, axis=-1)[..., None]
    lam1 = np.take_along_axis(lam_valid, k1, axis=-1)
    phi1 = np.take_along_axis(phi, k1, axis=-1)

    # Eigen pool: u-entries then v-entries
    pool_val = np.concatenate((lam, mu), axis=-1)
    pool_ang = np.concatenate((phi, phi + HALF_PI), axis=-1)
    pool_ok = np.concatenate((valid, valid), axis=-1)
    collinear = np.abs(np.sin(pool_ang - phi1)) <= EPS_ANGLE
    candidate = pool_ok & ~collinear

    # lambda_1 attained by an eigenvector off the u_1 axis -> lambda_1 * I
    scalar_case = np.any(candidate & (pool_val >= lam1 - EPS_EIG), axis=-1)

    mu_star = np.max(np.where(candidate, pool_val, neg_inf), axis=-1)
    if not np.all(np.isfinite(mu_star)):
        # Every pool entry lies on u_1: complete with the largest remaining eigenvalue
        remaining = pool_ok.copy()
        np.put_along_axis(remaining, k1, False, axis=-1)
        mu_rest = np.max(np.where(remaining, pool_val, neg_inf), axis=-1)
        mu_star = np.where(np.isfinite(mu_star), mu_star, mu_rest)

    lam1 = lam1[..., 0]
    phi1 = phi1[..., 0]
    a, b, c = compose_array(lam1, mu_star, phi1)
    a = np.where(scalar_case, lam1, a)
    b = np.where(scalar_case, 0.0, b)
    c = np.where(scalar_case, lam1, c)
    return a, b, c


def lei_arrays(
    lam: np.ndarray,
    mu: np.ndarray,
    phi: np.ndarray,
    valid: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Closed-form LEI from the spectral data of X (not -X).

    -X has eigenvalues (-mu, -lam) with the larger one on v = phi + pi/2.
    """
    a, b, c = les_arrays(-mu, -lam, phi + HALF_PI, valid)
    return -a, -b, -c


def les_packed(matrices: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """LES of packed (..., n, 3) matrices over axis -2; returns (..., 3)."""
    lam, mu, phi = eigendecompose_array(matrices[..., 0], matrices[..., 1], matrices[..., 2])
    return np.stack(les_arrays(lam, mu, phi, valid), axis=-1)


def lei_packed(matrices: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """LEI = -LES(-X) on packed matrices."""
    return -les_packed(-matrices, valid)


# ============================================================================
# Scalar API
# ============================================================================

def eigendecompose(m: SymMatrix2) -> SpectralPair:
    lam, mu, phi = eigendecompose_array(np.float64(m.a), np.float64(m.b), np.float64(m.c))
    return SpectralPair(float(lam), float(mu), float(phi))


def _pack(matrices: Iterable[SymMatrix2]) -> np.ndarray:
    packed = np.array([m.as_array() for m in matrices], dtype=np.float64)
    if packed.size == 0:
        raise DomainError("LES/LEI need at least one matrix")
    return packed


def les(matrices: Iterable[SymMatrix2]) -> SymMatrix2:
    """
    Log-exp-supremum of a non-empty multiset of symmetric 2x2 matrices.

    Raises:
        DomainError: If the multiset is empty
    """
    packed = _pack(matrices)
    valid = np.ones(packed.shape[0], dtype=bool)
    return SymMatrix2.from_array(les_packed(packed, valid))


def lei(matrices: Iterable[SymMatrix2]) -> SymMatrix2:
    """
    Dual log-exp-infimum, -les({-X_i}).

    Raises:
        DomainError: If the multiset is empty
    """
    packed = _pack(matrices)
    valid = np.ones(packed.shape[0], dtype=bool)
    return SymMatrix2.from_array(lei_packed(packed, valid))


def loewner_leq(lower: SymMatrix2, upper: SymMatrix2, tol: float = 1e-9) -> bool:
    """lower <=_L upper, i.e. upper - lower is positive semidefinite up to tol."""
    return min_eigenvalue(upper - lower) >= -tol


def min_eigenvalue(m: SymMatrix2) -> float:
    return eigendecompose(m).mu


def les_numeric_oracle(matrices: Iterable[SymMatrix2], m: float) -> SymMatrix2:
    """
    (1/m) log(sum_i exp(m X_i)) evaluated without forming the exponentials.

    Each exp(m X_i) is a weighted sum of two rank-one projectors. After
    shifting every exponent by the largest one the weights lie in (0, 1], so
    the large eigenvalue of the sum follows from its trace and eigen-gap
    directly. The determinant is sum_{k<l} w_k w_l sin^2(theta_k - theta_l), a
    sum of non-negative terms accumulated in the log domain; the small
    eigenvalue is det / large and keeps full relative precision even when it
    sits hundreds of orders of magnitude below the large one.

    Raises:
        DomainError: If the multiset is empty or m <= 0
        NumericError: If the result is not finite
    """
    if not m > 0:
        raise DomainError(f"Oracle sharpness m must be positive, got {m}")
    packed = _pack(matrices)
    lam, mu, phi = eigendecompose_array(packed[:, 0], packed[:, 1], packed[:, 2])

    values = np.concatenate((lam, mu))
    angles = np.concatenate((phi, phi + HALF_PI))
    shift = float(np.max(values))
    log_w = m * (values - shift)

    # Trace, gap and principal axis of the (shifted) sum
    weights = np.exp(log_w)
    trace = np.sum(weights)
    cs, sn = np.cos(angles), np.sin(angles)
    sum_a = np.sum(weights * cs * cs)
    sum_b = np.sum(weights * cs * sn)
    sum_c = np.sum(weights * sn * sn)
    axis_angle = 0.5 * np.arctan2(2.0 * sum_b, sum_a - sum_c)
    gap = np.hypot(sum_a - sum_c, 2.0 * sum_b)

    # log det via pairwise cross products
    i, j = np.triu_indices(values.size, k=1)
    sin_sq = np.sin(angles[i] - angles[j]) ** 2
    with np.errstate(divide="ignore"):
        pair_terms = log_w[i] + log_w[j] + np.log(sin_sq)
    log_det = np.logaddexp.reduce(pair_terms)

    # trace >= 1 since the largest weight is exp(0)
    log_big = np.log(0.5 * (trace + gap))
    log_small = log_det - log_big

    if not (np.isfinite(log_big) and np.isfinite(log_small)):
        raise NumericError(f"Log-sum-exp oracle overflowed at m={m}")

    a, b, c = compose_array(
        np.float64(shift + log_big / m),
        np.float64(shift + log_small / m),
        np.float64(axis_angle),
    )
    logger.debug(f"Oracle at m={m}: n={packed.shape[0]}, shift={shift:.6f}")
    return SymMatrix2(float(a), float(b), float(c))
