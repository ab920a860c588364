"""Second-order blind identification.

Whitening makes the zero-lag covariance the identity; a Jacobi-like scheme
of successive Givens rotations then drives a whole set of symmetrized lagged
covariances toward simultaneous diagonality. The product of the accumulated
rotation (transposed) with the whitening matrix is the separating matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, DegenerateDataError
from .signals import SignalMatrix, _frozen_array, lagged_covariance, symmetrize

DEFAULT_TOL = 1e-8
DEFAULT_MAX_SWEEPS = 100

# Relative eigenvalue floor for the rank test, independent of signal units.
RANK_EPS_RELATIVE = 1e-12


@dataclass(frozen=True, eq=False)
class WhiteningResult:
    """Whitened signals plus the matrix B that produced them."""

    whitened: SignalMatrix
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen_array(self.matrix))


@dataclass(frozen=True, eq=False)
class JointDiagResult:
    """Orthogonal joint diagonalizer with convergence bookkeeping.

    ``off_history[k]`` is the summed squared off-diagonal mass after sweep k
    (index 0 holds the pre-rotation value).
    """

    rotation: np.ndarray
    off_diagonality: float
    sweeps: int
    off_history: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "rotation", _frozen_array(self.rotation))


def whiten(x: SignalMatrix) -> WhiteningResult:
    """Center and decorrelate channels to unit zero-lag covariance.

    Channels are standardized to unit variance before the eigendecomposition,
    so the rank test runs on the correlation matrix and stays meaningful even
    when channel variances differ by many orders of magnitude (routine here:
    candidate slopes near the lower bound inflate one channel enormously).
    Collinear or constant channels still fail the relative eigenvalue floor.
    """
    c0 = symmetrize(lagged_covariance(x, 0)).matrix
    variances = np.diag(c0)
    if np.any(variances <= 0):
        channel = int(np.argwhere(variances <= 0)[0])
        raise DegenerateDataError(f"channel {channel} has zero variance")
    scale = 1.0 / np.sqrt(variances)
    correlation = c0 * scale[:, None] * scale[None, :]
    eigenvalues, eigenvectors = np.linalg.eigh(correlation)
    floor = RANK_EPS_RELATIVE * eigenvalues[-1]
    if eigenvalues[0] <= floor:
        raise DegenerateDataError(
            f"rank-deficient covariance: correlation eigenvalue "
            f"{eigenvalues[0]:.3e} at or below floor {floor:.3e}"
        )
    b = (eigenvectors / np.sqrt(eigenvalues)).T * scale[None, :]
    centered = x.data - x.data.mean(axis=1, keepdims=True)
    return WhiteningResult(whitened=SignalMatrix(b @ centered), matrix=b)


def _off_diagonality(stack: np.ndarray) -> float:
    n = stack.shape[1]
    mask = ~np.eye(n, dtype=bool)
    return float(np.sum(stack[:, mask] ** 2))


def givens_joint_diag(
    matrices: Iterable[np.ndarray],
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> JointDiagResult:
    """Jointly diagonalize symmetric matrices by successive Givens rotations.

    Sweeps all index pairs (i < j); for each pair the closed-form optimal
    angle comes from the principal direction of the 2x2 scatter of the
    vectors [m_ii - m_jj, 2 m_ij] collected across matrices. Stops when the
    largest rotation sine in a full sweep drops below ``tol``.
    """
    stack = np.array([np.asarray(m, dtype=float) for m in matrices])
    if stack.ndim != 3 or stack.shape[0] == 0:
        raise DataError("need at least one square matrix")
    n = stack.shape[1]
    if stack.shape[2] != n:
        raise DataError(f"matrices must be square, got shape {stack.shape[1:]}")
    scale = max(1.0, float(np.max(np.abs(stack))))
    for index, m in enumerate(stack):
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-10 * scale):
            raise DataError(f"matrix {index} is not symmetric")
    if tol <= 0:
        raise DataError("tolerance must be positive")
    stack = (stack + stack.transpose(0, 2, 1)) / 2.0

    u = np.eye(n)
    history = [_off_diagonality(stack)]
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        largest_sine = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                diag_gap = stack[:, i, i] - stack[:, j, j]
                twice_cross = stack[:, i, j] + stack[:, j, i]
                ton = float(diag_gap @ diag_gap - twice_cross @ twice_cross)
                toff = 2.0 * float(diag_gap @ twice_cross)
                theta = 0.5 * math.atan2(toff, ton + math.hypot(ton, toff))
                c, s = math.cos(theta), math.sin(theta)
                largest_sine = max(largest_sine, abs(s))
                if abs(s) <= tol:
                    continue
                # stack <- R^T stack R on the (i, j) plane; u <- u R.
                rows_i = c * stack[:, i, :] + s * stack[:, j, :]
                rows_j = -s * stack[:, i, :] + c * stack[:, j, :]
                stack[:, i, :], stack[:, j, :] = rows_i, rows_j
                cols_i = c * stack[:, :, i] + s * stack[:, :, j]
                cols_j = -s * stack[:, :, i] + c * stack[:, :, j]
                stack[:, :, i], stack[:, :, j] = cols_i, cols_j
                u_i = c * u[:, i] + s * u[:, j]
                u_j = -s * u[:, i] + c * u[:, j]
                u[:, i], u[:, j] = u_i, u_j
        history.append(_off_diagonality(stack))
        if largest_sine < tol:
            break
    return JointDiagResult(
        rotation=u,
        off_diagonality=history[-1],
        sweeps=sweeps,
        off_history=tuple(history),
    )


def sobi(
    x: SignalMatrix,
    lags: Sequence[int] = (1, 2, 3),
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> np.ndarray:
    """Estimate a separating matrix from lagged second-order statistics.

    W = U^T B where B whitens the input and U jointly diagonalizes the
    symmetrized lagged covariances of the whitened signals. Rows of
    W (x - mean) come out with unit variance.
    """
    lag_list = [int(r) for r in lags]
    if not lag_list:
        raise DataError("need at least one lag")
    if any(r < 1 for r in lag_list):
        raise DataError(f"lags must be positive, got {lag_list}")
    if any(r > x.n_samples - 2 for r in lag_list):
        raise DataError(f"lags {lag_list} exceed the valid maximum {x.n_samples - 2}")
    whitening = whiten(x)
    covariances = [
        symmetrize(lagged_covariance(whitening.whitened, r)).matrix for r in lag_list
    ]
    joint = givens_joint_diag(covariances, tol=tol, max_sweeps=max_sweeps)
    return joint.rotation.T @ whitening.matrix
