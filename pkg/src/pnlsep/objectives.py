"""The two separation criteria and the memetic candidate evaluation.

A candidate is a vector of slope guesses. Evaluating it first inverts the
log stage with those slopes, then lets SOBI pick the linear unmixing matrix,
and finally scores (a) how far the slopes sit from the theoretical reference
and (b) how much off-diagonal mass remains in the lagged covariances of the
retrieved signals.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .mixing import separate
from .signals import SignalMatrix, _frozen_array, lagged_covariance
from .sobi import DEFAULT_MAX_SWEEPS, DEFAULT_TOL, sobi

NERNSTIAN_SLOPE_MV = 59.0
DEFAULT_MAX_LAG = 3
DEFAULT_SOBI_LAGS = (1, 2, 3)
DEFAULT_SLOPE_BOUNDS = (10.0, 120.0)


@dataclass(frozen=True)
class ObjectiveVector:
    """Pair of minimization objectives (slope similarity, off-diagonality)."""

    slope_similarity: float
    off_diagonality: float

    def __post_init__(self):
        for name, value in (
            ("slope_similarity", self.slope_similarity),
            ("off_diagonality", self.off_diagonality),
        ):
            if not np.isfinite(value) or value < 0:
                raise DataError(f"{name} must be finite and non-negative, got {value}")

    def as_tuple(self) -> tuple[float, float]:
        return (self.slope_similarity, self.off_diagonality)


@dataclass(frozen=True)
class EvalConfig:
    """Knobs shared by every candidate evaluation in a run."""

    reference_mv: float = NERNSTIAN_SLOPE_MV
    max_lag: int = DEFAULT_MAX_LAG
    sobi_lags: tuple[int, ...] = DEFAULT_SOBI_LAGS
    slope_bounds: tuple[float, float] = DEFAULT_SLOPE_BOUNDS
    tol: float = DEFAULT_TOL
    max_sweeps: int = DEFAULT_MAX_SWEEPS

    def __post_init__(self):
        lo, hi = self.slope_bounds
        if not (0 < lo < hi):
            raise DataError(f"slope bounds must satisfy 0 < lo < hi, got ({lo}, {hi})")
        if self.max_lag < 0:
            raise DataError("max lag must be non-negative")


@dataclass(frozen=True, eq=False)
class EvaluatedCandidate:
    """A slope genotype with its objectives, unmixing matrix, and signals."""

    genotype: np.ndarray
    objectives: ObjectiveVector
    unmixing: np.ndarray
    retrieved: SignalMatrix

    def __post_init__(self):
        object.__setattr__(self, "genotype", _frozen_array(self.genotype))
        object.__setattr__(self, "unmixing", _frozen_array(self.unmixing))


def nernst_criterion(slopes: np.ndarray, reference_mv: float = NERNSTIAN_SLOPE_MV) -> float:
    """Squared distance of the slope vector from the theoretical reference."""
    d = np.asarray(slopes, dtype=float)
    if d.size == 0:
        raise DataError("slope vector must be non-empty")
    return float(np.sum((d - reference_mv) ** 2))


def offdiag_criterion(signals: SignalMatrix, max_lag: int = DEFAULT_MAX_LAG) -> float:
    """Summed squared off-diagonal covariance over lags 0..max_lag."""
    if signals.n_channels < 2:
        raise DataError("off-diagonality needs at least two channels")
    if max_lag > signals.n_samples - 2:
        raise DataError(
            f"max lag {max_lag} exceeds the valid maximum {signals.n_samples - 2}"
        )
    mask = ~np.eye(signals.n_channels, dtype=bool)
    total = 0.0
    for lag in range(max_lag + 1):
        matrix = lagged_covariance(signals, lag).matrix
        total += float(np.sum(matrix[mask] ** 2))
    return total


def evaluate_candidate(
    slopes: np.ndarray, mixtures: SignalMatrix, config: EvalConfig = EvalConfig()
) -> EvaluatedCandidate:
    """Score one slope genotype against the mixtures.

    The nonlinear stage comes from the genotype, the linear stage from SOBI
    run on the partially inverted signals. Deterministic: identical inputs
    give bit-identical results.
    """
    d_star = np.asarray(slopes, dtype=float)
    lo, hi = config.slope_bounds
    if np.any(d_star < lo) or np.any(d_star > hi):
        raise DataError(f"slopes {d_star} outside bounds [{lo}, {hi}]")
    n = mixtures.n_channels
    partial = separate(mixtures, d_star, np.eye(n))
    unmixing = sobi(
        partial, lags=config.sobi_lags, tol=config.tol, max_sweeps=config.max_sweeps
    )
    retrieved = SignalMatrix(unmixing @ partial.data)
    objectives = ObjectiveVector(
        slope_similarity=nernst_criterion(d_star, config.reference_mv),
        off_diagonality=offdiag_criterion(retrieved, config.max_lag),
    )
    return EvaluatedCandidate(
        genotype=d_star,
        objectives=objectives,
        unmixing=unmixing,
        retrieved=retrieved,
    )
