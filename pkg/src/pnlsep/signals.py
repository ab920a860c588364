"""Signal containers, lagged second-order statistics, and SIR scoring.

Rows are channels and columns are time samples throughout. Containers copy
their arrays on construction and mark them read-only, so every operation in
this module is a pure function of immutable values.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateChannelError

# Exhaustive permutation matching is exact but factorial; cap it.
MAX_MATCH_CHANNELS = 6


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SignalMatrix:
    """An N x T real matrix holding N channels of T samples each."""

    data: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        arr = np.array(self.data, dtype=float, copy=True)
        if arr.ndim != 2:
            raise DataError(f"signal matrix must be 2-D, got shape {arr.shape}")
        n, t = arr.shape
        if n < 1:
            raise DataError("signal matrix needs at least one channel")
        if t < 2:
            raise DataError(f"signal matrix needs at least two samples, got T={t}")
        if not np.all(np.isfinite(arr)):
            i, j = np.argwhere(~np.isfinite(arr))[0]
            raise DataError(f"non-finite sample at channel {i}, t={j}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != n:
                raise DataError(f"got {len(labels)} labels for {n} channels")
            object.__setattr__(self, "labels", labels)

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    def channel(self, i: int) -> np.ndarray:
        return self.data[i]


@dataclass(frozen=True, eq=False)
class LaggedCovariance:
    """A square covariance estimate taken at a fixed non-negative lag."""

    matrix: np.ndarray
    lag: int

    def __post_init__(self):
        arr = _frozen_array(self.matrix)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DataError(f"covariance must be square, got shape {arr.shape}")
        if self.lag < 0:
            raise DataError(f"lag must be non-negative, got {self.lag}")
        object.__setattr__(self, "matrix", arr)
        object.__setattr__(self, "lag", int(self.lag))


@dataclass(frozen=True, eq=False)
class SirReport:
    """Per-source SIR after permutation matching and gain correction.

    ``permutation[i]`` is the (0-based) estimate row matched to reference
    row ``i``; ``gains[i]`` is the least-squares gain applied to it.
    """

    per_source_db: tuple[float, ...]
    permutation: tuple[int, ...]
    gains: tuple[float, ...]
    average_db: float

    def __post_init__(self):
        n = len(self.per_source_db)
        if sorted(self.permutation) != list(range(n)):
            raise DataError(f"permutation {self.permutation} is not a bijection on 0..{n - 1}")
        if len(self.gains) != n:
            raise DataError("gains and per-source values must align")


def lagged_covariance(x: SignalMatrix, lag: int) -> LaggedCovariance:
    """Sample covariance between channels at the given delay.

    Entry (i, j) estimates the covariance of channel i at time t with
    channel j at time t - lag, averaging the T - lag available products
    after removing each channel's full-length sample mean.
    """
    t = x.n_samples
    if not 0 <= lag <= t - 2:
        raise DataError(f"lag {lag} outside valid range [0, {t - 2}]")
    centered = x.data - x.data.mean(axis=1, keepdims=True)
    leading = centered[:, lag:]
    trailing = centered[:, : t - lag]
    matrix = leading @ trailing.T / (t - lag)
    return LaggedCovariance(matrix=matrix, lag=lag)


def symmetrize(cov: LaggedCovariance) -> LaggedCovariance:
    """Average a covariance with its transpose; exact fixed point when symmetric."""
    return LaggedCovariance(matrix=(cov.matrix + cov.matrix.T) / 2.0, lag=cov.lag)


def least_squares_gain(estimate: np.ndarray, reference: np.ndarray) -> float:
    """Gain a minimizing ||reference - a * estimate||; may be negative."""
    y = np.asarray(estimate, dtype=float)
    s = np.asarray(reference, dtype=float)
    if y.shape != s.shape or y.ndim != 1:
        raise DataError(f"channel shapes differ: {y.shape} vs {s.shape}")
    power = float(y @ y)
    if power == 0.0:
        raise DegenerateChannelError("cannot scale-correct an identically zero channel")
    return float(s @ y) / power


def scale_correct(estimate: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Rescale an estimated channel onto a reference by least squares."""
    return least_squares_gain(estimate, reference) * np.asarray(estimate, dtype=float)


def sir(reference: np.ndarray, estimate: np.ndarray) -> float:
    """Signal-to-interference ratio in dB between a source and its estimate.

    Returns +inf for an exact match (zero error power).
    """
    s = np.asarray(reference, dtype=float)
    y = np.asarray(estimate, dtype=float)
    if s.shape != y.shape or s.ndim != 1:
        raise DataError(f"channel shapes differ: {s.shape} vs {y.shape}")
    signal_power = float(np.mean(s * s))
    if signal_power == 0.0:
        raise DegenerateChannelError("reference signal has zero power")
    error_power = float(np.mean((s - y) ** 2))
    if error_power == 0.0:
        return math.inf
    return 10.0 * math.log10(signal_power / error_power)


def match_and_score(estimates: SignalMatrix, references: SignalMatrix) -> SirReport:
    """Resolve the permutation ambiguity and score every source.

    Tries every assignment of estimate rows to reference rows (factorial in
    the channel count, hence the cap), scale-corrects each matched pair, and
    keeps the assignment with the highest average SIR.
    """
    if estimates.data.shape != references.data.shape:
        raise DataError(
            f"estimate shape {estimates.data.shape} != reference shape {references.data.shape}"
        )
    n = references.n_channels
    if n > MAX_MATCH_CHANNELS:
        raise DataError(f"exhaustive matching supports at most {MAX_MATCH_CHANNELS} channels")

    best: SirReport | None = None
    for perm in itertools.permutations(range(n)):
        scores = []
        gains = []
        for i, j in enumerate(perm):
            gain = least_squares_gain(estimates.data[j], references.data[i])
            scores.append(sir(references.data[i], gain * estimates.data[j]))
            gains.append(gain)
        average = sum(scores) / n
        if best is None or average > best.average_db:
            best = SirReport(
                per_source_db=tuple(scores),
                permutation=tuple(perm),
                gains=tuple(gains),
                average_db=average,
            )
    assert best is not None
    return best
