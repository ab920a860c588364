"""Forward electrode mixing, its inverse transform, and a synthetic generator.

The forward model is the classic log-domain electrode response: each channel
reports an offset plus a slope (mV per decade) times the decadic log of a
selectivity-weighted sum of ionic activities. The separating transform undoes
the log stage with candidate slopes and applies a linear unmixing matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError, ExponentOverflowError
from .signals import SignalMatrix, _frozen_array

# Decadic exponents beyond this produce absurd magnitudes; fail loudly
# instead of propagating near-Inf values into covariance estimates.
MAX_DECADIC_EXPONENT = 300.0


@dataclass(frozen=True, eq=False)
class MixingModel:
    """Electrode array parameters: offsets e, slopes d, selectivity matrix A."""

    offsets: np.ndarray
    slopes: np.ndarray
    selectivity: np.ndarray

    def __post_init__(self):
        e = _frozen_array(self.offsets)
        d = _frozen_array(self.slopes)
        a = _frozen_array(self.selectivity)
        if e.ndim != 1 or d.ndim != 1 or a.ndim != 2:
            raise DataError("offsets/slopes must be vectors and selectivity a matrix")
        n = d.shape[0]
        if e.shape != (n,) or a.shape != (n, n):
            raise DataError(
                f"inconsistent model dimensions: e{e.shape}, d{d.shape}, A{a.shape}"
            )
        if np.any(d <= 0):
            raise DataError("slopes must be strictly positive")
        if np.any(np.diag(a) != 1.0):
            raise DataError("selectivity diagonal must be all ones")
        off_diag = a[~np.eye(n, dtype=bool)]
        if np.any(off_diag < 0):
            raise DataError("selectivity coefficients must be non-negative")
        object.__setattr__(self, "offsets", e)
        object.__setattr__(self, "slopes", d)
        object.__setattr__(self, "selectivity", a)

    @property
    def n_channels(self) -> int:
        return self.slopes.shape[0]


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the synthetic dataset generator.

    Sources are moving-average-smoothed positive random walks clipped to the
    activity range; mixtures get the forward model plus optional Gaussian
    measurement noise (in mV, i.e. after the log stage).
    """

    seed: int
    n_sources: int = 2
    n_samples: int = 41
    slopes: tuple[float, ...] = (55.0, 62.0)
    selectivity: tuple[tuple[float, ...], ...] = ((1.0, 0.3), (0.4, 1.0))
    offsets: tuple[float, ...] = (0.0, 0.0)
    smoothing_window: int = 5
    activity_range: tuple[float, float] = (1.0, 10.0)
    noise_std_mv: float = 0.0

    def __post_init__(self):
        if self.n_sources < 2:
            raise DataError("synthetic generator needs at least two sources")
        if self.n_samples < 2:
            raise DataError("synthetic generator needs at least two samples")
        lo, hi = self.activity_range
        if not (0 < lo < hi):
            raise DataError(f"activity range must satisfy 0 < lo < hi, got ({lo}, {hi})")
        if self.smoothing_window < 1:
            raise DataError("smoothing window must be at least 1")
        if self.noise_std_mv < 0:
            raise DataError("noise deviation must be non-negative")
        if len(self.slopes) != self.n_sources or len(self.offsets) != self.n_sources:
            raise DataError("slopes/offsets length must match the source count")
        if len(self.selectivity) != self.n_sources or any(
            len(row) != self.n_sources for row in self.selectivity
        ):
            raise DataError("selectivity must be a square matrix of the source count")

    def model(self) -> MixingModel:
        return MixingModel(
            offsets=np.array(self.offsets),
            slopes=np.array(self.slopes),
            selectivity=np.array(self.selectivity),
        )


def ne_mix(sources: SignalMatrix, model: MixingModel) -> SignalMatrix:
    """Forward mixing: x_i(t) = e_i + d_i * log10((A s(t))_i)."""
    if model.n_channels != sources.n_channels:
        raise DataError(
            f"model has {model.n_channels} channels, sources have {sources.n_channels}"
        )
    if np.any(sources.data <= 0):
        i, t = np.argwhere(sources.data <= 0)[0]
        raise DomainError(f"non-positive source activity at channel {i}, t={t}")
    combined = model.selectivity @ sources.data
    if np.any(combined <= 0):
        i, t = np.argwhere(combined <= 0)[0]
        raise DomainError(f"non-positive log argument at channel {i}, t={t}")
    mixed = model.offsets[:, None] + model.slopes[:, None] * np.log10(combined)
    return SignalMatrix(mixed)


def separate(mixtures: SignalMatrix, slopes: np.ndarray, unmixing: np.ndarray) -> SignalMatrix:
    """Inverse transform: y(t) = W 10^(x(t) / d*), applied columnwise."""
    d_star = np.asarray(slopes, dtype=float)
    w = np.asarray(unmixing, dtype=float)
    m = mixtures.n_channels
    if d_star.shape != (m,):
        raise DataError(f"slope vector shape {d_star.shape} does not match {m} channels")
    if np.any(d_star <= 0):
        raise DataError("candidate slopes must be strictly positive")
    if w.shape != (m, m):
        raise DataError(f"unmixing matrix shape {w.shape} must be ({m}, {m})")
    exponents = mixtures.data / d_star[:, None]
    if np.any(exponents > MAX_DECADIC_EXPONENT):
        i, t = np.argwhere(exponents > MAX_DECADIC_EXPONENT)[0]
        raise ExponentOverflowError(
            f"exponent {exponents[i, t]:.3g} at channel {i}, t={t} exceeds the guard"
        )
    return SignalMatrix(w @ np.power(10.0, exponents))


def _smoothed_clipped_walk(rng: np.random.Generator, config: SynthConfig) -> np.ndarray:
    lo, hi = config.activity_range
    span = hi - lo
    steps = rng.normal(0.0, 0.45 * span, size=config.n_samples - 1)
    walk = np.empty(config.n_samples)
    walk[0] = rng.uniform(lo, hi)
    for t in range(1, config.n_samples):
        walk[t] = min(max(walk[t - 1] + steps[t - 1], lo), hi)
    window = min(config.smoothing_window, config.n_samples)
    if window == 1:
        return walk
    # Pad with edge values so the box filter averages in-range samples only.
    left = window // 2
    padded = np.pad(walk, (left, window - 1 - left), mode="edge")
    return np.convolve(padded, np.full(window, 1.0 / window), mode="valid")


def synth_generate(config: SynthConfig) -> tuple[SignalMatrix, SignalMatrix, MixingModel]:
    """Generate (sources, mixtures, model) deterministically from the seed.

    Each source uses its own child RNG stream, so rows are mutually
    uncorrelated by construction; the noise stream is separate again.
    """
    streams = np.random.SeedSequence(config.seed).spawn(config.n_sources + 1)
    sources = np.vstack(
        [
            _smoothed_clipped_walk(np.random.default_rng(streams[i]), config)
            for i in range(config.n_sources)
        ]
    )
    labels = tuple(f"s{i + 1}" for i in range(config.n_sources))
    s = SignalMatrix(sources, labels=labels)
    model = config.model()
    x = ne_mix(s, model)
    if config.noise_std_mv > 0:
        noise_rng = np.random.default_rng(streams[config.n_sources])
        noisy = x.data + noise_rng.normal(0.0, config.noise_std_mv, size=x.data.shape)
        x = SignalMatrix(noisy)
    x = SignalMatrix(x.data, labels=tuple(f"x{i + 1}" for i in range(config.n_sources)))
    return s, x, model
