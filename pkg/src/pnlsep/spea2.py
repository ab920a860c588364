"""Strength-Pareto evolutionary optimizer with an external archive.

The population evolves slope genotypes only; each fitness evaluation runs
the full memetic pipeline (log-stage inversion + SOBI) behind the scenes.
Fitness combines dominance strength with a nearest-neighbor density term;
environmental selection keeps the archive at a fixed size via iterative
crowding-based truncation. All stochastic draws come from one sequential
seeded generator, so runs are reproducible bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DataError, EvaluationError, PnlsepError
from .objectives import (
    DEFAULT_MAX_LAG,
    DEFAULT_SLOPE_BOUNDS,
    DEFAULT_SOBI_LAGS,
    NERNSTIAN_SLOPE_MV,
    EvalConfig,
    EvaluatedCandidate,
    ObjectiveVector,
    evaluate_candidate,
)
from .signals import SignalMatrix

MONO_NERNST = "nernst"
MONO_SOBI = "sobi-criterion"


@dataclass(frozen=True)
class Spea2Config:
    """Run parameters; defaults follow the published setup (L=100, L~=50,
    alpha=50, G=30)."""

    seed: int = 0
    population_size: int = 100
    archive_size: int = 50
    crossover_share: float = 50.0
    generations: int = 30
    slope_bounds: tuple[float, float] = DEFAULT_SLOPE_BOUNDS
    mutation_sigma: float = 3.0
    reference_mv: float = NERNSTIAN_SLOPE_MV
    max_lag: int = DEFAULT_MAX_LAG
    sobi_lags: tuple[int, ...] = DEFAULT_SOBI_LAGS

    def __post_init__(self):
        if self.population_size < 1 or self.archive_size < 1:
            raise DataError("population and archive sizes must be at least 1")
        if self.generations < 0:
            raise DataError("generation count must be non-negative")
        if not 0 <= self.crossover_share <= 100:
            raise DataError("crossover share is a percentage in [0, 100]")
        lo, hi = self.slope_bounds
        if not (0 < lo < hi):
            raise DataError(f"slope bounds must satisfy 0 < lo < hi, got ({lo}, {hi})")
        if self.mutation_sigma <= 0:
            raise DataError("mutation deviation must be positive")

    def eval_config(self) -> EvalConfig:
        return EvalConfig(
            reference_mv=self.reference_mv,
            max_lag=self.max_lag,
            sobi_lags=self.sobi_lags,
            slope_bounds=self.slope_bounds,
        )

    def density_neighbor(self) -> int:
        return max(1, round(math.sqrt(self.population_size + self.archive_size)))


@dataclass(eq=False)
class Individual:
    """A candidate plus its dominance/density bookkeeping."""

    candidate: EvaluatedCandidate
    key: tuple[float, ...]
    strength: int = 0
    raw: float = 0.0
    density: float = 0.0
    fitness: float = math.inf


@dataclass(eq=False)
class Archive:
    """The external non-dominated set after one environmental selection."""

    members: list[Individual]
    capacity: int
    generation: int


def _key_of(value) -> tuple[float, ...]:
    if isinstance(value, ObjectiveVector):
        return value.as_tuple()
    return tuple(float(v) for v in value)


def dominates(p, q) -> bool:
    """Pareto dominance for minimization: p at least as good everywhere,
    strictly better somewhere."""
    kp, kq = _key_of(p), _key_of(q)
    if len(kp) != len(kq):
        raise DataError(f"objective dimensions differ: {len(kp)} vs {len(kq)}")
    return kp != kq and all(a <= b for a, b in zip(kp, kq))


def nondominated_filter(points: Sequence) -> list:
    """Points not dominated by any other point, in input order.

    Duplicates of a non-dominated point are all retained (equal vectors
    never dominate each other).
    """
    if len(points) == 0:
        raise DataError("need at least one point")
    arr = np.array([_key_of(p) for p in points], dtype=float)
    less_equal = (arr[:, None, :] <= arr[None, :, :]).all(axis=2)
    strictly_less = (arr[:, None, :] < arr[None, :, :]).any(axis=2)
    dominated = (less_equal & strictly_less).any(axis=0)
    return [p for p, d in zip(points, dominated) if not d]


def assign_fitness(union: Sequence[Individual], k: int) -> None:
    """SPEA2 fitness: raw dominance pressure plus a density term.

    strength(i) counts individuals i dominates; raw(i) sums the strengths of
    i's dominators; density is 1/(sigma_k + 2) with sigma_k the Euclidean
    distance to the k-th nearest neighbor in objective space. Non-dominated
    members are exactly those with fitness < 1.
    """
    n = len(union)
    if n == 0:
        raise DataError("cannot assign fitness to an empty union")
    arr = np.array([ind.key for ind in union], dtype=float)
    less_equal = (arr[:, None, :] <= arr[None, :, :]).all(axis=2)
    strictly_less = (arr[:, None, :] < arr[None, :, :]).any(axis=2)
    dom = less_equal & strictly_less  # dom[a, b]: a dominates b
    strengths = dom.sum(axis=1)
    raws = (dom * strengths[:, None]).sum(axis=0)

    k_eff = min(max(1, k), n - 1) if n > 1 else 0
    if n > 1:
        deltas = arr[:, None, :] - arr[None, :, :]
        distances = np.sqrt((deltas**2).sum(axis=2))
        np.fill_diagonal(distances, math.inf)
        distances.sort(axis=1)
        sigma = distances[:, k_eff - 1]
    else:
        sigma = np.zeros(1)

    for i, ind in enumerate(union):
        ind.strength = int(strengths[i])
        ind.raw = float(raws[i])
        ind.density = 1.0 / (float(sigma[i]) + 2.0)
        ind.fitness = ind.raw + ind.density


def _truncate(members: list[Individual], capacity: int) -> list[Individual]:
    kept = list(members)
    while len(kept) > capacity:
        arr = np.array([ind.key for ind in kept], dtype=float)
        deltas = arr[:, None, :] - arr[None, :, :]
        distances = np.sqrt((deltas**2).sum(axis=2))
        np.fill_diagonal(distances, math.inf)
        distances.sort(axis=1)
        # Most crowded first: lexicographic on sorted neighbor distances,
        # then lowest index for reproducibility.
        profiles = [tuple(distances[i, :-1]) for i in range(len(kept))]
        victim = min(range(len(kept)), key=lambda i: (profiles[i], i))
        kept.pop(victim)
    return kept


def environmental_selection(
    union: Sequence[Individual], capacity: int, generation: int = 0
) -> Archive:
    """Copy the non-dominated members, then fill or truncate to capacity."""
    if len(union) == 0:
        raise DataError("cannot select from an empty union")
    nondominated = [ind for ind in union if ind.fitness < 1.0]
    if len(nondominated) > capacity:
        members = _truncate(nondominated, capacity)
    else:
        members = list(nondominated)
        if len(members) < capacity:
            dominated = [ind for ind in union if ind.fitness >= 1.0]
            dominated.sort(key=lambda ind: ind.fitness)
            members.extend(dominated[: capacity - len(members)])
    return Archive(members=members, capacity=capacity, generation=generation)


def binary_tournament(archive: Archive, rng: np.random.Generator) -> Individual:
    """Draw two members with replacement; lower fitness wins, ties go to the
    first drawn."""
    n = len(archive.members)
    if n == 0:
        raise DataError("cannot run a tournament on an empty archive")
    first, second = rng.integers(0, n, size=2)
    a, b = archive.members[first], archive.members[second]
    return a if a.fitness <= b.fitness else b


def crossover(parent_a: np.ndarray, parent_b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Whole-arithmetic blend with a single uniform weight."""
    a = np.asarray(parent_a, dtype=float)
    b = np.asarray(parent_b, dtype=float)
    if a.shape != b.shape:
        raise DataError(f"parent shapes differ: {a.shape} vs {b.shape}")
    beta = rng.random()
    return beta * a + (1.0 - beta) * b


def mutate(
    parent: np.ndarray,
    sigma: float,
    bounds: tuple[float, float],
    rng: np.random.Generator,
) -> np.ndarray:
    """Add per-coordinate Gaussian noise, then clamp into the bounds."""
    p = np.asarray(parent, dtype=float)
    lo, hi = bounds
    return np.clip(p + rng.normal(0.0, sigma, size=p.shape), lo, hi)


ObjectiveProjection = Callable[[EvaluatedCandidate], tuple[float, ...]]


def _project_both(candidate: EvaluatedCandidate) -> tuple[float, ...]:
    return candidate.objectives.as_tuple()


def _project_offdiag(candidate: EvaluatedCandidate) -> tuple[float, ...]:
    return (candidate.objectives.off_diagonality,)


def _evolve(
    mixtures: SignalMatrix,
    config: Spea2Config,
    project: ObjectiveProjection,
) -> Archive:
    rng = np.random.default_rng(config.seed)
    eval_config = config.eval_config()
    lo, hi = config.slope_bounds
    n = mixtures.n_channels
    k = config.density_neighbor()

    def evaluate(genotype: np.ndarray, generation: int) -> Individual:
        try:
            candidate = evaluate_candidate(genotype, mixtures, eval_config)
        except PnlsepError as exc:
            raise EvaluationError(
                f"evaluation failed at generation {generation} "
                f"for genotype {np.asarray(genotype)}: {exc}",
                generation=generation,
                genotype=np.asarray(genotype, dtype=float),
            ) from exc
        return Individual(candidate=candidate, key=project(candidate))

    genotypes = rng.uniform(lo, hi, size=(config.population_size, n))
    population = [evaluate(g, 0) for g in genotypes]
    archive_members: list[Individual] = []

    archive = Archive(members=[], capacity=config.archive_size, generation=0)
    for generation in range(config.generations + 1):
        union = population + archive_members
        assign_fitness(union, k)
        archive = environmental_selection(union, config.archive_size, generation)
        archive_members = archive.members
        if generation == config.generations:
            break
        n_crossover = int(round(config.crossover_share / 100.0 * config.population_size))
        offspring: list[np.ndarray] = []
        for _ in range(n_crossover):
            parent_a = binary_tournament(archive, rng).candidate.genotype
            parent_b = binary_tournament(archive, rng).candidate.genotype
            offspring.append(crossover(parent_a, parent_b, rng))
        for _ in range(config.population_size - n_crossover):
            parent = binary_tournament(archive, rng).candidate.genotype
            offspring.append(mutate(parent, config.mutation_sigma, config.slope_bounds, rng))
        population = [evaluate(g, generation + 1) for g in offspring]
    return archive


def run_spea2(mixtures: SignalMatrix, config: Spea2Config) -> Archive:
    """Full two-objective run; returns the final external archive."""
    return _evolve(mixtures, config, _project_both)


def run_mono(mixtures: SignalMatrix, which: str, config: Spea2Config) -> EvaluatedCandidate:
    """Single-objective baselines.

    ``nernst`` has a closed-form minimizer (every slope at the reference),
    evaluated once. ``sobi-criterion`` reruns the evolutionary machinery with
    dominance collapsed to the off-diagonality scalar and returns the
    archive's minimizer.
    """
    if which == MONO_NERNST:
        genotype = np.full(mixtures.n_channels, config.reference_mv)
        return evaluate_candidate(genotype, mixtures, config.eval_config())
    if which == MONO_SOBI:
        archive = _evolve(mixtures, config, _project_offdiag)
        best = min(
            range(len(archive.members)),
            key=lambda i: (archive.members[i].candidate.objectives.off_diagonality, i),
        )
        return archive.members[best].candidate
    raise DataError(f"unknown baseline {which!r}; expected {MONO_NERNST!r} or {MONO_SOBI!r}")
