"""Energy-driven planners for the layer-grouping strategies.

``plan_sequential_dp`` and ``exhaustive_vertical`` are exact; the genetic
planners are the scalable search and are checked against them.

The genetic search draws every random number from a stream keyed by
``(seed, generation, individual)``, so the result does not depend on how many
worker threads evaluate fitness.
"""

from __future__ import annotations

import itertools
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Hashable, Optional, Sequence

import numpy as np

from ..energy import LayerCosts, vertical_breakdowns
from ..errors import InfeasibleError, SearchSpaceError
from ..model import NetworkModel
from ..profiles import DeviceProfile
from .plans import SequentialPlan, VerticalPlan

log = logging.getLogger(__name__)

OBJECTIVES = ("max", "spread")
EXHAUSTIVE_LIMIT = 10**7


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 64
    generations: int = 200
    mutation_rate: float = 0.05
    tournament_size: int = 3
    seed: int = 0
    elitism: int = 1
    objective: str = "max"
    workers: int = 1

    def __post_init__(self):
        if self.population_size < 1 or self.generations < 1:
            raise ValueError("population_size and generations must be positive")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError(f"mutation_rate must lie in [0, 1], got {self.mutation_rate}")
        if self.tournament_size < 2 or self.population_size < self.tournament_size:
            raise ValueError("need 2 <= tournament_size <= population_size")
        if not 0 <= self.elitism < self.population_size:
            raise ValueError("elitism must be smaller than the population")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def _check_partitions(model: NetworkModel, partitions: int) -> None:
    if partitions < 1:
        raise InfeasibleError(f"need at least one partition, got {partitions}")
    if partitions > len(model):
        raise InfeasibleError(f"{partitions} partitions for {len(model)} layers: some partition would be empty")


def _score(totals: Sequence[float], objective: str) -> float:
    if objective == "spread":
        return max(totals) - min(totals)
    return max(totals)


def _costs(model: NetworkModel, profile) -> LayerCosts:
    return profile if isinstance(profile, LayerCosts) else LayerCosts(model, profile)


# ---------------------------------------------------------------------------
# genetic search


def _streams(seed: int, generation: int, count: int) -> list[random.Random]:
    """One independent stream per individual of a generation."""
    states = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, generation]).generate_state(count, dtype=np.uint64)
    return [random.Random(int(s)) for s in states]


@dataclass
class SearchResult:
    chromosome: tuple
    fitness: float
    evaluations: int


def _evolve(
    config: GAConfig,
    random_individual: Callable[[random.Random], tuple],
    crossover: Callable[[tuple, tuple, random.Random], tuple],
    mutate: Callable[[tuple, random.Random], tuple],
    fitness: Callable[[tuple], float],
    seeds: Sequence[tuple] = (),
) -> SearchResult:
    cache: dict[Hashable, float] = {}
    pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None

    def evaluate(population: list[tuple]) -> list[float]:
        fresh = sorted({c for c in population if c not in cache})
        results = pool.map(fitness, fresh) if pool else map(fitness, fresh)
        for chrom, value in zip(fresh, results):
            cache[chrom] = value
        return [cache[c] for c in population]

    def tournament(ranked: list[tuple[float, tuple]], rng: random.Random) -> tuple:
        picks = rng.sample(range(len(ranked)), config.tournament_size)
        return min(ranked[i] for i in picks)[1]

    try:
        population = [random_individual(rng) for rng in _streams(config.seed, 0, config.population_size)]
        population[: len(seeds)] = list(seeds)[: config.population_size]
        best: Optional[tuple[float, tuple]] = None
        for gen in range(config.generations):
            scores = evaluate(population)
            ranked = sorted(zip(scores, population))
            if best is None or ranked[0] < best:
                best = ranked[0]
            nxt = [chrom for _, chrom in ranked[: config.elitism]]
            streams = _streams(config.seed, gen + 1, config.population_size)
            for k in range(config.elitism, config.population_size):
                rng = streams[k]
                child = crossover(tournament(ranked, rng), tournament(ranked, rng), rng)
                nxt.append(mutate(child, rng))
            population = nxt
        scores = evaluate(population)
        final = min(zip(scores, population))
        if final < best:
            best = final
    finally:
        if pool:
            pool.shutdown()
    log.debug("GA finished: fitness %.6g after %d distinct evaluations", best[0], len(cache))
    return SearchResult(best[1], best[0], len(cache))


def _single_point(a: tuple, b: tuple, rng: random.Random) -> tuple:
    if len(a) < 2:
        return a if rng.random() < 0.5 else b
    point = rng.randrange(1, len(a))
    return a[:point] + b[point:]


def _repair_cuts(cuts: Sequence[int], needed: int, num_layers: int, rng: random.Random) -> tuple:
    chosen = sorted(set(cuts))
    while len(chosen) < needed:
        free = [c for c in range(1, num_layers) if c not in chosen]
        chosen.append(rng.choice(free))
        chosen.sort()
    return tuple(chosen)


def plan_sequential_ga(
    model: NetworkModel, profile: DeviceProfile, partitions: int, config: GAConfig = GAConfig()
) -> SequentialPlan:
    """Contiguous grouping found by a genetic search over cut positions.

    A chromosome is the sorted vector of the ``partitions - 1`` group ends.
    """
    _check_partitions(model, partitions)
    n = len(model)
    needed = partitions - 1
    if needed == 0 or needed == n - 1:
        return SequentialPlan.from_cuts(range(1, needed + 1), n)
    costs = _costs(model, profile)

    def random_individual(rng):
        return tuple(sorted(rng.sample(range(1, n), needed)))

    def crossover(a, b, rng):
        return _repair_cuts(_single_point(a, b, rng), needed, n, rng)

    def mutate(cuts, rng):
        genes = [rng.randrange(1, n) if rng.random() < config.mutation_rate else c for c in cuts]
        return _repair_cuts(genes, needed, n, rng)

    run_total: dict[tuple[int, int], float] = {}

    def fitness(cuts):
        totals = []
        for first, last in SequentialPlan.from_cuts(cuts, n).groups:
            if (first, last) not in run_total:
                run_total[first, last] = costs.run_breakdown(0, first, last).total
            totals.append(run_total[first, last])
        return _score(totals, config.objective)

    result = _evolve(config, random_individual, crossover, mutate, fitness)
    return SequentialPlan.from_cuts(result.chromosome, n)


def _repair_assignment(genes: list[int], partitions: int, rng: random.Random) -> tuple:
    """Give every empty partition one layer taken from a partition holding several."""
    genes = list(genes)
    for p in range(1, partitions + 1):
        if p in genes:
            continue
        donors = [i for i, g in enumerate(genes) if genes.count(g) > 1]
        genes[rng.choice(donors)] = p
    return tuple(genes)


def _runs(ids: Sequence[int]) -> list[list[int]]:
    runs: list[list[int]] = []
    for i in ids:
        if runs and runs[-1][-1] == i - 1:
            runs[-1].append(i)
        else:
            runs.append([i])
    return runs


def plan_vertical_ga(
    model: NetworkModel, profile: DeviceProfile, partitions: int, config: GAConfig = GAConfig()
) -> VerticalPlan:
    """Free layer assignment found by a genetic search; chromosome = assignment vector.

    The initial population includes the optimal contiguous assignment, so with
    elitism the result is never worse than ``plan_sequential_dp`` under the
    ``max`` objective.
    """
    _check_partitions(model, partitions)
    n = len(model)
    if partitions == 1:
        return VerticalPlan(1, (1,) * n)
    costs = _costs(model, profile)

    def random_individual(rng):
        return _repair_assignment([rng.randint(1, partitions) for _ in range(n)], partitions, rng)

    def crossover(a, b, rng):
        return _single_point(a, b, rng)

    def mutate(genes, rng):
        out = [rng.randint(1, partitions) if rng.random() < config.mutation_rate else g for g in genes]
        return _repair_assignment(out, partitions, rng)

    member_total: dict[tuple[int, ...], float] = {}

    def fitness(genes):
        # a partition's energy depends only on which layers it holds
        totals = []
        for p in range(1, partitions + 1):
            ids = tuple(i for i, g in enumerate(genes, start=1) if g == p)
            if ids not in member_total:
                member_total[ids] = costs.runs_breakdown(0, _runs(ids)).total
            totals.append(member_total[ids])
        return _score(totals, config.objective)

    # contiguous plans are vertical plans too: start from the best one
    contiguous = plan_sequential_dp(model, costs, partitions).assignment()
    result = _evolve(config, random_individual, crossover, mutate, fitness, seeds=[contiguous])
    return VerticalPlan(partitions, result.chromosome)


# ---------------------------------------------------------------------------
# exact planners


def plan_sequential_dp(model: NetworkModel, profile: DeviceProfile, partitions: int) -> SequentialPlan:
    """Contiguous grouping minimizing the largest partition energy.

    ``best[k][s]`` is the optimal bottleneck for layers ``s..L`` split into
    ``k`` groups. Among optimal plans the lexicographically smallest cut
    vector is returned: each cut is placed as early as the optimum allows.
    Only ``max`` and ``min`` touch the table entries, so comparisons are exact.
    """
    _check_partitions(model, partitions)
    costs = _costs(model, profile)
    n = costs.num_layers
    run = {(a, b): costs.run_breakdown(0, a, b).total for a in range(1, n + 1) for b in range(a, n + 1)}

    inf = float("inf")
    best = [[inf] * (n + 2) for _ in range(partitions + 1)]
    for s in range(1, n + 1):
        best[1][s] = run[s, n]
    for k in range(2, partitions + 1):
        for s in range(1, n - k + 2):
            best[k][s] = min(max(run[s, e], best[k - 1][e + 1]) for e in range(s, n - k + 2))
    target = best[partitions][1]

    cuts, start = [], 1
    for k in range(partitions, 1, -1):
        end = next(e for e in range(start, n - k + 2) if run[start, e] <= target and best[k - 1][e + 1] <= target)
        cuts.append(end)
        start = end + 1
    return SequentialPlan.from_cuts(cuts, n)


def exhaustive_vertical(
    model: NetworkModel, profile: DeviceProfile, partitions: int, limit: int = EXHAUSTIVE_LIMIT
) -> VerticalPlan:
    """Optimal free assignment by enumerating every surjective layer-to-partition map.

    Ties go to the lexicographically smallest assignment.
    """
    _check_partitions(model, partitions)
    n = len(model)
    size = partitions**n
    if size > limit:
        raise SearchSpaceError(size, limit)
    costs = _costs(model, profile)
    best_value, best_genes = float("inf"), None
    for genes in itertools.product(range(1, partitions + 1), repeat=n):
        if len(set(genes)) != partitions:
            continue
        value = max(b.total for b in vertical_breakdowns(costs, VerticalPlan(partitions, genes)))
        if value < best_value:
            best_value, best_genes = value, genes
    return VerticalPlan(partitions, best_genes)
