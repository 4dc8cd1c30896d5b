"""Orbital ordering on a 1D chain by a permutation genetic algorithm."""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from itertools import permutations

import numpy as np
from deap import base, tools


@dataclass
class OrbitalOrdering:
    """``perm[position] = orbital``."""

    perm: list[int]
    cost: float

    def __post_init__(self):
        self.perm = [int(x) for x in self.perm]
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError("not a permutation")

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def ordering_cost(k: np.ndarray, perm) -> float:
    """``sum_{i != j} K_ij (pos_i - pos_j)^2`` with ``pos`` the chain position of each orbital."""
    k = np.asarray(k, dtype=float)
    n = k.shape[0]
    perm = np.asarray(perm)
    if sorted(perm.tolist()) != list(range(n)):
        raise ValueError("not a permutation")
    pos = np.empty(n)
    pos[perm] = np.arange(n)
    d2 = (pos[:, None] - pos[None, :]) ** 2
    return float(np.sum(k * d2))


def brute_force_ordering(k: np.ndarray) -> OrbitalOrdering:
    n = k.shape[0]
    best = min(permutations(range(n)), key=lambda p: ordering_cost(k, p))
    return OrbitalOrdering(list(best), ordering_cost(k, best))


@dataclass
class GAConfig:
    population: int = 50
    cx_prob: float = 0.7
    mut_prob: float = 0.2
    generations: int = 100
    tournament: int = 3
    indpb: float | None = None  # per-position swap probability; None: 2 / n
    elitism: bool = True


class _Fitness(base.Fitness):
    weights = (-1.0,)


class _Individual(list):
    def __init__(self, *args):
        super().__init__(*args)
        self.fitness = _Fitness()


def ga_reorder(k: np.ndarray, config: GAConfig | None = None, seed: int = 0,
               history: list | None = None) -> OrbitalOrdering:
    """Minimize the ordering cost with ordered crossover and shuffle-index mutation.

    The identity ordering seeds the initial population and the best
    individual is always carried over, so the result never exceeds the
    identity cost.
    """
    cfg = config or GAConfig()
    k = np.asarray(k, dtype=float)
    n = k.shape[0]
    if n < 2:
        raise ValueError("need at least two orbitals")
    indpb = cfg.indpb if cfg.indpb is not None else 2.0 / n
    rng = random.Random(seed)
    # DEAP operators draw from the module-level generator
    saved = random.getstate()
    random.seed(rng.random())
    try:
        def evaluate(ind):
            return (ordering_cost(k, ind),)

        pop = [_Individual(range(n))]
        while len(pop) < cfg.population:
            pop.append(_Individual(random.sample(range(n), n)))
        for ind in pop:
            ind.fitness.values = evaluate(ind)
        best = tools.selBest(pop, 1)[0]
        best = _Individual(best)
        best.fitness.values = evaluate(best)
        for gen in range(cfg.generations):
            offspring = [_Individual(x) for x in tools.selTournament(pop, len(pop), tournsize=cfg.tournament)]
            for a, b in zip(offspring[::2], offspring[1::2]):
                if random.random() < cfg.cx_prob:
                    tools.cxOrdered(a, b)
            for ind in offspring:
                if random.random() < cfg.mut_prob:
                    tools.mutShuffleIndexes(ind, indpb)
            for ind in offspring:
                ind.fitness.values = evaluate(ind)
            if cfg.elitism:
                worst = min(range(len(offspring)), key=lambda i: offspring[i].fitness)
                elite = _Individual(best)
                elite.fitness.values = best.fitness.values
                offspring[worst] = elite
            pop = offspring
            cand = tools.selBest(pop, 1)[0]
            if cand.fitness.values[0] < best.fitness.values[0]:
                best = _Individual(cand)
                best.fitness.values = cand.fitness.values
            if history is not None:
                history.append(best.fitness.values[0])
    finally:
        random.setstate(saved)
    return OrbitalOrdering(list(best), float(best.fitness.values[0]))
