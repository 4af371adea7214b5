"""Design refinement over a candidate pool: genetic and switch algorithms.

Both optimizers work on designs stored as pool-index vectors, keep slot 0
(the acquisition maximizer) fixed, and update scores only through the cached
``A2`` table and the pool Gram matrix.
"""

import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .discrepancy import a3_design, delta_indices, swap_deltas

__all__ = ["GaParams", "OptimizationTrace", "OptimizationResult", "ga_optimize", "sa_optimize", "rescore"]

_SWAP_TOL = 1e-14
_FITNESS_EPS = 1e-9
_STALL_TOL = 1e-12
_REPAIR_ATTEMPTS = 100


@dataclass(frozen=True)
class GaParams:
    l: float = 5.0
    p_c: float = 0.5
    p_m: float = 0.1
    max_generations: int = 200
    stall_generations: int = 30

    def __post_init__(self):
        if self.l <= 0:
            raise ValueError("fitness exponent must be positive")
        for name in ("p_c", "p_m"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.max_generations < 1 or self.stall_generations < 1:
            raise ValueError("generation limits must be positive")


@dataclass
class OptimizationTrace:
    """Per-iteration history.

    ``best`` and ``evaluations`` are aligned: ``best[t]`` is the best score
    known after ``evaluations[t]`` delta evaluations.  For the GA one entry is
    recorded per generation (entry 0 is the initial population); for the
    switch algorithm one per accepted swap.
    """

    best: list = field(default_factory=list)
    evaluations: list = field(default_factory=list)
    population: list = field(default_factory=list)
    swaps_per_sweep: list = field(default_factory=list)
    seconds: float = 0.0

    def evaluations_to_reach(self, level):
        """Delta evaluations needed for the best score to drop to ``level`` (inf if never)."""
        for b, e in zip(self.best, self.evaluations):
            if b <= level:
                return e
        return float("inf")


class OptimizationResult(NamedTuple):
    design: np.ndarray
    score: float
    trace: OptimizationTrace
    indices: np.ndarray


def rescore(pool, idx):
    """Reduced discrepancy of a pool-index design, recomputed from scratch."""
    idx = np.asarray(idx)
    n = idx.shape[0]
    return float(-2.0 / n * np.sum(pool.a2[idx]) + a3_design(pool.sites[idx]))


def sa_optimize(batch, pool=None, max_sweeps=1000):
    """Switch algorithm: best-improvement coordinate swaps until a sweep changes nothing.

    Starts from the best candidate.  For each slot ``i >= 1`` the pool site
    not already in the design with the most negative score change is swapped
    in when that change is below ``-1e-14`` (lowest pool index on ties).
    """
    pool = pool if pool is not None else batch.pool
    t0 = time.perf_counter()
    _, x, score = batch.best()
    n = x.shape[0]
    trace = OptimizationTrace(best=[score], evaluations=[0])
    evals = 0
    for _ in range(max_sweeps):
        swaps = 0
        for slot in range(1, n):
            deltas = swap_deltas(pool, x, slot)
            deltas[x] = np.inf
            evals += len(pool) - n
            s = int(np.argmin(deltas))
            if deltas[s] < -_SWAP_TOL:
                x = x.copy()
                x[slot] = s
                score += float(deltas[s])
                swaps += 1
                trace.best.append(score)
                trace.evaluations.append(evals)
        trace.swaps_per_sweep.append(swaps)
        if swaps == 0:
            break
    if trace.evaluations[-1] != evals:
        trace.best.append(score)
        trace.evaluations.append(evals)
    trace.seconds = time.perf_counter() - t0
    return OptimizationResult(pool.sites[x], score, trace, x)


def _fitness(scores, l):
    shifted = scores - np.min(scores) + _FITNESS_EPS
    # scale before the power so that the best entry is exactly 1
    return (shifted / _FITNESS_EPS) ** (-l)


def _roulette(cum, rng):
    r = rng.random() * cum[-1]
    return min(int(np.searchsorted(cum, r, side="right")), len(cum) - 1)


def _repair(child, slot, pool_size, rng):
    taken = set(child[:slot].tolist()) | set(child[slot + 1:].tolist())
    for _ in range(_REPAIR_ATTEMPTS):
        s = int(rng.integers(1, pool_size))
        if s not in taken:
            return s
    return None


def ga_optimize(batch, pool=None, params=None, seed=None):
    """Genetic algorithm with elitism, roulette selection on ``D^-l`` fitness,
    per-slot crossover and per-slot mutation to random pool sites.

    Fitness is computed on scores shifted so that the population minimum maps
    to a small positive value; this keeps reduced (possibly negative) scores
    usable while preserving their ranking.
    """
    pool = pool if pool is not None else batch.pool
    params = params or GaParams()
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    pop = batch.designs.copy()
    scores = batch.d_scores.astype(float).copy()
    m, n = pop.shape
    k_best = int(np.argmin(scores))
    best_x, best_d = pop[k_best].copy(), float(scores[k_best])
    trace = OptimizationTrace(best=[best_d], evaluations=[0], population=[scores.copy()])
    evals = 0
    stall = 0
    pool_size = len(pool)
    for _ in range(params.max_generations):
        prev_best = best_d
        fit = _fitness(scores, params.l)
        cum = np.cumsum(fit)
        offspring = [best_x.copy()]
        off_scores = [best_d]
        while len(offspring) < m:
            f = _roulette(cum, rng)
            mo = _roulette(cum, rng)
            father, mother = pop[f], pop[mo]
            child = father.copy()
            for slot in range(1, n):
                if rng.random() < params.p_c and mother[slot] != child[slot]:
                    child[slot] = mother[slot]
                    if np.count_nonzero(child == child[slot]) > 1:
                        s = _repair(child, slot, pool_size, rng)
                        child[slot] = s if s is not None else father[slot]
            for slot in range(1, n):
                if rng.random() < params.p_m:
                    child[slot] = int(rng.integers(0, pool_size))
                    if np.count_nonzero(child == child[slot]) > 1:
                        s = _repair(child, slot, pool_size, rng)
                        child[slot] = s if s is not None else father[slot]
            if len(set(child.tolist())) < n:
                child = father.copy()
            if np.array_equal(child, father):
                d_child = float(scores[f])
            else:
                d_child = delta_indices(pool, father, child, scores[f])
                evals += 1
            offspring.append(child)
            off_scores.append(d_child)
        pop = np.array(offspring)
        scores = np.array(off_scores)
        k = int(np.argmin(scores))
        if scores[k] < best_d:
            best_x, best_d = pop[k].copy(), float(scores[k])
        trace.best.append(best_d)
        trace.evaluations.append(evals)
        trace.population.append(scores.copy())
        stall = stall + 1 if prev_best - best_d < _STALL_TOL else 0
        if stall >= params.stall_generations:
            break
    trace.seconds = time.perf_counter() - t0
    return OptimizationResult(pool.sites[best_x], best_d, trace, best_x)
