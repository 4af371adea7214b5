import itertools

import numpy as np
import pytest

from scobo.optimization import GaParams, ga_optimize, rescore, sa_optimize
from scobo.sampling import SamplerParams, generate

from conftest import BumpAcquisition, small_instance


def _instance(seed, n=4, m=12, n_min=400):
    return generate(BumpAcquisition(), n, SamplerParams(n_min=n_min, m=m), seed=seed)


def test_ga_params_validation():
    with pytest.raises(ValueError):
        GaParams(p_c=1.5)
    with pytest.raises(ValueError):
        GaParams(max_generations=0)
    with pytest.raises(ValueError):
        GaParams(l=0)


@pytest.mark.parametrize("seed", range(4))
def test_sa_invariants(seed):
    batch, pool, _ = _instance(seed)
    res = sa_optimize(batch, pool)
    assert res.indices[0] == 0
    assert len(set(res.indices.tolist())) == batch.n
    assert res.score == pytest.approx(rescore(pool, res.indices), abs=1e-10)
    assert res.score <= batch.d_scores.min() + 1e-15
    assert np.all(np.diff(res.trace.best) <= 0)
    assert res.trace.swaps_per_sweep[-1] == 0
    assert len(res.trace.swaps_per_sweep) <= 1000


@pytest.mark.parametrize("seed", range(4))
def test_ga_invariants(seed):
    batch, pool, _ = _instance(seed)
    res = ga_optimize(batch, pool, GaParams(max_generations=60), seed=seed)
    assert res.indices[0] == 0
    assert len(set(res.indices.tolist())) == batch.n
    assert res.score == pytest.approx(rescore(pool, res.indices), abs=1e-10)
    assert np.all(np.diff(res.trace.best) <= 0)
    assert res.trace.best[0] == pytest.approx(batch.d_scores.min())
    assert np.all(np.diff(res.trace.evaluations) >= 0)


def test_sa_local_minimum_by_enumeration():
    batch, pool, _ = _instance(5, n=3, m=3, n_min=200)
    res = sa_optimize(batch, pool)
    for slot in (1, 2):
        for s in range(len(pool)):
            if s in res.indices:
                continue
            trial = res.indices.copy()
            trial[slot] = s
            assert rescore(pool, trial) >= res.score - 1e-12


def test_ga_finds_exhaustive_optimum_small():
    batch, pool = small_instance(6)
    best = min(
        rescore(pool, np.array([0, a, b])) for a, b in itertools.combinations(range(1, len(pool)), 2)
    )
    res = ga_optimize(batch, pool, seed=0)
    assert res.score == pytest.approx(best, abs=1e-12)


def test_evaluations_to_reach():
    batch, pool, _ = _instance(1)
    tr = sa_optimize(batch, pool).trace
    assert tr.evaluations_to_reach(tr.best[0]) == 0
    assert tr.evaluations_to_reach(-np.inf) == float("inf")


def test_ga_without_operators_keeps_population():
    batch, pool, _ = _instance(2)
    res = ga_optimize(batch, pool, GaParams(p_c=0, p_m=0, max_generations=5), seed=0)
    assert res.score == pytest.approx(batch.d_scores.min())
    assert res.trace.evaluations[-1] == 0
