import numpy as np
import pytest
from scipy import stats

from scobo.discrepancy import PreSampleSet, a2_sites, d_minus
from scobo.errors import DegenerateAcquisitionError, DistinctSiteShortageError
from scobo.sampling import (
    Mode,
    SamplerParams,
    generate,
    lambda_screen,
    rejection_factors,
    sir_resample,
)

from conftest import BumpAcquisition


def test_rejection_factors():
    lam = rejection_factors([1.0, 0.5, 0.0], [0.5, 0.5, 0.5], 2.0)
    assert lam[0] == 1.0 and lam[1] == 2.0 and np.isinf(lam[2])
    with pytest.raises(DegenerateAcquisitionError):
        rejection_factors([1.0], [0.1], 0.0)


def test_lambda_screen_picks_smallest(bump):
    u = np.random.default_rng(0).random((2000, 2))
    pre = PreSampleSet(u, bump(u))
    acc, tail = lambda_screen(pre, bump.maximum, 6, seed=1)
    assert len(acc) == 5 and tail <= 1.0
    v = np.random.default_rng(1).random(len(u))
    lam = rejection_factors(pre.phi, v, bump.maximum)
    assert set(acc) == set(np.argsort(lam)[:5])


def test_lambda_screen_validates(bump):
    u = np.random.default_rng(0).random((50, 2))
    pre = PreSampleSet(u, bump(u))
    with pytest.raises(ValueError):
        lambda_screen(pre, bump.maximum, 1)
    with pytest.raises(ValueError):
        lambda_screen(pre, 0.5 * np.max(pre.phi), 3)


def test_accepted_lambda_uniform(bump):
    u = np.random.default_rng(2).random((20000, 2))
    phi = bump(u)
    lam = rejection_factors(phi, np.random.default_rng(3).random(len(u)), bump.maximum)
    acc = lam[lam <= 1.0]
    assert stats.kstest(acc, "uniform").pvalue > 0.001


def test_sir_distinct_and_excluding():
    u = np.random.default_rng(4).random((100, 2))
    pre = PreSampleSet(u, np.random.default_rng(5).random(100) + 0.1)
    idx = sir_resample(pre, 30, seed=0, exclude=[0, 1])
    assert len(set(idx.tolist())) == 30
    assert not {0, 1} & set(idx.tolist())


def test_sir_peaked_weights_still_distinct():
    u = np.random.default_rng(4).random((50, 2))
    phi = np.full(50, 1e-12)
    phi[7] = 1.0
    idx = sir_resample(PreSampleSet(u, phi), 10, seed=0)
    assert len(set(idx.tolist())) == 10 and 7 in idx


def test_sir_shortage():
    u = np.random.default_rng(4).random((5, 2))
    pre = PreSampleSet(u, np.array([1.0, 0, 0, 0, 1.0]))
    with pytest.raises(DistinctSiteShortageError):
        sir_resample(pre, 3, seed=0)


def test_generate_shapes_and_anchor(bump):
    batch, pool, pre = generate(bump, 4, SamplerParams(n_min=500, m=8), seed=0)
    assert batch.designs.shape == (8, 4)
    assert np.all(batch.designs[:, 0] == 0)
    for row in batch.designs:
        assert len(set(row.tolist())) == 4
    assert np.all(batch.designs < len(pool))
    for k in range(batch.m):
        x = batch.design_points(k)
        assert batch.d_scores[k] == pytest.approx(d_minus(x, a2_sites(x, pre)), abs=1e-12)
    assert np.allclose(pool.a2, a2_sites(pool.sites, pre))


def test_generate_reproducible(bump):
    a = generate(bump, 4, SamplerParams(n_min=300, m=4), seed=11)[0]
    b = generate(BumpAcquisition(), 4, SamplerParams(n_min=300, m=4), seed=11)[0]
    assert np.array_equal(a.designs, b.designs)
    assert np.array_equal(a.pool.sites, b.pool.sites)


def test_sequential_mode_grows_presamples():
    acq = BumpAcquisition(width=0.05, floor=0.0)
    batch, pool, pre = generate(
        acq, 10, SamplerParams(n_min=20, n_max=100000, m=2), seed=3, x_star=[0.3, 0.3], phi_max=1.0
    )
    assert Mode.RS_SEQUENTIAL in batch.modes
    assert len(pre) > 20
    # one acquisition evaluation per pre-sample point, nothing else
    assert acq.calls == len(pre)


def test_sir_mode_when_nmax_reached():
    acq = BumpAcquisition(width=0.3, floor=0.0)
    batch, _, pre = generate(acq, 6, SamplerParams(n_min=40, n_max=40, m=3), seed=3)
    assert all(m == Mode.SIR for m in batch.modes)
    assert len(pre) == 40


def test_zero_acquisition_is_degenerate():
    class Zero:
        dim = 2

        def __call__(self, x):
            return np.zeros(np.atleast_2d(x).shape[0])

    with pytest.raises(DegenerateAcquisitionError):
        generate(Zero(), 3, SamplerParams(n_min=50, m=2), seed=0, x_star=[0.5, 0.5], phi_max=0.0)


def test_better_presample_replaces_x_star(bump):
    batch, pool, _ = generate(bump, 3, SamplerParams(n_min=500, m=2), seed=0, x_star=[0.9, 0.9], phi_max=bump(np.array([[0.9, 0.9]]))[0])
    assert bump(pool.sites[:1])[0] > bump(np.array([[0.9, 0.9]]))[0]


def test_batch_size_validation(bump):
    with pytest.raises(ValueError):
        generate(bump, 1)
