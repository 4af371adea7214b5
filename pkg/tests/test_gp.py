import numpy as np
import pytest
from scipy.optimize import approx_fprime

from scobo.gp import GpConfig, _neg_loglik, condition, fantasy_update, fit, predict


def _data(n=12, d=2, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.random((n, d))
    y = np.sin(6 * x[:, 0]) + x[:, 1] ** 2
    return x, y


def test_interpolates_training_data():
    x, y = _data()
    model = fit(x, y, GpConfig(n_starts=4))
    mu, var = model.predict(x)
    assert np.allclose(mu, y, atol=1e-2 * np.std(y))
    assert np.all(var >= 0)
    assert np.all(var < 1e-2 * np.var(y))


def test_variance_grows_away_from_data():
    x, y = _data()
    model = fit(x, y, GpConfig(n_starts=4))
    _, v_near = predict(model, x[0] + 1e-4)
    _, v_far = predict(model, [5.0, 5.0])
    assert v_far > v_near


def test_hyperparameters_respect_bounds():
    x, y = _data(seed=3)
    cfg = GpConfig(n_starts=4)
    model = fit(x, y, cfg)
    assert np.all(model.length_scales >= cfg.length_scale_bounds[0] * (1 - 1e-9))
    assert np.all(model.length_scales <= cfg.length_scale_bounds[1] * (1 + 1e-9))
    assert cfg.nugget_bounds[0] <= model.nugget <= cfg.nugget_bounds[1]


def test_analytic_gradient_matches_finite_differences():
    x, y = _data(n=8)
    y = (y - y.mean()) / y.std()
    theta = np.log([0.3, 0.6, 1e-4])
    _, grad = _neg_loglik(theta, x, y)
    fd = approx_fprime(theta, lambda t: _neg_loglik(t, x, y, with_grad=False), 1e-6)
    assert np.allclose(grad, fd, rtol=1e-4, atol=1e-5)


def test_fit_is_deterministic():
    x, y = _data()
    a = fit(x, y, GpConfig(n_starts=4, seed=7))
    b = fit(x, y, GpConfig(n_starts=4, seed=7))
    assert np.array_equal(a.length_scales, b.length_scales)


def test_constant_data():
    x = np.random.default_rng(0).random((5, 2))
    model = fit(x, np.full(5, 2.5))
    mu, var = model.predict(np.array([[0.5, 0.5]]))
    assert mu[0] == pytest.approx(2.5)
    assert var[0] >= 0


@pytest.mark.parametrize("bad", [np.array([1.0]), np.array([1.0, np.nan])])
def test_invalid_inputs(bad):
    x = np.zeros((len(bad), 1)) + np.arange(len(bad))[:, None] * 0.1
    with pytest.raises(ValueError):
        fit(x, bad)


def test_fantasy_update_equals_rebuild():
    x, y = _data()
    model = fit(x, y, GpConfig(n_starts=4))
    x_new = np.array([0.33, 0.71])
    lie = float(np.min(y))
    fast = fantasy_update(model, x_new, lie)
    slow = condition(model, np.vstack([x, x_new]), np.append(y, lie))
    grid = np.random.default_rng(1).random((50, 2))
    for a, b in zip(fast.predict(grid), slow.predict(grid)):
        assert np.allclose(a, b, rtol=1e-8, atol=1e-10)


def test_fantasy_on_duplicate_site_is_finite():
    x, y = _data()
    model = fit(x, y, GpConfig(n_starts=4))
    upd = fantasy_update(model, x[2], y[2])
    mu, var = upd.predict(x[:3])
    assert np.all(np.isfinite(mu)) and np.all(var >= 0)
