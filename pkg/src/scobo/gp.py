"""Gaussian-process regression with an anisotropic squared-exponential kernel.

The model works on the unit cube and on standardized responses.  The signal
variance is profiled out of the likelihood (its maximizer has a closed form),
so only the log length-scales and the log nugget are searched numerically.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize
from scipy.stats import qmc

from .errors import IllConditionedDataError

__all__ = ["GpConfig", "GpModel", "fit", "predict", "condition", "fantasy_update"]

_SIGNAL_FLOOR = 1e-10
_NEG_VAR_TOL = 1e-6


@dataclass(frozen=True)
class GpConfig:
    n_starts: int = 16
    length_scale_bounds: tuple = (0.01, 10.0)
    nugget_bounds: tuple = (1e-8, 1e-2)
    max_iter: int = 200
    seed: int = 0


@dataclass(frozen=True, eq=False)
class GpModel:
    """A fitted GP.  Immutable; use :func:`condition` or :func:`fantasy_update`
    to obtain a model with more data."""

    x_train: np.ndarray
    y_train: np.ndarray  # standardized
    mean_offset: float
    y_scale: float
    length_scales: np.ndarray
    signal_variance: float
    nugget: float
    chol: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    log_likelihood: float = float("nan")

    @property
    def dim(self):
        return self.x_train.shape[1]

    @property
    def y_original(self):
        return self.y_train * self.y_scale + self.mean_offset

    def predict(self, x):
        """Posterior mean and variance at the rows of ``x`` (original response scale)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = _corr(x, self.x_train, self.length_scales)
        mean = r @ self.alpha
        v = solve_triangular(self.chol, r.T, lower=True, check_finite=False)
        var = 1.0 - np.einsum("ij,ij->j", v, v)
        if np.any(var < -_NEG_VAR_TOL):
            raise FloatingPointError(f"negative predictive variance {var.min():.3g}")
        var = np.maximum(var, 0.0) * self.signal_variance
        return mean * self.y_scale + self.mean_offset, var * self.y_scale**2


def _corr(x1, x2, ls):
    d2 = np.zeros((x1.shape[0], x2.shape[0]))
    for k in range(x1.shape[1]):
        diff = (x1[:, k, None] - x2[None, :, k]) / ls[k]
        d2 += diff * diff
    return np.exp(-0.5 * d2)


def _sq_dists(x, ls):
    return [((x[:, k, None] - x[None, :, k]) / ls[k]) ** 2 for k in range(x.shape[1])]


def _neg_loglik(theta, x, y, with_grad=True):
    d = x.shape[1]
    ls = np.exp(theta[:d])
    g = np.exp(theta[d])
    n = x.shape[0]
    parts = _sq_dists(x, ls)
    r = np.exp(-0.5 * np.sum(parts, axis=0))
    c = r + g * np.eye(n)
    try:
        chol = np.linalg.cholesky(c)
    except np.linalg.LinAlgError:
        return (1e25, np.zeros_like(theta)) if with_grad else 1e25
    alpha = cho_solve((chol, True), y)
    sigma2 = max(float(y @ alpha) / n, _SIGNAL_FLOOR)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    nll = 0.5 * n * np.log(sigma2) + 0.5 * logdet
    if not with_grad:
        return nll
    cinv = cho_solve((chol, True), np.eye(n))
    grad = np.empty_like(theta)
    for k in range(d):
        dc = r * parts[k]
        grad[k] = -0.5 * (alpha @ dc @ alpha / sigma2 - np.sum(cinv * dc))
    grad[d] = -0.5 * g * (alpha @ alpha / sigma2 - np.trace(cinv))
    return nll, grad


def log_marginal_likelihood(x, y_std, length_scales, nugget):
    """Concentrated log-likelihood on standardized data (up to the usual constant)."""
    theta = np.concatenate([np.log(length_scales), [np.log(nugget)]])
    n = len(y_std)
    return -_neg_loglik(theta, np.asarray(x, float), np.asarray(y_std, float), False) - 0.5 * n * (
        1.0 + np.log(2.0 * np.pi)
    )


def _build(x, y_std, mean_offset, y_scale, ls, nugget, nugget_cap):
    n = x.shape[0]
    r = _corr(x, x, ls)
    while True:
        try:
            chol = np.linalg.cholesky(r + nugget * np.eye(n))
            break
        except np.linalg.LinAlgError:
            nugget *= 10.0
            if nugget > nugget_cap * (1 + 1e-12):
                raise IllConditionedDataError(
                    "covariance not positive definite at the largest nugget"
                ) from None
    alpha = cho_solve((chol, True), y_std)
    sigma2 = max(float(y_std @ alpha) / n, _SIGNAL_FLOOR)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    ll = -0.5 * n * np.log(sigma2) - 0.5 * logdet - 0.5 * n * (1.0 + np.log(2.0 * np.pi))
    return GpModel(
        x_train=x,
        y_train=y_std,
        mean_offset=mean_offset,
        y_scale=y_scale,
        length_scales=np.asarray(ls, float),
        signal_variance=sigma2,
        nugget=float(nugget),
        chol=chol,
        alpha=alpha,
        log_likelihood=float(ll),
    )


def fit(x_data, y_data, config=None):
    """Fit hyperparameters by multi-start maximum likelihood.

    Starts are a Latin hypercube over log length-scales and log nugget; the
    best start wins, ties going to the lowest start index.
    """
    config = config or GpConfig()
    x = np.atleast_2d(np.asarray(x_data, dtype=float))
    y = np.asarray(y_data, dtype=float).ravel()
    if x.shape[0] != y.shape[0]:
        raise ValueError("x_data and y_data must have the same length")
    if x.shape[0] < 2:
        raise ValueError("need at least two observations")
    if not np.all(np.isfinite(y)):
        raise ValueError("responses must be finite")
    d = x.shape[1]
    mean_offset = float(np.mean(y))
    std = float(np.std(y))
    y_scale = std if std > 0 else 1.0
    y_std = (y - mean_offset) / y_scale

    lo_ls, hi_ls = np.log(config.length_scale_bounds)
    lo_g, hi_g = np.log(config.nugget_bounds)
    bounds = [(lo_ls, hi_ls)] * d + [(lo_g, hi_g)]
    if std == 0:
        # Constant data: the likelihood is flat in the length-scales.
        ls = np.full(d, np.exp(0.5 * (lo_ls + hi_ls)))
        return _build(x, y_std, mean_offset, y_scale, ls, config.nugget_bounds[0], config.nugget_bounds[1])

    sampler = qmc.LatinHypercube(d + 1, seed=config.seed)
    starts = qmc.scale(sampler.random(config.n_starts), [b[0] for b in bounds], [b[1] for b in bounds])
    best_theta, best_val = None, np.inf
    for s in starts:
        res = minimize(
            _neg_loglik,
            s,
            args=(x, y_std),
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": config.max_iter},
        )
        val = float(res.fun)
        if np.isfinite(val) and val < best_val:
            best_theta, best_val = res.x, val
    if best_theta is None:
        raise IllConditionedDataError("no start produced a factorizable covariance")
    ls = np.exp(best_theta[:d])
    nugget = max(float(np.exp(best_theta[d])), config.nugget_bounds[0])
    return _build(x, y_std, mean_offset, y_scale, ls, nugget, config.nugget_bounds[1])


def predict(model, x):
    """Posterior mean and variance at a single point."""
    mean, var = model.predict(np.asarray(x, float).reshape(1, -1))
    return float(mean[0]), float(var[0])


def condition(model, x_data, y_data):
    """Rebuild ``model`` on new data with all hyperparameters and the
    standardization frozen."""
    x = np.atleast_2d(np.asarray(x_data, dtype=float))
    y_std = (np.asarray(y_data, dtype=float).ravel() - model.mean_offset) / model.y_scale
    new = _build(x, y_std, model.mean_offset, model.y_scale, model.length_scales, model.nugget, 1e-2)
    # the profiled signal variance is part of the frozen hyperparameters
    return replace(new, signal_variance=model.signal_variance)


def fantasy_update(model, x_new, y_lie):
    """Condition on one extra (possibly fabricated) observation.

    Extends the Cholesky factor by one row; hyperparameters stay fixed.  An
    exact duplicate of a training input falls back to a rebuild with a larger
    nugget.
    """
    x_new = np.asarray(x_new, dtype=float).reshape(1, -1)
    y_s = (float(y_lie) - model.mean_offset) / model.y_scale
    k = _corr(x_new, model.x_train, model.length_scales).ravel()
    l12 = solve_triangular(model.chol, k, lower=True, check_finite=False)
    l22_sq = 1.0 + model.nugget - l12 @ l12
    x = np.vstack([model.x_train, x_new])
    y = np.append(model.y_train, y_s)
    if l22_sq <= model.nugget * 1e-3:
        rebuilt = condition(model, x, y * model.y_scale + model.mean_offset)
        return rebuilt
    n = x.shape[0]
    chol = np.zeros((n, n))
    chol[:-1, :-1] = model.chol
    chol[-1, :-1] = l12
    chol[-1, -1] = np.sqrt(l22_sq)
    alpha = cho_solve((chol, True), y)
    return replace(model, x_train=x, y_train=y, chol=chol, alpha=alpha, log_likelihood=float("nan"))
