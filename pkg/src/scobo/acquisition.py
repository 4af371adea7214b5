"""One-site acquisition functions and their global maximizer."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm, qmc

__all__ = [
    "expected_improvement",
    "ExpectedImprovement",
    "UniformAcquisition",
    "MaximizerBudget",
    "evaluate",
    "maximize",
]

_SIGMA_FLOOR = 1e-12


def expected_improvement(mu, sigma, y_best):
    """Closed-form EI for minimization, with the ``sigma -> 0`` limit."""
    mu, sigma = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(sigma, dtype=float))
    shape = mu.shape
    mu, sigma = mu.ravel(), sigma.ravel()
    improvement = y_best - mu
    out = np.maximum(improvement, 0.0)
    pos = sigma > 0
    if np.any(pos):
        s = sigma[pos]
        z = improvement[pos] / s
        out[pos] = improvement[pos] * norm.cdf(z) + s * norm.pdf(z)
    return np.maximum(out, 0.0).reshape(shape)


class ExpectedImprovement:
    """EI of a fitted :class:`~scobo.gp.GpModel` over the unit cube.

    Called with an ``(k, d)`` array it returns ``k`` values.
    """

    kind = "EI"

    def __init__(self, model, y_best=None):
        self.model = model
        self.dim = model.dim
        self.y_best = float(np.min(model.y_original)) if y_best is None else float(y_best)

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        mu, var = self.model.predict(x)
        sigma = np.sqrt(var)
        # sigma is compared on the standardized scale
        sigma = np.where(sigma < _SIGMA_FLOOR * self.model.y_scale, 0.0, sigma)
        return expected_improvement(mu, sigma, self.y_best)


class UniformAcquisition:
    """Constant acquisition; the target becomes the uniform law."""

    kind = "Uniform"

    def __init__(self, dim):
        self.dim = int(dim)

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.ones(x.shape[0])


def evaluate(acq, x):
    return float(acq(np.asarray(x, dtype=float).reshape(1, -1))[0])


@dataclass(frozen=True)
class MaximizerBudget:
    n_starts: int = None  # default 10 * d
    max_local_steps: int = 200
    n_screen: int = 10_000


def maximize(acq, budget=None, seed=None):
    """Global maximization by a uniform screen plus Nelder-Mead multistart.

    Probe order is: screen points, Latin-hypercube starts, then the local
    optimum of each start (the best screen point seeds the last start).  The
    first probe attaining the maximum wins.
    """
    budget = budget or MaximizerBudget()
    d = acq.dim
    rng = np.random.default_rng(seed)
    n_starts = budget.n_starts if budget.n_starts is not None else 10 * d

    screen = rng.random((budget.n_screen, d))
    screen_vals = acq(screen)
    lhs = qmc.LatinHypercube(d, seed=rng).random(n_starts) if n_starts > 0 else np.empty((0, d))
    lhs_vals = acq(lhs) if n_starts > 0 else np.empty(0)

    probes = [screen, lhs]
    values = [screen_vals, lhs_vals]
    starts = np.vstack([lhs, screen[np.argmax(screen_vals)][None, :]])
    if np.ptp(np.concatenate([screen_vals, lhs_vals])) > 0:
        bounds = [(0.0, 1.0)] * d

        def neg(z):
            return -float(acq(np.clip(z, 0.0, 1.0)[None, :])[0])

        local = []
        for s in starts:
            res = minimize(
                neg,
                s,
                method="Nelder-Mead",
                bounds=bounds,
                options={"maxfev": budget.max_local_steps, "xatol": 1e-9, "fatol": 1e-14},
            )
            local.append(np.clip(res.x, 0.0, 1.0))
        local = np.array(local)
        probes.append(local)
        values.append(acq(local))
    all_probes = np.vstack(probes)
    all_vals = np.concatenate(values)
    best = int(np.argmax(all_vals))
    return all_probes[best].copy(), float(all_vals[best])
