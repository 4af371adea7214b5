"""Space-filling initial designs."""

import numpy as np
from scipy.stats import qmc

from .discrepancy import wrapped_discrepancy

__all__ = ["initial_design", "mesh_design"]


def initial_design(n, d, seed=None, n_candidates=20, n_exchanges=200):
    """Latin hypercube refined by column exchanges under the wrapped discrepancy.

    The best of ``n_candidates`` random Latin hypercubes is improved by
    swapping two entries within a random column whenever the swap lowers the
    discrepancy.  Points are cell midpoints jittered within their cell.
    """
    rng = np.random.default_rng(seed)
    best, best_val = None, np.inf
    for _ in range(n_candidates):
        x = qmc.LatinHypercube(d, seed=rng).random(n)
        val = wrapped_discrepancy(x)
        if val < best_val:
            best, best_val = x, val
    for _ in range(n_exchanges):
        if n < 2:
            break
        col = int(rng.integers(d))
        i, j = rng.choice(n, size=2, replace=False)
        trial = best.copy()
        trial[[i, j], col] = trial[[j, i], col]
        val = wrapped_discrepancy(trial)
        if val < best_val:
            best, best_val = trial, val
    return best


def mesh_design(levels, d):
    """Full factorial grid with ``levels`` equally spaced values per axis, corners included."""
    axes = [np.linspace(0.0, 1.0, levels)] * d
    grid = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in grid])
