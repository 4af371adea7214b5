"""Wrapped-discrepancy kernel and Monte-Carlo general discrepancy.

All designs live in the unit cube ``[0, 1]^d``.  The target density is an
unnormalized acquisition function ``phi`` known only on a set of uniform
pre-samples ``U``; the squared discrepancy of a design ``X`` (``n`` points) is
estimated as::

    D2(X) = A1 - (2/n) * sum_i A2(x_i) + A3(X)

    A1    = sum_{i,j} K(u_i, u_j) phi_i phi_j / S^2      (independent of X)
    A2(x) = sum_j K(u_j, x) phi_j / S                    (one site at a time)
    A3(X) = sum_{i,j} K(x_i, x_j) / n^2                  (independent of phi)

with ``S = sum_j phi_j``.  Designs are only ever compared through
``d_minus = D2 - A1`` so the quadratic ``A1`` term is computed lazily.

Reduction order is fixed: per-row sums are formed in compiled loops and the
row totals are combined with numpy's pairwise summation, so repeated calls
on the same inputs return identical floats.
"""

import threading
from collections import Counter

import numba
import numpy as np

from .errors import DegenerateAcquisitionError, MissingCacheError

__all__ = [
    "kernel_wd",
    "kernel_matrix",
    "PreSampleSet",
    "CandidatePool",
    "a1_presample",
    "a2_site",
    "a2_sites",
    "a3_design",
    "d_minus",
    "d_full_estimate",
    "delta_update",
    "delta_indices",
    "swap_deltas",
    "wrapped_discrepancy",
    "DiscrepancyParts",
    "discrepancy_parts",
]


@numba.njit(cache=True, fastmath=True)
def _upper_row_sums(ut, w):
    # ut has shape (d, N); returns w_i * sum_{j>i} K(u_i, u_j) w_j per row.
    d, n = ut.shape
    out = np.empty(n)
    buf = np.empty(n)
    for i in range(n):
        m = n - i - 1
        for j in range(m):
            buf[j] = w[i + 1 + j]
        for k in range(d):
            a = ut[k, i]
            col = ut[k]
            for j in range(m):
                t = abs(a - col[i + 1 + j])
                buf[j] *= 1.5 - t + t * t
        s = 0.0
        for j in range(m):
            s += buf[j]
        out[i] = s * w[i]
    return out


@numba.njit(cache=True, fastmath=True)
def _cross_sums(xt, ut, w):
    # Returns sum_j K(x_i, u_j) w_j for every column x_i of xt (shape (d, n)).
    d, n = xt.shape
    npts = ut.shape[1]
    out = np.empty(n)
    buf = np.empty(npts)
    for i in range(n):
        for j in range(npts):
            buf[j] = w[j]
        for k in range(d):
            a = xt[k, i]
            col = ut[k]
            for j in range(npts):
                t = abs(a - col[j])
                buf[j] *= 1.5 - t + t * t
        s = 0.0
        for j in range(npts):
            s += buf[j]
        out[i] = s
    return out


def _as_points(x, dim=None):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise ValueError(f"expected points of shape (n, d), got {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"dimension mismatch: expected d={dim}, got d={arr.shape[1]}")
    return arr


def kernel_wd(u, v):
    """Wrapped-discrepancy kernel ``prod_i (3/2 - |u_i - v_i| + (u_i - v_i)^2)``."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    if u.size == 0:
        raise ValueError("points must have at least one coordinate")
    t = np.abs(u - v)
    return float(np.prod(1.5 - t + t * t))


def kernel_matrix(x, y):
    """Dense kernel matrix between two point sets of shapes (a, d) and (b, d)."""
    x = _as_points(x)
    y = _as_points(y, x.shape[1])
    out = np.ones((x.shape[0], y.shape[0]))
    for k in range(x.shape[1]):
        t = np.abs(x[:, k, None] - y[None, :, k])
        out *= 1.5 - t + t * t
    return out


class PreSampleSet:
    """Uniform pre-samples with cached acquisition values.

    Storage grows geometrically so that sequential rejection sampling can
    append one point at a time without quadratic copying.  ``s_phi`` is kept
    as a running sum.  The ``A1`` term is cached and invalidated on growth;
    the first computation is guarded by a lock.
    """

    def __init__(self, points, phi, n_min=None, n_max=None):
        points = _as_points(points)
        phi = np.asarray(phi, dtype=float).ravel()
        if points.shape[0] != phi.shape[0]:
            raise ValueError("points and phi must have the same length")
        if np.any(phi < 0) or not np.all(np.isfinite(phi)):
            raise ValueError("phi values must be finite and non-negative")
        self.dim = points.shape[1]
        cap = max(16, points.shape[0])
        self._pts = np.empty((cap, self.dim))
        self._phi = np.empty(cap)
        self._n = points.shape[0]
        self._pts[: self._n] = points
        self._phi[: self._n] = phi
        self.s_phi = float(np.sum(phi))
        self.n_min = n_min if n_min is not None else self._n
        self.n_max = n_max if n_max is not None else self._n
        self._a1 = None
        self._lock = threading.Lock()

    def __len__(self):
        return self._n

    @property
    def points(self):
        return self._pts[: self._n]

    @property
    def phi(self):
        return self._phi[: self._n]

    def append(self, point, phi_value):
        """Add one pre-sample and its acquisition value; returns its index."""
        if phi_value < 0 or not np.isfinite(phi_value):
            raise ValueError("phi values must be finite and non-negative")
        if self._n == self._pts.shape[0]:
            cap = 2 * self._pts.shape[0]
            pts = np.empty((cap, self.dim))
            ph = np.empty(cap)
            pts[: self._n] = self._pts[: self._n]
            ph[: self._n] = self._phi[: self._n]
            self._pts, self._phi = pts, ph
        self._pts[self._n] = point
        self._phi[self._n] = phi_value
        self._n += 1
        self.s_phi += float(phi_value)
        self._a1 = None
        return self._n - 1

    def weights(self):
        """Normalized weights ``phi_i / S_phi``."""
        if not self.s_phi > 0:
            raise DegenerateAcquisitionError("acquisition is zero on every pre-sample")
        return self.phi / self.s_phi

    def a1(self):
        cached = self._a1
        if cached is not None:
            return cached
        with self._lock:
            if self._a1 is None:
                self._a1 = _a1_uncached(self)
            return self._a1


class CandidatePool:
    """The union of candidate sites with their cached ``A2`` values.

    Site 0 is the acquisition maximizer.  Sites are looked up by exact
    coordinate equality.
    """

    def __init__(self, sites, a2):
        self.sites = _as_points(sites).copy()
        self.a2 = np.asarray(a2, dtype=float).ravel().copy()
        if self.sites.shape[0] != self.a2.shape[0]:
            raise ValueError("sites and a2 must have the same length")
        self._lookup = {}
        for i, s in enumerate(self.sites):
            key = s.tobytes()
            if key in self._lookup:
                raise ValueError(f"duplicate pool site at index {i}")
            self._lookup[key] = i
        self._gram = None
        self._lock = threading.Lock()

    def __len__(self):
        return self.sites.shape[0]

    @property
    def dim(self):
        return self.sites.shape[1]

    def index_of(self, points):
        points = _as_points(points, self.dim)
        out = np.empty(points.shape[0], dtype=np.intp)
        for i, p in enumerate(points):
            try:
                out[i] = self._lookup[np.ascontiguousarray(p).tobytes()]
            except KeyError:
                raise MissingCacheError(f"site {p.tolist()} is not in the candidate pool") from None
        return out

    @property
    def gram(self):
        """Kernel matrix over all pool sites (computed once)."""
        if self._gram is None:
            with self._lock:
                if self._gram is None:
                    self._gram = kernel_matrix(self.sites, self.sites)
        return self._gram


def _a1_uncached(presamples):
    w = presamples.weights()
    ut = np.ascontiguousarray(presamples.points.T)
    rows = _upper_row_sums(ut, w)
    diag = 1.5 ** presamples.dim * np.sum(w * w)
    return float(2.0 * np.sum(rows) + diag)


def a1_presample(presamples):
    """Pre-sample pair term ``A1``; O(N^2), cached on the pre-sample set."""
    return presamples.a1()


def a2_sites(x, presamples):
    """``A2`` for every row of ``x``, using the cached acquisition values."""
    x = _as_points(x, presamples.dim)
    w = presamples.weights()
    return _cross_sums(
        np.ascontiguousarray(x.T), np.ascontiguousarray(presamples.points.T), w
    )


def a2_site(x, presamples):
    return float(a2_sites(x, presamples)[0])


def a3_design(x):
    """Design pair term ``sum_{i,j} K(x_i, x_j) / n^2``."""
    x = _as_points(x)
    n = x.shape[0]
    return float(np.sum(kernel_matrix(x, x)) / (n * n))


def d_minus(x, a2_values):
    """Reduced discrepancy ``-(2/n) sum A2 + A3`` (``D2`` without ``A1``)."""
    x = _as_points(x)
    a2_values = np.asarray(a2_values, dtype=float).ravel()
    n = x.shape[0]
    if a2_values.shape[0] != n:
        raise ValueError(f"got {a2_values.shape[0]} A2 values for a design of size {n}")
    return float(-2.0 / n * np.sum(a2_values) + a3_design(x))


def d_full_estimate(x, presamples):
    """Monte-Carlo estimate of the squared general discrepancy of ``x``."""
    x = _as_points(x, presamples.dim)
    return presamples.a1() + d_minus(x, a2_sites(x, presamples))


class DiscrepancyParts:
    """Components of a discrepancy estimate for one design."""

    def __init__(self, a2, a3, a1=None):
        self.a2 = np.asarray(a2, dtype=float)
        self.a3 = float(a3)
        self.a1 = a1
        n = self.a2.shape[0]
        self.d_minus = float(-2.0 / n * np.sum(self.a2) + self.a3)
        self.d_full = None if a1 is None else a1 + self.d_minus

    def __repr__(self):
        return (
            f"DiscrepancyParts(a1={self.a1}, a3={self.a3:.6g}, "
            f"d_minus={self.d_minus:.6g}, d_full={self.d_full})"
        )


def discrepancy_parts(x, presamples, full=False):
    x = _as_points(x, presamples.dim)
    return DiscrepancyParts(
        a2_sites(x, presamples), a3_design(x), presamples.a1() if full else None
    )


def _gram_a3(gram, idx):
    n = idx.shape[0]
    return float(np.sum(gram[np.ix_(idx, idx)]) / (n * n))


def delta_indices(pool, old_idx, new_idx, d_old):
    """Score of ``new_idx`` from the score of ``old_idx`` (both pool-index designs).

    Only the sites that differ between the two multisets contribute ``A2``
    terms; ``A3`` is recomputed from the pool Gram matrix.
    """
    old_idx = np.asarray(old_idx, dtype=np.intp)
    new_idx = np.asarray(new_idx, dtype=np.intp)
    n = old_idx.shape[0]
    if new_idx.shape[0] != n:
        raise ValueError("designs must have the same size")
    c_old, c_new = Counter(old_idx.tolist()), Counter(new_idx.tolist())
    removed = list((c_old - c_new).elements())
    added = list((c_new - c_old).elements())
    if not removed and not added:
        return float(d_old)
    gram = pool.gram
    a = pool.a2
    delta = (
        2.0 / n * (np.sum(a[removed]) - np.sum(a[added]))
        - _gram_a3(gram, old_idx)
        + _gram_a3(gram, new_idx)
    )
    return float(d_old + delta)


def delta_update(x_old, x_new, d_old, pool):
    """Update a (reduced or full) discrepancy after changing some design sites.

    Every site of both designs must belong to ``pool``.
    """
    return delta_indices(pool, pool.index_of(x_old), pool.index_of(x_new), d_old)


def swap_deltas(pool, idx, slot):
    """Score change for replacing ``idx[slot]`` by each pool site, as a vector.

    Entry ``s`` equals ``delta_indices(pool, idx, idx_with_slot_set_to_s, 0)``.
    """
    idx = np.asarray(idx, dtype=np.intp)
    n = idx.shape[0]
    gram = pool.gram
    a = pool.a2
    cur = idx[slot]
    others = np.delete(idx, slot)
    cross_new = gram[:, others].sum(axis=1)
    cross_old = gram[cur, others].sum()
    self_terms = np.diagonal(gram) - gram[cur, cur]
    return (
        2.0 / n * (a[cur] - a)
        + (2.0 * (cross_new - cross_old) + self_terms) / (n * n)
    )


def wrapped_discrepancy(x):
    """Closed-form squared wrapped discrepancy of ``x`` against the uniform law."""
    x = _as_points(x)
    n, d = x.shape
    t = np.abs(x[:, None, :] - x[None, :, :])
    prod = np.prod(1.5 - t * (1.0 - t), axis=2)
    return float(-((4.0 / 3.0) ** d) + np.sum(prod) / (n * n))
