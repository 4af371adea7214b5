"""Candidate batch generation by adaptive rejection sampling with an SIR fallback.

One call to :func:`generate` draws a pre-sample set ``U`` once, evaluates the
acquisition on it once, and then produces ``m`` anchored candidate designs
from it:

* rejection factors ``lambda_i = v_i * phi_max / phi_i`` are redrawn for each
  design; when at least ``n - 1`` of them are ``<= 1`` the ``n - 1`` smallest
  are kept (a valid sub-sample, since accepted ``lambda`` is uniform and
  independent of location);
* otherwise the accepted points are kept and ``U`` grows one uniform point
  at a time until the design fills or ``|U|`` reaches ``n_max``;
* once ``|U| >= n_max`` every remaining slot is filled by importance
  resampling of ``U`` with weights ``phi_i / S_phi``.

``A2`` values are computed once per distinct site against the final ``U``,
so all cached values refer to the same Monte-Carlo nodes.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import acquisition as acq_mod
from .discrepancy import CandidatePool, PreSampleSet, a2_sites, d_minus
from .errors import DegenerateAcquisitionError, DistinctSiteShortageError

__all__ = [
    "Mode",
    "SamplerParams",
    "CandidateBatch",
    "generate",
    "lambda_screen",
    "rejection_factors",
    "sir_resample",
]

# named sub-streams of one generate() seed
_PRESAMPLE, _MAXIMIZE, _SCREEN, _SIR = range(4)


class Mode(IntEnum):
    RS_SUBSAMPLE = 0
    RS_SEQUENTIAL = 1
    SIR = 2


@dataclass(frozen=True)
class SamplerParams:
    n_min: int = None  # default 1000 * d
    n_max: int = None  # default 10 * n_min
    m: int = 50

    def resolve(self, d):
        n_min = self.n_min if self.n_min is not None else 1000 * d
        n_max = self.n_max if self.n_max is not None else 10 * n_min
        return n_min, n_max, self.m


@dataclass
class CandidateBatch:
    """``m`` candidate designs stored as rows of pool indices (column 0 is x*)."""

    designs: np.ndarray
    d_scores: np.ndarray
    modes: list
    pool: CandidatePool

    @property
    def m(self):
        return self.designs.shape[0]

    @property
    def n(self):
        return self.designs.shape[1]

    def design_points(self, k):
        return self.pool.sites[self.designs[k]]

    def best(self):
        k = int(np.argmin(self.d_scores))
        return k, self.designs[k].copy(), float(self.d_scores[k])


def _stream(seed_seq, name, k=0):
    return np.random.default_rng(
        np.random.SeedSequence(seed_seq.entropy, spawn_key=tuple(seed_seq.spawn_key) + (name, k))
    )


def _as_rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def rejection_factors(phi, v, phi_max):
    """``v * phi_max / phi`` with ``+inf`` where ``phi == 0``."""
    phi = np.asarray(phi, dtype=float)
    if not phi_max > 0:
        raise DegenerateAcquisitionError("phi_max must be positive")
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(phi > 0, np.asarray(v) * phi_max / np.where(phi > 0, phi, 1.0), np.inf)


def _screen(phi, phi_max, k, v, excluded=()):
    lam = rejection_factors(phi, v, phi_max)
    if len(excluded):
        lam[list(excluded)] = np.inf
    order = np.argsort(lam, kind="stable")
    tail = float(lam[order[k - 1]]) if len(lam) >= k else np.inf
    if tail <= 1.0:
        return order[:k], tail, lam
    return np.flatnonzero(lam <= 1.0), tail, lam


def lambda_screen(presamples, phi_max, n, seed=None):
    """Screen the pre-samples with fresh uniforms ``v``.

    Returns the ``n - 1`` indices with the smallest rejection factor when the
    ``(n-1)``-th smallest is ``<= 1``, otherwise every index with factor
    ``<= 1``; the second value is that ``(n-1)``-th smallest factor.
    """
    if n - 1 < 1:
        raise ValueError("n must be at least 2")
    if np.max(presamples.phi, initial=0.0) > phi_max * (1 + 1e-9) + 1e-300:
        raise ValueError("phi_max is below the largest cached acquisition value")
    rng = _as_rng(seed)
    v = rng.random(len(presamples))
    accepted, tail, _ = _screen(presamples.phi, phi_max, n - 1, v)
    return accepted, tail


def sir_resample(presamples, count, seed=None, exclude=()):
    """Draw ``count`` distinct indices with probability proportional to ``phi``.

    Draws are with replacement; a repeated or excluded index is redrawn.
    After ``100 * count`` redraws the remaining indices are drawn without
    replacement from the untaken positive-weight sites, so the call fails only
    when fewer than ``count`` such sites exist.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if not presamples.s_phi > 0:
        raise DegenerateAcquisitionError("acquisition is zero on every pre-sample")
    rng = _as_rng(seed)
    phi = presamples.phi
    exclude = set(int(i) for i in exclude)
    eligible = np.count_nonzero(phi > 0) - sum(1 for i in exclude if phi[i] > 0)
    if eligible < count:
        raise DistinctSiteShortageError(
            f"only {eligible} eligible sites with positive weight, need {count}"
        )
    cdf = np.cumsum(phi)
    total = cdf[-1]

    def draw(size):
        idx = np.searchsorted(cdf, rng.random(size) * total, side="right")
        return np.minimum(idx, len(cdf) - 1)

    chosen = []
    taken = set(exclude)
    redraws = 0
    for i in draw(count):
        i = int(i)
        while i in taken and redraws <= 100 * count:
            redraws += 1
            i = int(draw(1)[0])
        if i in taken:
            break
        taken.add(i)
        chosen.append(i)
    if len(chosen) < count:
        free = np.flatnonzero(phi > 0)
        free = free[~np.isin(free, list(taken))]
        p = phi[free] / np.sum(phi[free])
        chosen += rng.choice(free, count - len(chosen), replace=False, p=p).tolist()
    return np.array(chosen, dtype=np.intp)


class _Growth:
    """Uniform proposals for sequential growth, evaluated in vectorized chunks.

    Points are handed out one at a time; :meth:`flush` appends evaluated but
    unused points to ``U`` so every acquisition evaluation belongs to ``U``.
    Chunks never take ``|U|`` beyond ``n_max``.
    """

    def __init__(self, acq, rng, presamples, n_max, chunk=512):
        self.acq, self.rng, self.presamples = acq, rng, presamples
        self.n_max, self.chunk = n_max, chunk
        self.points = np.empty((0, presamples.dim))
        self.phi = np.empty(0)
        self.pos = 0

    def next(self):
        if self.pos == len(self.phi):
            size = min(self.chunk, self.n_max - len(self.presamples))
            self.points = self.rng.random((size, self.presamples.dim))
            self.phi = np.asarray(self.acq(self.points), dtype=float)
            self.pos = 0
        i = self.pos
        self.pos += 1
        return self.points[i], float(self.phi[i])

    def flush(self):
        for i in range(self.pos, len(self.phi)):
            self.presamples.append(self.points[i], float(self.phi[i]))
        self.pos = len(self.phi)


def generate(acq, n, params=None, seed=None, *, x_star=None, phi_max=None, budget=None):
    """Sample ``m`` anchored candidate designs of size ``n`` from ``acq``.

    ``acq`` is any vectorized acquisition with a ``dim`` attribute.  When
    ``x_star``/``phi_max`` are not supplied they come from
    :func:`scobo.acquisition.maximize`.

    Returns ``(batch, pool, presamples)``.
    """
    if n < 2:
        raise ValueError("batch size must be at least 2")
    params = params or SamplerParams()
    d = acq.dim
    n_min, n_max, m = params.resolve(d)
    if not 2 <= n_min <= n_max:
        raise ValueError(f"need 2 <= n_min <= n_max, got {n_min}, {n_max}")
    if m < 1:
        raise ValueError("m must be positive")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)

    rng_pre = _stream(ss, _PRESAMPLE)
    u0 = rng_pre.random((n_min, d))
    presamples = PreSampleSet(u0, acq(u0), n_min=n_min, n_max=n_max)

    if x_star is None:
        x_star, phi_max = acq_mod.maximize(acq, budget, seed=_stream(ss, _MAXIMIZE))
    x_star = np.asarray(x_star, dtype=float).ravel()
    phi_max = float(phi_max) if phi_max is not None else acq_mod.evaluate(acq, x_star)

    excluded = set()
    top = float(np.max(presamples.phi))
    if top > phi_max:
        # the maximizer missed a better pre-sample: it becomes x*
        i = int(np.argmax(presamples.phi))
        x_star, phi_max = presamples.points[i].copy(), top
        excluded.add(i)
    if not phi_max > 0:
        raise DegenerateAcquisitionError("acquisition is zero at every probe and pre-sample")

    growth = _Growth(acq, rng_pre, presamples, n_max)
    rows, modes = [], []
    for k in range(m):
        rng_k = _stream(ss, _SCREEN, k)
        if len(presamples) < n_max:
            v = rng_k.random(len(presamples))
            accepted, tail, _ = _screen(presamples.phi, phi_max, n - 1, v, excluded)
            if tail <= 1.0:
                rows.append([int(i) for i in accepted])
                modes.append(Mode.RS_SUBSAMPLE)
                continue
            chosen = [int(i) for i in accepted]
            mode = Mode.RS_SEQUENTIAL
            while len(chosen) < n - 1 and len(presamples) < n_max:
                u, phi_n = growth.next()
                idx = presamples.append(u, phi_n)
                if rng_k.random() * phi_max <= phi_n and phi_n > 0:
                    chosen.append(idx)
            if len(chosen) < n - 1:
                mode = Mode.SIR
                chosen += sir_resample(
                    presamples, n - 1 - len(chosen), _stream(ss, _SIR, k), excluded | set(chosen)
                ).tolist()
            rows.append(chosen)
            modes.append(mode)
        else:
            rows.append(sir_resample(presamples, n - 1, _stream(ss, _SIR, k), excluded).tolist())
            modes.append(Mode.SIR)

    growth.flush()
    if not presamples.s_phi > 0:
        raise DegenerateAcquisitionError("acquisition is zero on every pre-sample")

    # pool: x* first, then pre-sample sites in order of first appearance
    order = {}
    for row in rows:
        for i in row:
            order.setdefault(i, len(order) + 1)
    u_idx = np.fromiter(order.keys(), dtype=np.intp, count=len(order))
    sites = np.vstack([x_star[None, :], presamples.points[u_idx]])
    pool = CandidatePool(sites, a2_sites(sites, presamples))
    designs = np.array([[0] + [order[i] for i in row] for row in rows], dtype=np.intp)
    scores = np.array([d_minus(sites[r], pool.a2[r]) for r in designs])
    return CandidateBatch(designs, scores, modes, pool), pool, presamples
