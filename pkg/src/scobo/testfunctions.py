"""Benchmark objectives: Branin and a seeded GKLS-style multimodal generator.

The GKLS-style functions are *not* the original GKLS generator;
they only share its structure.  On ``[-1, 1]^d`` a paraboloid
``q(x) = |x - T|^2 + t`` is modified inside ``M`` disjoint balls.  Inside
ball ``i`` (center ``c_i``, radius ``rho_i``, bottom value ``f_i < t``)::

    f(x) = (1 - b(r)) q(x) + b(r) f_i,    r = |x - c_i| / rho_i,
    b(r) = (1 - r^2)^3

so ``f(c_i) = f_i`` exactly, ``f >= f_i`` in the ball, and ``f`` joins ``q``
with matching value, gradient and curvature on the sphere.  Ball 0 holds the
global minimum ``f_star``; the other bottoms are drawn strictly above it.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import GeneratorError

__all__ = [
    "ObjectiveFunction",
    "branin",
    "branin_function",
    "BRANIN_MINIMUM",
    "BRANIN_MINIMIZERS",
    "GklsStyleSpec",
    "gkls_style",
    "gkls_suite",
    "suite_manifest",
]

BRANIN_MINIMUM = 0.397887357729739
BRANIN_MINIMIZERS = ((-math.pi, 12.275), (math.pi, 2.275), (9.42478, 2.475))


@dataclass
class ObjectiveFunction:
    """A deterministic objective on a box, evaluated in original coordinates."""

    name: str
    dim: int
    bounds: np.ndarray  # shape (d, 2)
    func: object = field(repr=False)
    known_minimum: tuple = None  # (f_min, location)
    spec: object = field(default=None, repr=False)

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=float).reshape(self.dim, 2)
        if not np.all(np.isfinite(self.bounds)) or np.any(self.bounds[:, 0] >= self.bounds[:, 1]):
            raise ValueError("bounds must be finite with lower < upper")

    def __call__(self, x):
        return float(self.func(np.asarray(x, dtype=float)))

    def to_unit(self, x):
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        return (np.asarray(x, dtype=float) - lo) / (hi - lo)

    def from_unit(self, z):
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        return lo + np.asarray(z, dtype=float) * (hi - lo)


def branin(x):
    """Branin function on ``[-5, 10] x [0, 15]``."""
    x1, x2 = float(x[0]), float(x[1])
    b = 5.1 / (4.0 * math.pi**2)
    c = 5.0 / math.pi
    t = 1.0 / (8.0 * math.pi)
    return (x2 - b * x1**2 + c * x1 - 6.0) ** 2 + 10.0 * (1.0 - t) * math.cos(x1) + 10.0


def branin_function():
    return ObjectiveFunction(
        name="branin",
        dim=2,
        bounds=[[-5.0, 10.0], [0.0, 15.0]],
        func=branin,
        known_minimum=(BRANIN_MINIMUM, np.array(BRANIN_MINIMIZERS[1])),
    )


@dataclass(frozen=True)
class GklsStyleSpec:
    dim: int
    n_minima: int = 10
    f_star: float = -1.0
    base_min: float = 0.0
    radius_range: tuple = (0.05, 0.10)  # fractions of the domain diagonal
    seed: int = 0
    max_placement_tries: int = 10_000


class _GklsStyle:
    def __init__(self, vertex, base_min, centers, radii, bottoms):
        self.vertex = vertex
        self.base_min = base_min
        self.centers = centers
        self.radii = radii
        self.bottoms = bottoms

    def base(self, x):
        return float(np.sum((x - self.vertex) ** 2) + self.base_min)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        q = self.base(x)
        r2 = np.sum((self.centers - x) ** 2, axis=1) / self.radii**2
        inside = np.flatnonzero(r2 < 1.0)
        if inside.size == 0:
            return q
        i = int(inside[0])
        b = (1.0 - r2[i]) ** 3
        return (1.0 - b) * q + b * float(self.bottoms[i])


def gkls_style(spec):
    """Build a GKLS-style function on ``[-1, 1]^d`` from ``spec``."""
    d = spec.dim
    if not spec.f_star < spec.base_min:
        raise ValueError("f_star must lie below the paraboloid minimum")
    if spec.n_minima < 1:
        raise ValueError("need at least one minimum")
    rng = np.random.default_rng(spec.seed)
    diag = 2.0 * math.sqrt(d)
    lo_r, hi_r = spec.radius_range
    vertex = rng.uniform(-1.0, 1.0, d)
    radii = rng.uniform(lo_r * diag, hi_r * diag, spec.n_minima)
    centers = np.empty((spec.n_minima, d))
    for i in range(spec.n_minima):
        for _ in range(spec.max_placement_tries):
            c = rng.uniform(-1.0, 1.0, d)
            gaps = np.linalg.norm(centers[:i] - c, axis=1) - radii[:i] - radii[i]
            if np.all(gaps > 0):
                centers[i] = c
                break
        else:
            raise GeneratorError(
                f"could not place basin {i} of {spec.n_minima}; reduce n_minima or radii"
            )
    gap = 0.1 * (spec.base_min - spec.f_star)
    bottoms = np.empty(spec.n_minima)
    bottoms[0] = spec.f_star
    if spec.n_minima > 1:
        bottoms[1:] = rng.uniform(spec.f_star + gap, spec.base_min - gap, spec.n_minima - 1)
    fn = _GklsStyle(vertex, spec.base_min, centers, radii, bottoms)
    return ObjectiveFunction(
        name=f"gkls-d{d}-s{spec.seed}",
        dim=d,
        bounds=[[-1.0, 1.0]] * d,
        func=fn,
        known_minimum=(float(spec.f_star), centers[0].copy()),
        spec=spec,
    )


def gkls_suite(dim, count, seed=0, **kwargs):
    """``count`` GKLS-style functions with consecutive derived seeds."""
    seeds = np.random.SeedSequence([seed, dim]).generate_state(count)
    return [gkls_style(GklsStyleSpec(dim=dim, seed=int(s), **kwargs)) for s in seeds]


def suite_manifest(functions):
    """JSON-serializable reproducibility manifest of a generated suite."""
    out = []
    for f in functions:
        entry = {"name": f.name, "dim": f.dim, "bounds": f.bounds.tolist()}
        if f.spec is not None:
            entry["spec"] = asdict(f.spec)
        if f.known_minimum is not None:
            entry["f_min"] = f.known_minimum[0]
            entry["argmin"] = np.asarray(f.known_minimum[1]).tolist()
        out.append(entry)
    return json.loads(json.dumps(out))
