"""Batch Bayesian optimization loop for SCO and the comparison strategies."""

import time
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from . import gp as gp_mod
from .acquisition import ExpectedImprovement, MaximizerBudget, UniformAcquisition, maximize
from .design import initial_design
from .errors import AraUndefinedError, DegenerateAcquisitionError, DistinctSiteShortageError
from .optimization import GaParams, ga_optimize, sa_optimize
from .sampling import Mode, SamplerParams, generate

__all__ = [
    "Strategy",
    "BatchConfig",
    "CycleRecord",
    "RunRecord",
    "run_strategy",
    "compute_ara",
    "ara_trajectory",
]

OMITTED_BASELINES = ("MPSK",)


class Strategy(str, Enum):
    SCO = "SCO"
    SAMPLING_ONLY = "SamplingOnly"
    KB = "KB"
    CLMIN = "CLMin"


@dataclass(frozen=True)
class BatchConfig:
    batch_size: int = 5
    cycles: int = 5
    n_init: int = None  # default 5 * d
    sampler: SamplerParams = SamplerParams()
    gp: gp_mod.GpConfig = gp_mod.GpConfig()
    maximizer: MaximizerBudget = MaximizerBudget()
    optimizer: str = "SA"
    ga: GaParams = GaParams()


@dataclass
class CycleRecord:
    cycle: int
    batch: list
    responses: list
    incumbent: float
    discrepancy: float = None
    phi_max: float = None
    modes: dict = field(default_factory=dict)
    seconds: dict = field(default_factory=dict)
    events: list = field(default_factory=list)


@dataclass
class RunRecord:
    strategy: str
    seed: int
    function: str
    dim: int
    batch_size: int
    f_min: float = None
    initial_design: list = field(default_factory=list)
    initial_responses: list = field(default_factory=list)
    cycles: list = field(default_factory=list)
    n_evaluations: int = 0
    omitted_baselines: list = field(default_factory=lambda: list(OMITTED_BASELINES))

    @property
    def initial_incumbent(self):
        return float(min(self.initial_responses))

    def incumbents(self):
        """Incumbent after the initial design and after each cycle."""
        return [self.initial_incumbent] + [c.incumbent for c in self.cycles]

    @property
    def y_min(self):
        return self.incumbents()[-1]

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["cycles"] = [CycleRecord(**c) for c in data.get("cycles", [])]
        return cls(**data)


class _CountingObjective:
    def __init__(self, f):
        self.f = f
        self.count = 0

    def __call__(self, z):
        self.count += 1
        return self.f(self.f.from_unit(z))


def _sub_seed(ss, *key):
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + key)


def _int_seed(ss):
    return int(ss.generate_state(1)[0])


def _sco_batch(ctx, n, config, x_star, phi_max, seeds, strategy, rec):
    m = 1 if strategy is Strategy.SAMPLING_ONLY else config.sampler.m
    params = SamplerParams(config.sampler.n_min, config.sampler.n_max, m)
    t0 = time.perf_counter()
    try:
        batch, pool, _ = generate(ctx, n, params, seeds["sample"], x_star=x_star, phi_max=phi_max)
    except (DegenerateAcquisitionError, DistinctSiteShortageError) as exc:
        # EI vanishes on (almost) all of U: spread the batch uniformly around x*
        rec.events.append(f"degenerate-acquisition ({type(exc).__name__}): uniform target used")
        batch, pool, _ = generate(
            UniformAcquisition(ctx.dim), n, params, seeds["sample"], x_star=x_star, phi_max=1.0
        )
    rec.seconds["sample"] = time.perf_counter() - t0
    rec.modes = {mode.name: sum(1 for x in batch.modes if x == mode) for mode in Mode}
    t0 = time.perf_counter()
    if strategy is Strategy.SAMPLING_ONLY:
        points, score = batch.design_points(0), float(batch.d_scores[0])
    elif config.optimizer.upper() == "GA":
        res = ga_optimize(batch, pool, config.ga, seed=seeds["optimize"])
        points, score = res.design, res.score
    else:
        res = sa_optimize(batch, pool)
        points, score = res.design, res.score
    rec.seconds["optimize"] = time.perf_counter() - t0
    rec.discrepancy = score
    return points


def _fantasy_batch(model, n, config, x_star, seeds, strategy, rec):
    t0 = time.perf_counter()
    points = [x_star]
    current = model
    y_seen = list(model.y_original)
    for j in range(1, n):
        x_prev = points[-1]
        if strategy is Strategy.KB:
            lie = gp_mod.predict(current, x_prev)[0]
        else:
            lie = float(np.min(model.y_original))
        current = gp_mod.fantasy_update(current, x_prev, lie)
        y_seen.append(lie)
        ctx = ExpectedImprovement(current, y_best=min(y_seen))
        x_j, _ = maximize(ctx, config.maximizer, seed=_sub_seed(seeds["fantasy"], j))
        points.append(x_j)
    rec.seconds["fantasy"] = time.perf_counter() - t0
    return np.array(points)


def run_strategy(f, strategy, config=None, seed=0, x_init=None):
    """Run one batch-BO experiment on objective ``f``.

    All modeling and sampling happen in the unit cube; ``f`` is evaluated in
    its original coordinates.  ``x_init`` (unit-cube points) overrides the
    default space-filling initial design.
    """
    strategy = Strategy(strategy)
    config = config or BatchConfig()
    d = f.dim
    n = config.batch_size
    if n < 1 or config.cycles < 0:
        raise ValueError("batch_size must be >= 1 and cycles >= 0")
    ss = np.random.SeedSequence(seed)
    if x_init is None:
        n_init = config.n_init if config.n_init is not None else 5 * d
        if n_init < d + 2:
            raise ValueError("n_init must be at least d + 2")
        x_init = initial_design(n_init, d, seed=_sub_seed(ss, 0))
    x_data = np.atleast_2d(np.asarray(x_init, dtype=float))
    obj = _CountingObjective(f)
    y_data = np.array([obj(z) for z in x_data])
    record = RunRecord(
        strategy=strategy.value,
        seed=int(seed),
        function=f.name,
        dim=d,
        batch_size=n,
        f_min=None if f.known_minimum is None else float(f.known_minimum[0]),
        initial_design=f.from_unit(x_data).tolist(),
        initial_responses=y_data.tolist(),
    )
    incumbent = float(np.min(y_data))
    for cycle in range(1, config.cycles + 1):
        cs = _sub_seed(ss, 1, cycle)
        seeds = {
            "gp": _int_seed(_sub_seed(cs, 0)),
            "maximize": _sub_seed(cs, 1),
            "sample": _sub_seed(cs, 2),
            "optimize": _sub_seed(cs, 3),
            "fantasy": _sub_seed(cs, 4),
        }
        rec = CycleRecord(cycle=cycle, batch=[], responses=[], incumbent=incumbent)
        t0 = time.perf_counter()
        gp_config = gp_mod.GpConfig(**{**asdict(config.gp), "seed": seeds["gp"]})
        model = gp_mod.fit(x_data, y_data, gp_config)
        rec.seconds["fit"] = time.perf_counter() - t0
        ctx = ExpectedImprovement(model)
        t0 = time.perf_counter()
        x_star, phi_max = maximize(ctx, config.maximizer, seed=seeds["maximize"])
        rec.seconds["maximize"] = time.perf_counter() - t0
        rec.phi_max = phi_max
        if n == 1:
            batch = x_star[None, :]
        elif strategy in (Strategy.SCO, Strategy.SAMPLING_ONLY):
            batch = _sco_batch(ctx, n, config, x_star, phi_max, seeds, strategy, rec)
        else:
            batch = _fantasy_batch(model, n, config, x_star, seeds, strategy, rec)
        t0 = time.perf_counter()
        responses = np.array([obj(z) for z in batch])
        rec.seconds["evaluate"] = time.perf_counter() - t0
        x_data = np.vstack([x_data, batch])
        y_data = np.concatenate([y_data, responses])
        incumbent = min(incumbent, float(np.min(responses)))
        rec.batch = f.from_unit(batch).tolist()
        rec.responses = responses.tolist()
        rec.incumbent = incumbent
        record.cycles.append(rec)
    record.n_evaluations = obj.count
    return record


def _relative(y_min, f_min):
    if f_min == 0:
        raise AraUndefinedError("relative accuracy undefined for f_min = 0")
    return (y_min - f_min) / abs(f_min)


def compute_ara(records, suite):
    """Average relative accuracy of the final incumbents over a function suite."""
    if len(records) != len(suite) or not records:
        raise ValueError("need exactly one record per function")
    total = 0.0
    for rec, f in zip(records, suite):
        if f.known_minimum is None:
            raise AraUndefinedError(f"{f.name} has no known minimum")
        total += _relative(rec.y_min, float(f.known_minimum[0]))
    return total / len(records)


def ara_trajectory(records, suite):
    """ARA after the initial design and after every cycle."""
    if len(records) != len(suite) or not records:
        raise ValueError("need exactly one record per function")
    curves = np.array(
        [[_relative(y, float(f.known_minimum[0])) for y in r.incumbents()] for r, f in zip(records, suite)]
    )
    return curves.mean(axis=0)
