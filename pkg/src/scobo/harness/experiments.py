"""Experiment drivers.

E1  uncertainty of SCO vs sampling-only designs on the Branin EI landscape
E2  GA vs switch algorithm on shared sampler outputs
E3  batch-BO strategies across dimensions (fixed batch size)
E4  batch-BO strategies across batch sizes (fixed dimension)
single-run  one or more batch-BO runs on Branin or GKLS-style functions

Each (cell, replication) produces one JSON record under ``records/``; the
flat ``results.csv`` holds one row per record and cycle (or iteration).
"""

import csv
import functools
import json
import logging
import platform
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .. import __version__
from ..acquisition import ExpectedImprovement, maximize
from ..batch import Strategy, run_strategy
from ..design import initial_design, mesh_design
from ..discrepancy import PreSampleSet, d_full_estimate
from ..gp import GpConfig, fit
from ..optimization import ga_optimize, sa_optimize
from ..sampling import Mode, SamplerParams, generate
from ..testfunctions import branin_function, gkls_suite, suite_manifest
from .config import parse_config

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "experiment",
    "strategy",
    "d",
    "n",
    "rep",
    "cycle",
    "incumbent",
    "ara_component",
    "discrepancy",
    "seconds",
]

def group_name(strategy, n):
    return f"{'S only' if strategy == 'SamplingOnly' else strategy}-{n}"


def _seed(*key):
    return np.random.SeedSequence([int(k) for k in key])


def plan_cells(config):
    """All (cell, replication) tasks of an experiment, in a fixed order."""
    exp = config.experiment
    reps = range(config.replications)
    cells = []
    if exp == "E1-uncertainty":
        for strategy in config.strategies:
            for n in config.batch_sizes:
                for rep in reps:
                    cells.append({"kind": "e1", "strategy": strategy, "d": 2, "n": n, "rep": rep})
    elif exp == "E2-ga-vs-sa":
        for d in config.dimensions:
            for rep in reps:
                cells.append({"kind": "e2", "strategy": "GA+SA", "d": d, "n": config.batch_sizes[0], "rep": rep})
    else:
        if exp == "E4-batch-size-sweep":
            dims, sizes = config.dimensions[:1], config.batch_sizes
        elif exp == "E3-dimension-sweep":
            dims, sizes = config.dimensions, config.batch_sizes[:1]
        else:
            dims, sizes = config.dimensions, config.batch_sizes
        for d in dims:
            for n in sizes:
                for strategy in config.strategies:
                    for rep in reps:
                        cells.append({"kind": "bo", "strategy": strategy, "d": d, "n": n, "rep": rep})
    for c in cells:
        label = group_name(c["strategy"], c["n"]).replace(" ", "_")
        c["id"] = f"d{c['d']}-{label}-rep{c['rep']:03d}"
    return cells


@functools.lru_cache(maxsize=4)
def _branin_ei_setup(config_json):
    config = parse_config(json.loads(config_json))
    f = branin_function()
    x = mesh_design(4, 2)
    y = np.array([f(f.from_unit(z)) for z in x])
    model = fit(x, y, GpConfig(**config.gp.model_dump(), seed=config.master_seed))
    ei = ExpectedImprovement(model)
    budget = config.batch_config(2).maximizer
    x_star, phi_max = maximize(ei, budget, seed=_seed(config.master_seed, 11))
    rng = np.random.default_rng(_seed(config.master_seed, 12))
    u = rng.random((config.reference_presamples, 2))
    reference = PreSampleSet(u, ei(u))
    reference.a1()
    return ei, x_star, phi_max, reference


def _suite(config, d):
    if config.function == "branin":
        return [branin_function()] * config.replications
    g = config.gkls
    return gkls_suite(
        d,
        config.replications,
        seed=config.master_seed,
        n_minima=g.n_minima,
        f_star=g.f_star,
        base_min=g.base_min,
        radius_range=tuple(g.radius_range),
    )


def _run_e1(config, cell):
    ei, x_star, phi_max, reference = _branin_ei_setup(json.dumps(config.echo(), sort_keys=True))
    n, rep, strategy = cell["n"], cell["rep"], cell["strategy"]
    bc = config.batch_config(n)
    m = 1 if strategy == "SamplingOnly" else bc.sampler.m
    params = SamplerParams(bc.sampler.n_min, bc.sampler.n_max, m)
    t0 = time.perf_counter()
    batch, pool, _ = generate(
        ei, n, params, _seed(config.master_seed, 1, n, rep), x_star=x_star, phi_max=phi_max
    )
    if strategy == "SamplingOnly":
        points, own = batch.design_points(0), float(batch.d_scores[0])
    elif bc.optimizer == "GA":
        res = ga_optimize(batch, pool, bc.ga, seed=_seed(config.master_seed, 2, n, rep))
        points, own = res.design, res.score
    else:
        res = sa_optimize(batch, pool)
        points, own = res.design, res.score
    seconds = time.perf_counter() - t0
    return {
        "group": group_name(strategy, n),
        "discrepancy": d_full_estimate(points, reference),
        "d_minus_own": own,
        "design": points.tolist(),
        "modes": {mo.name: sum(1 for x in batch.modes if x == mo) for mo in Mode},
        "pool_size": len(pool),
        "seconds": seconds,
    }


def _trace_dict(trace, a1):
    pop = [
        [float(q) for q in np.quantile(np.asarray(p) + a1, [0.0, 0.25, 0.5, 0.75, 1.0])]
        for p in trace.population
    ]
    return {
        "best": [b + a1 for b in trace.best],
        "evaluations": list(trace.evaluations),
        "population_quantiles": pop,
        "swaps_per_sweep": list(trace.swaps_per_sweep),
        "seconds": trace.seconds,
    }


def e2_instance(config, d, rep):
    """Shared sampler output for one E2 instance: (batch, pool, presamples)."""
    f = _suite(config, d)[rep]
    n = config.batch_sizes[0]
    bc = config.batch_config(n)
    x0 = initial_design(config.n_init or 5 * d, d, seed=_seed(config.master_seed, 21, d, rep))
    y0 = np.array([f(f.from_unit(z)) for z in x0])
    model = fit(x0, y0, GpConfig(**config.gp.model_dump(), seed=config.master_seed + rep))
    ei = ExpectedImprovement(model)
    return generate(ei, n, bc.sampler, _seed(config.master_seed, 22, d, rep), budget=bc.maximizer)


def _run_e2(config, cell):
    d, rep = cell["d"], cell["rep"]
    batch, pool, presamples = e2_instance(config, d, rep)
    a1 = presamples.a1()
    bc = config.batch_config(cell["n"])
    ga = ga_optimize(batch, pool, bc.ga, seed=_seed(config.master_seed, 23, d, rep))
    sa = sa_optimize(batch, pool)
    return {
        "a1": a1,
        "presamples": len(presamples),
        "pool_size": len(pool),
        "initial_scores": [float(s) + a1 for s in batch.d_scores],
        "traces": {"GA": _trace_dict(ga.trace, a1), "SA": _trace_dict(sa.trace, a1)},
    }


def _run_bo(config, cell):
    d, n, rep = cell["d"], cell["n"], cell["rep"]
    f = _suite(config, d)[rep]
    x_init = None
    if config.function == "branin" and config.n_init is None:
        x_init = mesh_design(4, 2)
    seed = int(_seed(config.master_seed, 31, d, rep).generate_state(1)[0])
    record = run_strategy(f, Strategy(cell["strategy"]), config.batch_config(n), seed=seed, x_init=x_init)
    return {"run": record.to_dict()}


_DRIVERS = {"e1": _run_e1, "e2": _run_e2, "bo": _run_bo}


def run_cell(config_echo, cell):
    """Execute one task; returns ``(cell, payload, error)``."""
    config = parse_config(config_echo)
    try:
        return cell, _DRIVERS[cell["kind"]](config, cell), None
    except Exception as exc:  # recorded per cell; the grid continues
        return cell, None, f"{type(exc).__name__}: {exc}\n{traceback.format_exc()}"


def _git_stamp():
    import subprocess

    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
        return out.stdout.strip() or None
    except (OSError, subprocess.SubprocessError):
        return None


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def csv_rows(config, record):
    """Long-format rows for one record."""
    exp = config.experiment
    base = [exp, record["strategy"], record["d"], record["n"], record["rep"]]
    kind = record["kind"]
    if kind == "e1":
        return [base + [0, None, None, record["discrepancy"], record["seconds"]]]
    if kind == "e2":
        rows = []
        for name, tr in record["traces"].items():
            for it, best in enumerate(tr["best"]):
                rows.append([exp, name, record["d"], record["n"], record["rep"], it, None, None, best, None])
        return rows
    run = record["run"]
    f_min = run["f_min"]
    rows = []
    incumbent = min(run["initial_responses"])
    cycles = [(0, incumbent, None, None)] + [
        (c["cycle"], c["incumbent"], c["discrepancy"], sum(c["seconds"].values())) for c in run["cycles"]
    ]
    for cyc, inc, disc, sec in cycles:
        ara = None if not f_min else (inc - f_min) / abs(f_min)
        rows.append(base + [cyc, inc, ara, disc, sec])
    return rows


def run_experiment(config, output_dir=None, workers=None):
    """Run every cell of ``config`` and write manifest, records and CSV files.

    Returns ``(output_dir, failures)`` where ``failures`` lists failed cell ids.
    """
    from .summary import summarize

    out = Path(output_dir) if output_dir else config.resolved_output_dir()
    records_dir = out / "records"
    records_dir.mkdir(parents=True, exist_ok=True)
    digest = config.digest()
    manifest = {
        "manifest_hash": digest,
        "config": config.echo(),
        "version": __version__,
        "git": _git_stamp(),
        "python": platform.python_version(),
        "csv_columns": CSV_COLUMNS,
    }
    if config.experiment in ("E2-ga-vs-sa", "E3-dimension-sweep", "E4-batch-size-sweep", "single-run"):
        manifest["suites"] = {str(d): suite_manifest(_suite(config, d)) for d in config.dimensions}
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)

    cells = plan_cells(config)
    echo = config.echo()
    width = workers or config.workers
    if width > 1:
        with ProcessPoolExecutor(max_workers=width) as pool:
            results = list(pool.map(run_cell, [echo] * len(cells), cells))
    else:
        results = [run_cell(echo, c) for c in cells]

    failures = []
    rows = []
    for cell, payload, error in results:
        if error is not None:
            log.error("cell %s failed: %s", cell["id"], error.splitlines()[0])
            failures.append({"cell": cell["id"], "error": error})
            continue
        record = {
            "manifest_hash": digest,
            "experiment": config.experiment,
            **{k: cell[k] for k in ("id", "kind", "strategy", "d", "n", "rep")},
            **payload,
        }
        with open(records_dir / f"{cell['id']}.json", "w") as fh:
            json.dump(record, fh, indent=1, sort_keys=True)
        rows.extend(csv_rows(config, record))
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
    if failures:
        with open(out / "failures.json", "w") as fh:
            json.dump(failures, fh, indent=2)
    if len(failures) < len(results):
        summarize(out)
    return out, [f["cell"] for f in failures]
