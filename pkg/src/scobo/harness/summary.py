"""Plot-ready summaries of an experiment directory.

Pure transformation of stored records; no models are refit.  Output files:

``summary.csv``      per-group quartiles (boxplot data)
``ara_curves.csv``   mean relative accuracy per cycle (batch-BO experiments)
``convergence.csv``  per-iteration optimizer traces (GA vs SA experiment)
"""

import csv
import json
from collections import defaultdict
from pathlib import Path

import numpy as np

from ..errors import ScoError
from .experiments import group_name

SUMMARY_COLUMNS = ["experiment", "group", "strategy", "d", "n", "metric", "count", "min", "q1", "median", "q3", "max"]
ARA_COLUMNS = ["experiment", "strategy", "d", "n", "cycle", "ara", "count"]
CONVERGENCE_COLUMNS = [
    "d", "rep", "optimizer", "iteration", "evaluations", "best",
    "pop_min", "pop_q1", "pop_median", "pop_q3", "pop_max",
]


class SummaryError(ScoError):
    pass


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def _stats(values):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return [0, None, None, None, None, None]
    q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0])
    return [int(v.size)] + [float(x) for x in q]


def load_records(directory):
    """Manifest, valid records (sorted by id) and a list of problems."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        raise SummaryError(f"{directory} has no manifest.json")
    try:
        manifest = json.loads(manifest_path.read_text())
        digest = manifest["manifest_hash"]
    except (ValueError, KeyError) as exc:
        raise SummaryError(f"corrupt manifest: {exc}") from None
    files = sorted((directory / "records").glob("*.json"))
    if not files:
        raise SummaryError(f"{directory} contains no records")
    records, problems = [], []
    for path in files:
        try:
            rec = json.loads(path.read_text())
            rec["kind"], rec["id"]
        except (ValueError, KeyError, TypeError) as exc:
            problems.append(f"{path.name}: {exc}")
            continue
        if rec.get("manifest_hash") != digest:
            raise SummaryError(f"{path.name} belongs to a different manifest; refusing mixed directory")
        records.append(rec)
    if (directory / "failures.json").is_file():
        for f in json.loads((directory / "failures.json").read_text()):
            problems.append(f"{f['cell']}: failed during run")
    return manifest, records, problems


def summarize(directory):
    """Write summary files into ``directory``; returns the list of skipped items."""
    directory = Path(directory)
    manifest, records, problems = load_records(directory)
    experiment = manifest["config"]["experiment"]
    groups = defaultdict(list)
    curves = defaultdict(list)
    convergence = []
    for rec in records:
        kind = rec["kind"]
        if kind == "e1":
            groups[(rec["group"], rec["strategy"], rec["d"], rec["n"], "discrepancy")].append(rec["discrepancy"])
        elif kind == "e2":
            sa_final = rec["traces"]["SA"]["best"][-1]
            level = sa_final + 0.01 * abs(sa_final)
            for name, tr in rec["traces"].items():
                key = f"{name}-d{rec['d']}"
                groups[(key, name, rec["d"], rec["n"], "final_score")].append(tr["best"][-1])
                reach = next((e for b, e in zip(tr["best"], tr["evaluations"]) if b <= level), float("inf"))
                groups[(key, name, rec["d"], rec["n"], "evaluations_to_1pct_of_sa")].append(reach)
                pops = tr["population_quantiles"] or [[None] * 5] * len(tr["best"])
                for it, (best, ev) in enumerate(zip(tr["best"], tr["evaluations"])):
                    pq = pops[it] if it < len(pops) else [None] * 5
                    convergence.append([rec["d"], rec["rep"], name, it, ev, best] + list(pq))
        else:
            run = rec["run"]
            incs = [min(run["initial_responses"])] + [c["incumbent"] for c in run["cycles"]]
            key = (group_name(rec["strategy"], rec["n"]), rec["strategy"], rec["d"], rec["n"])
            groups[key + ("final_incumbent",)].append(incs[-1])
            f_min = run.get("f_min")
            if f_min:
                rel = [(y - f_min) / abs(f_min) for y in incs]
                groups[key + ("final_ara_component",)].append(rel[-1])
                curves[(rec["strategy"], rec["d"], rec["n"])].append(rel)

    rows = [[experiment, *k[:4], k[4], *_stats(v)] for k, v in sorted(groups.items(), key=lambda kv: str(kv[0]))]
    _write(directory / "summary.csv", SUMMARY_COLUMNS, rows)
    if curves:
        ara_rows = []
        for (strategy, d, n), rels in sorted(curves.items()):
            length = min(len(r) for r in rels)
            mean = np.mean([r[:length] for r in rels], axis=0)
            for cycle, a in enumerate(mean):
                ara_rows.append([experiment, strategy, d, n, cycle, float(a), len(rels)])
        _write(directory / "ara_curves.csv", ARA_COLUMNS, ara_rows)
    if convergence:
        _write(directory / "convergence.csv", CONVERGENCE_COLUMNS, convergence)
    return problems
