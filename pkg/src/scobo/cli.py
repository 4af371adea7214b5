"""Command-line interface.

    scobo run CONFIG [--output DIR] [--workers N]
    scobo summarize DIR
    scobo validate CONFIG

Exit status: 0 success, 1 validation/usage error, 2 partial failure.
"""

import argparse
import logging
import sys

from .errors import ConfigError
from .harness import SummaryError, load_config, run_experiment, summarize

EXIT_OK, EXIT_INVALID, EXIT_PARTIAL = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="scobo", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment from a YAML config")
    run.add_argument("config")
    run.add_argument("--output", help="output directory (overrides the config)")
    run.add_argument("--workers", type=int, help="worker processes (overrides the config)")
    summ = sub.add_parser("summarize", help="write summary CSVs for a result directory")
    summ.add_argument("directory")
    val = sub.add_parser("validate", help="check a config file")
    val.add_argument("config")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "validate":
            cfg = load_config(args.config)
            print(f"ok: {cfg.experiment}, {cfg.replications} replication(s), digest {cfg.digest()[:12]}")
            return EXIT_OK
        if args.command == "run":
            cfg = load_config(args.config)
            out, failed = run_experiment(cfg, args.output, args.workers)
            print(f"results in {out}")
            if failed:
                print(f"{len(failed)} cell(s) failed: {', '.join(failed)}", file=sys.stderr)
                return EXIT_PARTIAL
            return EXIT_OK
        problems = summarize(args.directory)
        for p in problems:
            print(f"skipped {p}", file=sys.stderr)
        return EXIT_PARTIAL if problems else EXIT_OK
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (SummaryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
