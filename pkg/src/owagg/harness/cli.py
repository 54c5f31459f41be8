"""``owagg`` command line: gen, solve, bounds-table, sweep, export-mip.

Exit codes: 0 success, 2 invalid input, 3 time limit reached without any
feasible solution.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from owagg import __version__
from owagg.core import Criterion, ValidationError
from owagg.generators import InstanceConfig, experiment_configs
from owagg.harness.bounds import bounds_table
from owagg.harness.instance_io import read_instance, write_instance
from owagg.harness.lp_export import export_mip
from owagg.harness.sweep import (
    SweepConfig,
    certificate_violations,
    records_csv,
    run_sweep,
    summary_csv,
    timings_csv,
)
from owagg.solvers import ProblemTooLargeError, Status, parse_method, solve

EXIT_OK, EXIT_INVALID, EXIT_TIMEOUT = 0, 2, 3

log = logging.getLogger("owagg")


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def cmd_gen(args) -> int:
    if args.config:
        by_name = {c.name: c for c in experiment_configs(args.n or 40)}
        if args.config not in by_name:
            raise ValidationError(f"unknown config {args.config!r}; known: {', '.join(by_name)}")
        cfg = by_name[args.config]
    else:
        if args.n is None or args.K is None:
            raise ValidationError("gen needs --config or both --n and --K")
        cfg = InstanceConfig.parse(args.name, args.n, args.K, args.costs, args.weights)
    inst = cfg.build(args.seed)
    write_instance(inst, args.output)
    log.info("wrote %s (n=%d, K=%d)", args.output, inst.n, inst.K)
    return EXIT_OK


def _jsonable(v):
    return None if v is None else float(v)


def cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    method = parse_method(args.method, args.seed, args.restarts)
    report = solve(inst, method, Criterion.parse(args.criterion), args.time_limit)
    out = {
        "instance": inst.name,
        "method": str(args.method),
        "criterion": args.criterion,
        "status": str(report.status),
        "value": _jsonable(report.value),
        "reduced_value": _jsonable(report.reduced_value),
        "reduced_K": report.reduced_K,
        "certificate": _jsonable(report.bound_certificate),
        "nodes": report.nodes_explored,
        "elapsed": report.elapsed,
        "selection": list(report.solution.selection) if report.solution else None,
    }
    print(json.dumps(out, indent=2))
    if report.status is Status.TIME_LIMIT and report.solution is None:
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_bounds_table(args) -> int:
    table = bounds_table(args.K, _ints(args.l), _floats(args.alpha))
    print(table.to_csv() if args.csv else table.format(), end="" if args.csv else "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = SweepConfig.load(args.config)
    if args.workers:
        config = SweepConfig(**{**config.__dict__, "workers": args.workers})
    records = run_sweep(config)
    out = Path(args.output)
    out.write_text(records_csv(records, config.seed))
    out.with_suffix(".summary.csv").write_text(summary_csv(records, config.seed))
    if args.timings:
        out.with_suffix(".timings.csv").write_text(timings_csv(records, config.seed))
    bad = certificate_violations(records)
    for r in bad:
        log.error("certificate violated: %s rep %d K=%d", r.instance, r.repetition, r.target_K)
    log.info("%d records written to %s", len(records), out)
    return EXIT_OK if not bad else 1


def cmd_export_mip(args) -> int:
    export_mip(read_instance(args.instance), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="owagg", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"owagg {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance file")
    g.add_argument("--config", help="named experiment family, e.g. I2_1")
    g.add_argument("--name", default="")
    g.add_argument("--n", type=int)
    g.add_argument("--K", type=int)
    g.add_argument("--costs", default="uniform", help="uniform | nominal:KPRIME")
    g.add_argument("--weights", default="alpha:0.1", help="alpha:A | pcentra:P | pcentra:0.1K")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--method", default="exact",
                   help="exact | baseline | blocks:L[+presort] | kmeans:KBAR")
    s.add_argument("--criterion", default="owa", help="owa | minmax | hurwicz:LAMBDA")
    s.add_argument("--time-limit", type=float, default=60.0)
    s.add_argument("--seed", type=int, default=0, help="K-means seed")
    s.add_argument("--restarts", type=int, default=10, help="K-means restarts")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bounds-table", help="worst-case ratio table for alpha weights")
    b.add_argument("--K", type=int, default=200)
    b.add_argument("--l", default="2,5,10,20,50,100,200")
    b.add_argument("--alpha", default="0.1,0.001,0.000001")
    b.add_argument("--csv", action="store_true")
    b.set_defaults(func=cmd_bounds_table)

    w = sub.add_parser("sweep", help="run an aggregation sweep from a JSON config")
    w.add_argument("--config", required=True)
    w.add_argument("-o", "--output", required=True)
    w.add_argument("--workers", type=int)
    w.add_argument("--timings", action="store_true", help="also write wall-clock times")
    w.set_defaults(func=cmd_sweep)

    e = sub.add_parser("export-mip", help="write the linearised model in LP format")
    e.add_argument("instance")
    e.add_argument("-o", "--output", required=True)
    e.set_defaults(func=cmd_export_mip)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValidationError, ProblemTooLargeError) as exc:
        print(f"owagg: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"owagg: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
