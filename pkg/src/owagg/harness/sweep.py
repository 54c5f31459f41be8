"""Aggregation sweep: exact, baseline, block and K-means solves over a K-bar grid.

Output is a tidy CSV sorted by (instance, method, K-bar, repetition).  Wall
clock times go to a separate file so that the main CSV is byte-identical
between runs with the same seed.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from owagg import __version__
from owagg.core import ValidationError
from owagg.generators import InstanceConfig, experiment_configs
from owagg.solvers import (
    Blocks,
    KMeans,
    SolveReport,
    Status,
    solve_aggregated,
    solve_baseline,
    solve_bnb,
)

CSV_VERSION = 1
_METHOD_ORDER = {"exact": 0, "baseline": 1, "blocks": 2, "kmeans": 3}


@dataclass(frozen=True)
class SweepRecord:
    instance: str
    repetition: int
    seed: int
    method: str
    target_K: int
    reduced_K: int
    value: float | None
    reduced_value: float | None
    certificate: float | None
    status: str
    nodes: int
    elapsed: float

    def sort_key(self):
        return (self.instance, _METHOD_ORDER[self.method], self.target_K, self.repetition)


@dataclass(frozen=True)
class SweepConfig:
    instances: tuple[InstanceConfig, ...]
    kbar_grid: tuple[int, ...]
    repetitions: int = 20
    time_limit: float = 60.0
    seed: int = 0
    restarts: int = 10
    workers: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        """Parse the JSON config layout described in the README."""
        if "instances" in d:
            insts = [
                InstanceConfig.parse(e["name"], int(e["n"]), int(e["K"]),
                                     e.get("costs", "uniform"), e.get("weights", "alpha:0.1"))
                for e in d["instances"]
            ]
        elif d.get("preset") == "experiment":
            Ks = set(d.get("K", [50, 200]))
            insts = [c for c in experiment_configs(int(d.get("n", 40))) if c.K in Ks]
        else:
            raise ValidationError("sweep config needs 'instances' or preset 'experiment'")
        if not insts:
            raise ValidationError("sweep config selects no instances")
        grid = tuple(int(k) for k in d.get("kbar_grid", [1, 2, 5, 10, 25, 50]))
        return cls(
            tuple(insts), grid, int(d.get("repetitions", 20)), float(d.get("time_limit", 60.0)),
            int(d.get("seed", 0)), int(d.get("restarts", 10)), int(d.get("workers", 1)),
        )

    @classmethod
    def load(cls, path) -> "SweepConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad sweep config {path}: {exc}") from None


def instance_seed(seed: int, config_index: int, repetition: int) -> int:
    return int(np.random.SeedSequence([seed, config_index, repetition]).generate_state(1)[0])


def _num(v):
    return None if v is None else float(v)


def _record(cfg, rep, seed, method, target_K, r: SolveReport, certificate=None) -> SweepRecord:
    reduced = r.reduced_value if r.reduced_value is not None else r.value
    cert = r.bound_certificate if certificate is None else certificate
    return SweepRecord(
        cfg.name, rep, seed, method, target_K, r.reduced_K or cfg.K, _num(r.value),
        _num(reduced), _num(cert), str(r.status), r.nodes_explored, r.elapsed,
    )


def run_cell(cfg: InstanceConfig, rep: int, seed: int, kbar_grid, time_limit: float,
             restarts: int) -> list[SweepRecord]:
    """All solves for one generated instance."""
    inst = cfg.build(seed)
    exact = solve_bnb(inst, time_limit=time_limit)
    out = [_record(cfg, rep, seed, "exact", cfg.K, exact, certificate=1.0)]
    out.append(_record(cfg, rep, seed, "baseline", 1, solve_baseline(inst, time_limit)))
    for kbar in kbar_grid:
        if not 1 <= kbar <= cfg.K:
            continue
        l = math.ceil(cfg.K / kbar)
        out.append(_record(cfg, rep, seed, "blocks", kbar,
                           solve_aggregated(inst, Blocks(l), time_limit)))
        out.append(_record(cfg, rep, seed, "kmeans", kbar,
                           solve_aggregated(inst, KMeans(kbar, seed, restarts), time_limit)))
    return out


def run_sweep(config: SweepConfig) -> list[SweepRecord]:
    """Run every (instance family, repetition) cell; records come back sorted."""
    jobs = [
        (cfg, rep, instance_seed(config.seed, ci, rep), config.kbar_grid,
         config.time_limit, config.restarts)
        for ci, cfg in enumerate(config.instances)
        for rep in range(config.repetitions)
    ]
    records: list[SweepRecord] = []
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            for recs in pool.map(run_cell, *zip(*jobs)):
                records += recs
    else:
        for job in jobs:
            records += run_cell(*job)
    return sorted(records, key=SweepRecord.sort_key)


def certificate_violations(records, rel_tol: float = 1e-9) -> list[SweepRecord]:
    """Block records whose value exceeds certificate * exact value (both optimal)."""
    exact = {
        (r.instance, r.repetition): r.value
        for r in records
        if r.method == "exact" and r.status == Status.OPTIMAL.value
    }
    bad = []
    for r in records:
        if r.method != "blocks" or r.status != Status.OPTIMAL.value:
            continue
        opt = exact.get((r.instance, r.repetition))
        if opt is not None and r.value > r.certificate * opt + rel_tol * max(1.0, opt):
            bad.append(r)
    return bad


@dataclass(frozen=True)
class SummaryRow:
    instance: str
    method: str
    target_K: int
    reduced_K: int
    runs: int
    optimal_runs: int
    mean_value: float
    mean_reduced_value: float
    mean_nodes: float


def summarize(records) -> list[SummaryRow]:
    """Mean over repetitions per (instance, method, target K-bar).

    Runs without a solution are left out of the means; ``optimal_runs``
    tells how many of the averaged runs were proven optimal.
    """
    groups: dict[tuple, list[SweepRecord]] = {}
    for r in sorted(records, key=SweepRecord.sort_key):
        groups.setdefault((r.instance, r.method, r.target_K), []).append(r)

    def mean(xs):
        return math.fsum(xs) / len(xs) if xs else math.nan

    out = []
    for (inst, method, target), rs in groups.items():
        solved = [r for r in rs if r.value is not None]
        out.append(SummaryRow(
            inst, method, target, rs[0].reduced_K, len(rs),
            sum(r.status == Status.OPTIMAL.value for r in rs),
            mean([r.value for r in solved]), mean([r.reduced_value for r in solved]),
            mean([float(r.nodes) for r in rs]),
        ))
    return out


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(rows, columns, seed: int, kind: str) -> str:
    buf = io.StringIO()
    buf.write(f"# owagg {__version__} {kind} v{CSV_VERSION} seed={seed}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


_RECORD_COLUMNS = [f.name for f in fields(SweepRecord) if f.name != "elapsed"]


def records_csv(records, seed: int) -> str:
    rows = (astuple(r)[:-1] for r in sorted(records, key=SweepRecord.sort_key))
    return _csv_text(rows, _RECORD_COLUMNS, seed, "sweep")


def summary_csv(records, seed: int) -> str:
    rows = (astuple(s) for s in summarize(records))
    return _csv_text(rows, [f.name for f in fields(SummaryRow)], seed, "sweep-summary")


def timings_csv(records, seed: int) -> str:
    rows = (
        (r.instance, r.repetition, r.method, r.target_K, r.elapsed)
        for r in sorted(records, key=SweepRecord.sort_key)
    )
    return _csv_text(rows, ["instance", "repetition", "method", "target_K", "elapsed"],
                     seed, "sweep-timings")
