"""Exact OWA / min-max / Hurwicz Min-Knapsack solvers.

Two exact routes: :func:`solve_brute_force` enumerates every 0/1 vector and
is the reference oracle; :func:`solve_bnb` is a depth-first branch-and-bound
whose bound is the criterion applied to per-objective fractional knapsack
bounds (valid because every criterion here is monotone in each objective).

Ties between solutions whose values agree within ``1e-9`` (relative) go to
the smallest :func:`~owagg.core.selection_code`.
"""

from __future__ import annotations

import logging
import math
import sys
import time
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from owagg.aggregation import (
    AggregationResult,
    aggregate_blocks,
    cluster_order,
    kmeans_aggregate,
    mean_cost_baseline,
    pad_to_multiple,
)
from owagg.core import (
    MINMAX,
    OWA,
    Criterion,
    KnapsackInstance,
    Solution,
    ValidationError,
    WeightVector,
    maximum_weights,
    owa_value,
)

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_N = 25
DEFAULT_TIME_LIMIT = 60.0
TIE_TOL = 1e-9
_CHUNK = 1 << 15


class ProblemTooLargeError(ValueError):
    pass


class Status(str, Enum):
    OPTIMAL = "optimal"
    TIME_LIMIT = "time_limit"
    INFEASIBLE = "infeasible"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solve.

    For aggregated solves ``value`` is the criterion of the returned solution
    on the *original* instance and ``reduced_value`` is what the solver saw.
    """

    solution: Solution | None
    value: float | Fraction | None
    status: Status
    bound_certificate: float | Fraction | None = None
    nodes_explored: int = 0
    elapsed: float = 0.0
    method: str = "exact"
    criterion: Criterion = OWA
    reduced_value: float | Fraction | None = None
    reduced_K: int | None = None


def _tol(v: float) -> float:
    return TIE_TOL * max(1.0, abs(v))


def _decode(code: int, n: int) -> tuple[int, ...]:
    return tuple((code >> i) & 1 for i in range(n))


def _report(inst, code, criterion, status, **kw) -> SolveReport:
    if code is None:
        return SolveReport(None, None, status, criterion=criterion, **kw)
    sol = Solution.from_selection(inst, _decode(code, inst.n))
    value = criterion.evaluate(sol.objective_values, inst.owa_weights)
    return SolveReport(sol, value, status, criterion=criterion, **kw)


# -- brute force -------------------------------------------------------------


def _enumerate(
    inst: KnapsackInstance, criterion: Criterion, max_n: int
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    n = inst.n
    if n > max_n:
        raise ProblemTooLargeError(f"n={n} exceeds brute-force limit {max_n}")
    bits = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
    total = 1 << n
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        X = ((codes[:, None] & bits) != 0).astype(np.float64)
        load = X @ inst.b
        vals = criterion.evaluate_many(X @ inst.costs.entries, inst.owa_weights)
        vals[(load < inst.B_lo) | (load > inst.upper)] = np.inf
        yield codes, vals


def _brute_min(inst, criterion, max_n) -> float:
    best = math.inf
    for _, vals in _enumerate(inst, criterion, max_n):
        best = min(best, float(vals.min()))
    return best


def optimal_solutions(
    inst: KnapsackInstance, criterion: Criterion = OWA, max_n: int = BRUTE_FORCE_MAX_N
) -> list[Solution]:
    """Every feasible solution within tie tolerance of the optimum, by code."""
    best = _brute_min(inst, criterion, max_n)
    if best == math.inf:
        return []
    out = []
    for codes, vals in _enumerate(inst, criterion, max_n):
        for c in codes[vals <= best + _tol(best)].tolist():
            out.append(Solution.from_selection(inst, _decode(c, inst.n)))
    return out


def solve_brute_force(
    inst: KnapsackInstance, criterion: Criterion = OWA, max_n: int = BRUTE_FORCE_MAX_N
) -> SolveReport:
    start = time.perf_counter()
    best = _brute_min(inst, criterion, max_n)
    code = None
    if best < math.inf:
        for codes, vals in _enumerate(inst, criterion, max_n):
            hit = np.flatnonzero(vals <= best + _tol(best))
            if len(hit):
                code = int(codes[hit[0]])
                break
    status = Status.INFEASIBLE if code is None else Status.OPTIMAL
    return _report(
        inst, code, criterion, status,
        nodes_explored=1 << inst.n, elapsed=time.perf_counter() - start, method="brute_force",
    )


# -- bounds ------------------------------------------------------------------


def _criterion_float(criterion: Criterion, w: np.ndarray):
    if criterion.kind == "owa":
        return lambda L: float(np.sort(L)[::-1] @ w)
    if criterion.kind == "minmax":
        return lambda L: float(L.max())
    lam = float(criterion.lam)
    return lambda L: lam * float(L.max()) + (1 - lam) * float(L.min())


def fractional_cover_cost(cost: np.ndarray, b: np.ndarray, demand: float) -> float:
    """min cost.y s.t. b.y >= demand, 0 <= y <= 1, by the ratio greedy.

    Returns ``inf`` when even y = 1 does not reach the demand.  With
    nonnegative costs an optimal y never exceeds the demand, so an upper
    capacity limit at or above the demand cannot bind.
    """
    if demand <= 0:
        return 0.0
    useful = b > 0
    if b[useful].sum() < demand:
        return math.inf
    idx = np.flatnonzero(useful)
    idx = idx[np.argsort(cost[idx] / b[idx], kind="stable")]
    total = 0.0
    for i in idx:
        if b[i] >= demand:
            return total + cost[i] * (demand / b[i])
        total += cost[i]
        demand -= b[i]
    return total


def lower_bound(
    inst: KnapsackInstance,
    fixed_one: Iterable[int] = (),
    fixed_zero: Iterable[int] = (),
    criterion: Criterion = OWA,
) -> float:
    """Criterion applied to per-objective lower bounds over feasible completions."""
    one, zero = set(fixed_one), set(fixed_zero)
    if one & zero:
        raise ValidationError(f"items fixed both ways: {sorted(one & zero)}")
    C = inst.costs.entries
    sel = np.zeros(inst.n, dtype=bool)
    sel[list(one)] = True
    load = float(inst.b[sel].sum())
    if load > inst.upper:
        return math.inf
    free = np.ones(inst.n, dtype=bool)
    free[list(one | zero)] = False
    demand = inst.B_lo - load
    L = C[sel].sum(axis=0)
    for k in range(inst.K):
        extra = fractional_cover_cost(C[free, k], inst.b[free], demand)
        if extra == math.inf:
            return math.inf
        L[k] += extra
    return _criterion_float(criterion, inst.owa_weights.array)(L)


class _Timeout(Exception):
    pass


class _BranchAndBound:
    """DFS over items in descending-b order; free items are always a suffix."""

    def __init__(self, inst: KnapsackInstance, criterion: Criterion, prune: bool, deadline: float):
        self.inst = inst
        self.prune = prune
        self.deadline = deadline
        self.crit = _criterion_float(criterion, inst.owa_weights.array)
        b, C = inst.b, inst.costs.entries
        self.b, self.C = b, C
        self.lo, self.hi = inst.B_lo, inst.upper
        self.order = np.argsort(-b, kind="stable")
        pos = np.empty(inst.n, dtype=np.int64)
        pos[self.order] = np.arange(inst.n)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(b[:, None] > 0, C / b[:, None], np.inf)
        by_ratio = np.argsort(ratio.T, axis=1, kind="stable")  # K x n
        self.pos_sorted = pos[by_ratio]
        self.b_sorted = b[by_ratio]
        self.c_sorted = np.take_along_axis(C.T, by_ratio, axis=1)
        self.suffix_b = np.concatenate([np.cumsum(b[self.order][::-1])[::-1], [0.0]])
        self.rows = np.arange(inst.K)
        self.nodes = 0
        self.best = math.inf
        self.best_code: int | None = None

    def bound(self, depth: int, demand: float, cost: np.ndarray) -> float:
        if self.suffix_b[depth] < demand:
            return math.inf
        free = self.pos_sorted >= depth
        bs = np.where(free, self.b_sorted, 0.0)
        cs = np.where(free, self.c_sorted, 0.0)
        cb = np.cumsum(bs, axis=1)
        cc = np.cumsum(cs, axis=1)
        # summation order differs from suffix_b; never ask for more than exists
        demand = np.minimum(demand, cb[:, -1])
        j = np.argmax(cb >= demand[:, None], axis=1)
        r = self.rows
        before_b = cb[r, j] - bs[r, j]
        before_c = cc[r, j] - cs[r, j]
        L = cost + before_c + (demand - before_b) * (cs[r, j] / bs[r, j])
        return self.crit(L)

    def offer(self, value: float, code: int):
        if self.best_code is None or value < self.best - _tol(self.best) or (
            value <= self.best + _tol(self.best) and code < self.best_code
        ):
            self.best, self.best_code = value, code

    def dominated(self, lb: float, code: int) -> bool:
        # `code` is the smallest code reachable below this node
        if self.best_code is None:
            return False
        if lb > self.best + _tol(self.best):
            return True
        return lb >= self.best - _tol(self.best) and code >= self.best_code

    def greedy(self):
        mean_ratio = np.full(self.inst.n, np.inf)
        pos = self.b > 0
        mean_ratio[pos] = self.C[pos].mean(axis=1) / self.b[pos]
        load, code, cost = 0.0, 0, np.zeros(self.inst.K)
        for i in np.argsort(mean_ratio, kind="stable"):
            if load >= self.lo or not pos[i]:
                break
            load += self.b[i]
            cost = cost + self.C[i]
            code |= 1 << int(i)
        if self.lo <= load <= self.hi:
            self.offer(self.crit(cost), code)

    def dfs(self, depth: int, load: float, cost: np.ndarray, code: int):
        self.nodes += 1
        if not self.nodes & 255 and time.perf_counter() > self.deadline:
            raise _Timeout
        if load > self.hi:
            return
        if load >= self.lo:
            # costs are nonnegative: leaving the remaining items out is best
            self.offer(self.crit(cost), code)
            return
        if depth == self.inst.n:
            return
        lb = self.bound(depth, self.lo - load, cost)
        if lb == math.inf or (self.prune and self.dominated(lb, code)):
            return
        i = int(self.order[depth])
        self.dfs(depth + 1, load + self.b[i], cost + self.C[i], code | (1 << i))
        self.dfs(depth + 1, load, cost, code)


def solve_bnb(
    inst: KnapsackInstance,
    criterion: Criterion = OWA,
    time_limit: float = DEFAULT_TIME_LIMIT,
    prune: bool = True,
) -> SolveReport:
    """Exact branch-and-bound.  ``prune=False`` keeps only feasibility cuts."""
    start = time.perf_counter()
    search = _BranchAndBound(inst, criterion, prune, start + time_limit)
    search.greedy()
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * inst.n + 100))
    try:
        search.dfs(0, 0.0, np.zeros(inst.K), 0)
        status = Status.OPTIMAL if search.best_code is not None else Status.INFEASIBLE
    except _Timeout:
        status = Status.TIME_LIMIT
    finally:
        sys.setrecursionlimit(limit)
    return _report(
        inst, search.best_code, criterion, status,
        nodes_explored=search.nodes, elapsed=time.perf_counter() - start,
    )


# -- aggregation-based solves ------------------------------------------------


@dataclass(frozen=True)
class Blocks:
    l: int
    presort: bool = False
    seed: int = 0
    restarts: int = 10

    def __str__(self):
        return f"blocks:{self.l}" + ("+presort" if self.presort else "")


@dataclass(frozen=True)
class KMeans:
    kbar: int
    seed: int = 0
    restarts: int = 10

    def __str__(self):
        return f"kmeans:{self.kbar}"


def parse_method(text: str, seed: int = 0, restarts: int = 10):
    """``exact``, ``baseline``, ``blocks:L``, ``blocks:L+presort`` or ``kmeans:KBAR``."""
    name, _, arg = text.strip().partition(":")
    if name in ("exact", "baseline") and not arg:
        return name
    try:
        if name == "blocks":
            num, plus, flag = arg.partition("+")
            if plus and flag != "presort":
                raise ValueError(flag)
            return Blocks(int(num), bool(plus), seed, restarts)
        if name == "kmeans":
            return KMeans(int(arg), seed, restarts)
    except ValueError:
        pass
    raise ValidationError(f"bad method {text!r}")


def aggregated_instance(
    inst: KnapsackInstance, method: Blocks | KMeans
) -> tuple[KnapsackInstance, AggregationResult]:
    """The reduced instance an aggregated solve hands to the exact solver."""
    if isinstance(method, Blocks):
        if method.l < 1:
            raise ValidationError(f"block size must be >= 1, got {method.l}")
        padded = pad_to_multiple(inst, method.l)
        order = None
        if method.presort:
            order = cluster_order(padded.costs, method.l, method.seed, method.restarts)
        agg = aggregate_blocks(padded.costs, padded.owa_weights, method.l, order)
    elif isinstance(method, KMeans):
        agg = kmeans_aggregate(
            inst.costs, inst.owa_weights, method.kbar, method.seed, method.restarts
        )
    else:
        raise ValidationError(f"unknown aggregation method {method!r}")
    reduced = KnapsackInstance(
        inst.b, inst.B_lo, agg.reduced_costs, agg.reduced_weights, inst.B_hi, inst.name
    )
    return reduced, agg


def _lift(inst, reduced_report: SolveReport, **kw) -> SolveReport:
    """Re-evaluate a reduced-problem solution under the original OWA."""
    r = reduced_report
    if r.solution is None:
        return replace(r, criterion=OWA, reduced_value=None, **kw)
    sol = Solution.from_selection(inst, r.solution.selection)
    return replace(
        r, solution=sol, value=owa_value(sol.objective_values, inst.owa_weights),
        criterion=OWA, reduced_value=r.value, **kw,
    )


def solve_aggregated(
    inst: KnapsackInstance,
    method: Blocks | KMeans,
    time_limit: float = DEFAULT_TIME_LIMIT,
) -> SolveReport:
    """Aggregate objectives, solve the reduced OWA problem exactly, lift back."""
    start = time.perf_counter()
    reduced, agg = aggregated_instance(inst, method)
    r = solve_bnb(reduced, OWA, time_limit)
    return _lift(
        inst, r, method=str(method), bound_certificate=agg.certificate,
        reduced_K=agg.K, elapsed=time.perf_counter() - start,
    )


def worst_tie_report(inst: KnapsackInstance, method: Blocks | KMeans) -> SolveReport:
    """Among all optimal solutions of the reduced problem, the one that is
    worst under the original OWA (brute force; small instances only)."""
    start = time.perf_counter()
    reduced, agg = aggregated_instance(inst, method)
    ties = optimal_solutions(reduced, OWA)
    if not ties:
        return SolveReport(None, None, Status.INFEASIBLE, agg.certificate, method=str(method))
    worst = max(ties, key=lambda s: (owa_value(
        Solution.from_selection(inst, s.selection).objective_values, inst.owa_weights), -s.code))
    r = _report(reduced, worst.code, OWA, Status.OPTIMAL)
    return _lift(
        inst, r, method=str(method), bound_certificate=agg.certificate,
        reduced_K=agg.K, nodes_explored=1 << inst.n, elapsed=time.perf_counter() - start,
    )


def solve_baseline(inst: KnapsackInstance, time_limit: float = DEFAULT_TIME_LIMIT) -> SolveReport:
    """Solve the single objective c_hat_i = OWA(row i); certificate w_1 * K."""
    start = time.perf_counter()
    w = inst.owa_weights
    single = KnapsackInstance(
        inst.b, inst.B_lo, mean_cost_baseline(inst.costs, w).reshape(-1, 1),
        WeightVector((Fraction(1),)), inst.B_hi, inst.name,
    )
    r = solve_bnb(single, OWA, time_limit)
    cert = w[0] * inst.K if w.nonincreasing else None
    return _lift(
        inst, r, method="baseline", bound_certificate=cert, reduced_K=1,
        elapsed=time.perf_counter() - start,
    )


def solve_hurwicz(
    inst: KnapsackInstance, lam, time_limit: float = DEFAULT_TIME_LIMIT
) -> SolveReport:
    """Hurwicz optimum as the best of K min-max problems.

    Subproblem ``i`` has scenarios ``lam * c_k + (1 - lam) * c_i`` for every k.
    """
    crit = Criterion("hurwicz", lam)
    start = time.perf_counter()
    deadline = start + time_limit
    C = inst.costs.entries
    lam_f = float(lam)
    nodes, timed_out, winners = 0, False, []
    for i in range(inst.K):
        sub = inst.with_costs(lam_f * C + (1 - lam_f) * C[:, [i]], maximum_weights(inst.K))
        r = solve_bnb(sub, MINMAX, max(deadline - time.perf_counter(), 0.0))
        nodes += r.nodes_explored
        timed_out |= r.status is Status.TIME_LIMIT
        if r.solution is not None:
            winners.append((float(r.value), r.solution.code))
    code = None
    if winners:
        best = min(v for v, _ in winners)
        code = min(c for v, c in winners if v <= best + _tol(best))
    if timed_out:
        status = Status.TIME_LIMIT
    else:
        status = Status.INFEASIBLE if code is None else Status.OPTIMAL
    return _report(
        inst, code, crit, status, nodes_explored=nodes,
        elapsed=time.perf_counter() - start, method="hurwicz_decomposition",
    )


def solve(
    inst: KnapsackInstance,
    method="exact",
    criterion: Criterion = OWA,
    time_limit: float = DEFAULT_TIME_LIMIT,
) -> SolveReport:
    """Dispatch on ``method`` (string or :class:`Blocks` / :class:`KMeans`).

    Aggregation methods need ``owa`` or ``minmax``; ``minmax`` is run as OWA
    with weights (1, 0, ..., 0).
    """
    if isinstance(method, str):
        method = parse_method(method)
    if criterion.kind == "hurwicz":
        if method != "exact":
            raise ValidationError("the Hurwicz criterion is only solved exactly")
        return solve_hurwicz(inst, criterion.lam, time_limit)
    if method == "exact":
        return solve_bnb(inst, criterion, time_limit)
    if criterion.kind == "minmax":
        inst = inst.with_weights(maximum_weights(inst.K))
    if method == "baseline":
        return solve_baseline(inst, time_limit)
    return solve_aggregated(inst, method, time_limit)


def evaluate_ratio(
    report: SolveReport, inst: KnapsackInstance, criterion: Criterion | None = None
):
    """Criterion value of ``report``'s solution over the brute-force optimum.

    A zero optimum with a nonzero value gives ``inf`` (logged as degenerate).
    """
    criterion = criterion or report.criterion
    if report.solution is None:
        raise ValidationError("report carries no solution")
    opt = solve_brute_force(inst, criterion).value
    value = criterion.evaluate(
        Solution.from_selection(inst, report.solution.selection).objective_values,
        inst.owa_weights,
    )
    if opt == 0:
        if value == 0:
            return 1
        logger.warning("zero optimum but solution value %s: ratio is infinite", value)
        return math.inf
    return value / opt
