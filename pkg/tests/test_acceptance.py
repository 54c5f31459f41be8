"""Acceptance criteria, one test each.

Every test prints a single PASS/FAIL line; the lines are repeated in the
"acceptance criteria" section of the pytest summary.  Run just this file
with ``pytest tests/test_acceptance.py -v``.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from owagg.aggregation import aggregate_blocks, rho
from owagg.core import MINMAX, OWA, Criterion, WeightVector, owa_value
from owagg.generators import weights_alpha, weights_pcentra
from owagg.harness.bounds import bounds_table
from owagg.harness.sweep import (
    SweepConfig,
    certificate_violations,
    records_csv,
    run_sweep,
    summarize,
)
from owagg.solvers import (
    Blocks,
    KMeans,
    Status,
    aggregated_instance,
    evaluate_ratio,
    optimal_solutions,
    solve_aggregated,
    solve_baseline,
    solve_bnb,
    solve_brute_force,
    solve_hurwicz,
    worst_tie_report,
)

from _instances import four_item_instance, random_instance, two_item_instance

LS = (2, 5, 10, 20, 50, 100, 200)
EXPECTED_TABLE = {
    1e-2: (1.52, 2.05, 2.29, 2.42, 2.50, 2.53, 2.54),
    1e-3: (1.94, 3.75, 4.99, 5.85, 6.46, 6.68, 6.80),
    1e-6: (2.00, 4.68, 7.49, 9.98, 12.07, 12.90, 13.35),
}


def _table_mismatches(alphas_to_rows):
    start = time.perf_counter()
    table = bounds_table(200, LS, list(alphas_to_rows))
    elapsed = time.perf_counter() - start
    bad = [
        (a, l, round(table.cell(a, l), 2), want)
        for a, row in alphas_to_rows.items()
        for l, want in zip(LS, row)
        if round(table.cell(a, l), 2) != want
    ]
    return bad, elapsed


def test_bound_table(verdict):
    bad, elapsed = _table_mismatches(EXPECTED_TABLE)
    detail = f"{21 - len(bad)}/21 cells, {elapsed:.3f}s"
    if bad:
        detail += "; mismatches " + ", ".join(f"a={a:g} l={l}: {got} vs {want}" for a, l, got, want in bad)
    verdict("bound table, K=200, alpha in {1e-2, 1e-3, 1e-6}", not bad and elapsed < 1, detail)


def test_bound_table_first_row_at_alpha_tenth(verdict):
    # the expected first row is what alpha = 0.1 produces
    bad, elapsed = _table_mismatches({1e-1: EXPECTED_TABLE[1e-2]})
    verdict("bound table first row reproduced at alpha=0.1", not bad and elapsed < 1,
            f"{7 - len(bad)}/7 cells, {elapsed:.3f}s")


def test_four_item_instance(verdict):
    inst = four_item_instance()
    opt = solve_brute_force(inst)
    reduced, agg = aggregated_instance(inst, Blocks(2))
    ties = optimal_solutions(reduced)
    every_cost_one = all(
        sorted(s.objective_values, reverse=True) == [1, 1, 0, 0] for s in ties
    ) and len(ties) == 6
    worst = worst_tie_report(inst, Blocks(2))
    ratio = evaluate_ratio(worst, inst)
    r = rho(inst.owa_weights, 2)
    ok = (
        opt.value == Fraction(3, 5)
        and every_cost_one
        and worst.value == Fraction(4, 5)
        and ratio == Fraction(4, 3) == r * 2
        and r == Fraction(2, 3)
        and agg.certificate == Fraction(4, 3)
    )
    verdict("bad instance n=4: optimum 3/5, worst blocks(2) tie 4/5, ratio 4/3 = 2*rho",
            ok, f"opt={opt.value}, worst={worst.value}, ratio={ratio}, rho={r}")


def test_two_item_instance(verdict):
    inst = two_item_instance(10)
    opt = solve_brute_force(inst)
    reduced, _ = aggregated_instance(inst, KMeans(2))
    ties = optimal_solutions(reduced)
    worst = worst_tie_report(inst, KMeans(2))
    ratio = evaluate_ratio(worst, inst)
    ok = opt.value == Fraction(1, 10) and len(ties) == 2 and ratio == 9
    verdict("bad instance n=2, K=10: optimum 1/10, kmeans(2) ties both, worst ratio 9",
            ok, f"opt={opt.value}, ties={len(ties)}, ratio={ratio}")


def test_sandwich(verdict):
    rng = np.random.default_rng(20240601)
    start = time.perf_counter()
    failures = 0
    for _ in range(10_000):
        K = int(rng.integers(1, 61))
        divisors = [d for d in range(1, K + 1) if K % d == 0]
        l = int(rng.choice(divisors))
        raw = np.sort(rng.exponential(size=K) * (rng.random(K) < 0.8))[::-1]
        if raw[0] == 0:
            raw[0] = 1.0
        w = WeightVector(tuple((raw / raw.sum()).tolist()))
        if not w.nonincreasing:
            w = WeightVector(tuple(sorted(w.weights, reverse=True)))
        a = rng.uniform(0, 100, size=K) * (rng.random(K) < 0.7)
        agg = aggregate_blocks(a.reshape(1, -1), w, l)
        low = owa_value(agg.reduced_costs.entries[0], agg.reduced_weights)
        mid = owa_value(a, w)
        high = agg.certificate * low
        slack = 1e-9 * max(1.0, abs(mid))
        if not (low <= mid + slack and mid <= high + slack):
            failures += 1
    elapsed = time.perf_counter() - start
    verdict("sandwich inequality on 10^4 random triples", failures == 0 and elapsed < 10,
            f"{failures} violations, {elapsed:.2f}s")


def _suite(seed=7, count=500):
    """Random instances n <= 15, K <= 12 with both weight generators."""
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(2, 16))
        K = int(rng.integers(2, 13))
        if i % 2:
            w = weights_alpha(K, float(10 ** rng.uniform(-6, -0.05)))
        else:
            w = weights_pcentra(K, int(rng.integers(1, K + 1)))
        yield random_instance(rng, n, K, w), int(rng.choice([2, 3, 4]))


def test_block_certificate(verdict):
    start = time.perf_counter()
    checked = failures = 0
    for inst, l in _suite():
        opt = solve_brute_force(inst)
        if opt.status is not Status.OPTIMAL:
            continue
        r = solve_aggregated(inst, Blocks(l))
        worst = worst_tie_report(inst, Blocks(l))
        bound = r.bound_certificate * opt.value + 1e-9
        checked += 1
        if r.value > bound or worst.value > bound:
            failures += 1
    elapsed = time.perf_counter() - start
    verdict("blocks solution within rho*l of the optimum on 500 instances",
            failures == 0 and checked >= 450 and elapsed < 120,
            f"{checked} feasible, {failures} violations (any reduced optimum), {elapsed:.1f}s")


def test_bnb_equals_brute_force(verdict):
    rng = np.random.default_rng(99)
    start = time.perf_counter()
    mismatches = compared = 0
    for _ in range(200):
        inst = random_instance(rng, int(rng.integers(2, 19)), int(rng.integers(1, 11)))
        for crit in (OWA, MINMAX):
            bf, bb = solve_brute_force(inst, crit), solve_bnb(inst, crit)
            compared += 1
            if bf.status is not bb.status:
                mismatches += 1
            elif bf.status is Status.OPTIMAL and abs(bb.value - bf.value) > 1e-9 * max(1, bf.value):
                mismatches += 1
    elapsed = time.perf_counter() - start
    verdict("branch-and-bound equals brute force on 200 instances (owa, minmax)",
            mismatches == 0 and elapsed < 120,
            f"{compared} comparisons, {mismatches} mismatches, {elapsed:.1f}s")


def test_hurwicz_decomposition(verdict):
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    mismatches = compared = 0
    for _ in range(200):
        inst = random_instance(rng, int(rng.integers(2, 16)), int(rng.integers(1, 9)))
        for lam in (0, 0.25, 0.5, 0.75, 1):
            bf = solve_brute_force(inst, Criterion("hurwicz", lam))
            hz = solve_hurwicz(inst, lam)
            compared += 1
            if bf.status is not hz.status:
                mismatches += 1
            elif bf.status is Status.OPTIMAL and abs(hz.value - bf.value) > 1e-9 * max(1, bf.value):
                mismatches += 1
    verdict("Hurwicz via K min-max problems equals brute force, 200 instances x 5 lambdas",
            mismatches == 0,
            f"{compared} comparisons, {mismatches} mismatches, {time.perf_counter() - start:.1f}s")


def test_baseline_guarantee(verdict):
    checked = failures = 0
    worst = 0.0
    for inst, _ in _suite():
        opt = solve_brute_force(inst)
        if opt.status is not Status.OPTIMAL:
            continue
        r = solve_baseline(inst)
        checked += 1
        bound = inst.owa_weights[0] * inst.K * opt.value
        if r.value > bound + 1e-9:
            failures += 1
        if opt.value > 0:
            worst = max(worst, r.value / opt.value / (inst.owa_weights[0] * inst.K))
    verdict("mean-cost baseline within w1*K of the optimum on 500 instances",
            failures == 0 and checked >= 450,
            f"{checked} feasible, {failures} violations, max ratio/bound {worst:.3f}")


def _desk_config():
    return SweepConfig.from_dict({
        "preset": "experiment", "n": 20, "K": [50], "repetitions": 20,
        "kbar_grid": [1, 2, 5, 10, 25, 50], "time_limit": 60, "seed": 2024,
    })


@pytest.mark.slow
def test_desk_sweep(verdict):
    cfg = _desk_config()
    start = time.perf_counter()
    first = run_sweep(cfg)
    second = run_sweep(cfg)
    elapsed = time.perf_counter() - start
    identical = records_csv(first, cfg.seed) == records_csv(second, cfg.seed)
    not_optimal = [r for r in first if r.status != Status.OPTIMAL.value]
    violations = certificate_violations(first)
    blocks = [r for r in first if r.method == "blocks"]
    # exact mean must not exceed the mean of any aggregated method at kbar < K
    rows = summarize(first)
    exact = {r.instance: r.mean_value for r in rows if r.method == "exact"}
    worse = [
        (r.instance, r.method, r.target_K)
        for r in rows
        if r.method in ("blocks", "kmeans", "baseline") and r.target_K < 50
        and exact[r.instance] > r.mean_value + 1e-9 * exact[r.instance]
    ]
    ok = identical and not not_optimal and not violations and not worse and len(blocks) == 8 * 20 * 6
    verdict("desk sweep n=20, K=50, 20 reps: certificates hold, CSV reproducible, exact mean lowest",
            ok, f"{len(first)} records, {len(not_optimal)} not optimal, {len(violations)} "
                f"certificate violations, identical={identical}, {len(worse)} mean inversions, "
                f"{elapsed:.0f}s for two runs")


def test_weight_generators(verdict):
    rng = np.random.default_rng(3)
    bad = []
    for _ in range(100):
        K = int(rng.integers(1, 10_001))
        alpha = float(10 ** rng.uniform(-9, -1e-4))
        w = weights_alpha(K, alpha).weights
        if any(a < b for a, b in zip(w, w[1:])) or abs(math.fsum(w) - 1) > 1e-9:
            bad.append((K, alpha))
    boundary = all(
        weights_pcentra(K, 1).weights == (1.0,) + (0.0,) * (K - 1)
        and weights_pcentra(K, K) == WeightVector.uniform(K)
        for K in (1, 2, 7, 50, 200)
    )
    verdict("alpha weights nonincreasing with unit sum; p-centra p=1 and p=K are max and mean",
            not bad and boundary, f"{100 - len(bad)}/100 (K, alpha) pairs, boundaries={boundary}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
