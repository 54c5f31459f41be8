"""Objective reduction: block averaging, K-means grouping, mean-cost baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from owagg.core import (
    CostMatrix,
    KnapsackInstance,
    ValidationError,
    WeightVector,
    owa_rows,
)

KMEANS_MAX_ITER = 100


@dataclass(frozen=True)
class AggregationResult:
    """A reduced problem plus the map from original to aggregated objectives.

    ``assignment[k]`` is the group of original objective ``k`` (dummy
    objectives from padding included).  ``certificate`` is the a-priori
    worst-case ratio and is only set for block aggregation under
    nonincreasing weights.
    """

    reduced_costs: CostMatrix
    reduced_weights: WeightVector
    assignment: tuple[int, ...]
    certificate: float | Fraction | None = None

    @property
    def K(self) -> int:
        return self.reduced_costs.K

    def group_sizes(self) -> list[int]:
        return np.bincount(self.assignment, minlength=self.K).tolist()


def _zero_like(w: WeightVector):
    return Fraction(0) if w.exact else 0.0


def _pad(C: np.ndarray, w: WeightVector, l: int) -> tuple[np.ndarray, WeightVector]:
    if l < 1:
        raise ValidationError(f"block size must be >= 1, got {l}")
    extra = -C.shape[1] % l
    if not extra:
        return C, w
    C = np.hstack([C, np.zeros((C.shape[0], extra))])
    return C, WeightVector(w.weights + (_zero_like(w),) * extra)


def pad_to_multiple(inst: KnapsackInstance, l: int) -> KnapsackInstance:
    """Append zero-cost, zero-weight objectives until K is a multiple of ``l``.

    Zero columns rank last among nonnegative values and the trailing ranks
    carry weight 0, so every OWA value is unchanged.
    """
    C, w = _pad(inst.costs.entries, inst.owa_weights, l)
    if C is inst.costs.entries:
        return inst
    return inst.with_costs(C, w)


def _block_sum(ws) -> float:
    # a block holding (almost) all the mass can round to just above 1
    return min(math.fsum(ws), 1.0)


def block_weights(w: WeightVector, l: int) -> WeightVector:
    K = len(w)
    if K % l:
        raise ValidationError(f"K={K} is not a multiple of l={l}; pad first")
    blocks = [w.weights[j:j + l] for j in range(0, K, l)]
    if w.exact:
        return WeightVector(tuple(sum(b, Fraction(0)) for b in blocks))
    return WeightVector(tuple(_block_sum(b) for b in blocks))


def rho(w: WeightVector, l: int):
    """Largest ratio of a prefix sum of ``w`` to the same-length prefix sum of
    the block-summed weights.  Exact when ``w`` is exact."""
    if not w.nonincreasing:
        raise ValidationError("rho is defined for nonincreasing weights only")
    wb = block_weights(w, l)
    if w.exact:
        num = den = Fraction(0)
        best = Fraction(0)
        for k in range(len(wb)):
            num += w[k]
            den += wb[k]
            best = max(best, num / den)
        return best
    num = np.cumsum(w.array[: len(wb)])
    den = np.cumsum(wb.array)
    return float(np.max(num / den))


def worst_case_bound(w: WeightVector, l: int):
    """Approximation ratio rho * l certified for l-block aggregation."""
    return rho(w, l) * l


def aggregate_blocks(
    C, w: WeightVector, l: int, order: Sequence[int] | None = None
) -> AggregationResult:
    """Average each run of ``l`` consecutive columns and sum the matching weights.

    ``order`` optionally permutes the columns before blocking (see
    :func:`cluster_order`); weights are attached to ranks, so they are never
    permuted.
    """
    C = C.entries if isinstance(C, CostMatrix) else np.asarray(C, dtype=np.float64)
    K = C.shape[1]
    if len(w) != K:
        raise ValidationError(f"{K} columns but {len(w)} weights")
    if l < 1 or K % l:
        raise ValidationError(f"K={K} is not a multiple of l={l}; pad first")
    if order is None:
        order = np.arange(K)
    else:
        order = np.asarray(order)
        if sorted(order.tolist()) != list(range(K)):
            raise ValidationError("order must be a permutation of the columns")
    reduced = C[:, order].reshape(C.shape[0], K // l, l).mean(axis=2)
    assignment = np.empty(K, dtype=int)
    assignment[order] = np.arange(K) // l
    cert = worst_case_bound(w, l) if w.nonincreasing else None
    return AggregationResult(
        CostMatrix(reduced), block_weights(w, l), tuple(assignment.tolist()), cert
    )


def mean_cost_baseline(C, w: WeightVector) -> np.ndarray:
    """Per-item OWA of its cost row; a single objective that is w_1*K-approximate."""
    C = C.entries if isinstance(C, CostMatrix) else np.asarray(C, dtype=np.float64)
    return owa_rows(C, w.array)


def _canonical(labels: np.ndarray) -> np.ndarray:
    # clusters renumbered by their smallest member index
    first = {}
    for lab in labels.tolist():
        first.setdefault(lab, len(first))
    return np.array([first[lab] for lab in labels.tolist()])


def _seed_centres(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    m = len(X)
    chosen = [int(rng.integers(m))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        total = d2.sum()
        if total > 0:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, m - 1)
        else:
            rest = [i for i in range(m) if i not in chosen]
            idx = rest[int(rng.integers(len(rest)))]
        chosen.append(idx)
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return X[chosen].copy()


def _repair_empty(labels: np.ndarray, dist: np.ndarray, k: int) -> np.ndarray:
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(counts == 0):
        movable = counts[labels] > 1
        own = np.where(movable, dist[np.arange(len(labels)), labels], -np.inf)
        i = int(np.argmax(own))
        counts[labels[i]] -= 1
        labels[i] = j
        counts[j] += 1
    return labels


def _lloyd(X: np.ndarray, k: int, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    centres = _seed_centres(X, k, rng)
    labels = None
    for _ in range(KMEANS_MAX_ITER):
        dist = ((X[:, None, :] - centres[None, :, :]) ** 2).sum(axis=2)
        new = _repair_empty(dist.argmin(axis=1), dist, k)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        centres = np.stack([X[labels == j].mean(axis=0) for j in range(k)])
    sse = float(((X - centres[labels]) ** 2).sum())
    return labels, sse


def kmeans_cluster(C, kbar: int, seed: int = 0, restarts: int = 10) -> tuple[int, ...]:
    """Group the K columns of ``C`` into ``kbar`` nonempty clusters.

    Lloyd's iteration from k-means++ seeds; restart ``r`` uses seed
    ``seed + r`` and the run with the smallest within-cluster sum of squares
    wins (earliest restart on ties).  Labels are canonical: cluster 0 holds
    column 0, the next new label goes to the next unseen column, and so on.
    """
    C = C.entries if isinstance(C, CostMatrix) else np.asarray(C, dtype=np.float64)
    K = C.shape[1]
    if not 1 <= kbar <= K:
        raise ValidationError(f"kbar must lie in [1, K={K}], got {kbar}")
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    X = C.T
    best, best_sse = None, math.inf
    for r in range(restarts):
        labels, sse = _lloyd(X, kbar, np.random.default_rng(seed + r))
        if sse < best_sse:
            best, best_sse = labels, sse
    return tuple(_canonical(best).tolist())


def kmeans_weight_blocks(w: WeightVector, kbar: int) -> WeightVector:
    """Sum consecutive weights into ``kbar`` groups as evenly as possible.

    With K = a*kbar + b the first b groups take a+1 weights, the rest a.
    """
    K = len(w)
    if not 1 <= kbar <= K:
        raise ValidationError(f"kbar must lie in [1, K={K}], got {kbar}")
    a, b = divmod(K, kbar)
    sizes = [a + 1] * b + [a] * (kbar - b)
    edges = np.concatenate([[0], np.cumsum(sizes)])
    blocks = [w.weights[s:e] for s, e in zip(edges[:-1], edges[1:])]
    if w.exact:
        return WeightVector(tuple(sum(g, Fraction(0)) for g in blocks))
    return WeightVector(tuple(_block_sum(g) for g in blocks))


def kmeans_aggregate(
    C, w: WeightVector, kbar: int, seed: int = 0, restarts: int = 10
) -> AggregationResult:
    """Replace each K-means cluster of objectives by its mean column.

    Weight group i goes to cluster i.  OWA re-sorts values, so only the
    multiset of reduced weights matters.  No approximation certificate.
    """
    C = C.entries if isinstance(C, CostMatrix) else np.asarray(C, dtype=np.float64)
    labels = np.array(kmeans_cluster(C, kbar, seed, restarts))
    means = np.stack([C[:, labels == j].mean(axis=1) for j in range(kbar)], axis=1)
    return AggregationResult(
        CostMatrix(means), kmeans_weight_blocks(w, kbar), tuple(labels.tolist()), None
    )


def cluster_order(C, l: int, seed: int = 0, restarts: int = 10) -> list[int]:
    """Column order that places K-means clusters next to each other.

    Feeding it to :func:`aggregate_blocks` tends to average similar objectives
    together while keeping equal block sizes, so the certificate still holds.
    """
    C = C.entries if isinstance(C, CostMatrix) else np.asarray(C, dtype=np.float64)
    K = C.shape[1]
    if K % l:
        raise ValidationError(f"K={K} is not a multiple of l={l}; pad first")
    labels = kmeans_cluster(C, K // l, seed, restarts)
    return sorted(range(K), key=lambda k: (labels[k], k))


class LevelChoice(NamedTuple):
    level: int
    l: int
    reduced_K: int


def choose_level(K: int, epsilon: float) -> LevelChoice:
    """Aggregation level ceil(log2(1/eps) + 1) for a power-of-two K.

    Solving the reduced problem 2-approximately then gives an eps*K
    approximation.  When the level exceeds log2(K), no aggregation is needed
    and l is clamped to 1.
    """
    if not 0 < epsilon <= 1:
        raise ValidationError(f"epsilon must lie in (0, 1], got {epsilon!r}")
    if K < 4 or K & (K - 1):
        raise ValidationError(f"K must be a power of two with exponent > 1, got {K}; pad first")
    r = K.bit_length() - 1
    level = math.ceil(math.log2(1 / epsilon) + 1)
    l = 1 << max(r - level, 0)
    return LevelChoice(level, l, K // l)
