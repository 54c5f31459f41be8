from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from owagg.aggregation import (
    aggregate_blocks,
    choose_level,
    cluster_order,
    kmeans_aggregate,
    kmeans_cluster,
    kmeans_weight_blocks,
    mean_cost_baseline,
    pad_to_multiple,
    rho,
    worst_case_bound,
)
from owagg.core import CostMatrix, ValidationError, WeightVector, objective_values, owa_value
from owagg.generators import weights_alpha, weights_pcentra

from _instances import four_item_instance, random_instance, two_item_instance

F = Fraction


def test_block_row_example():
    row = np.array([[5, 1, 3, 6, 0, 6, 2, 0, 1]], dtype=float)
    agg = aggregate_blocks(row, WeightVector.uniform(9), 3)
    assert agg.reduced_costs.entries.tolist() == [[3, 4, 1]]
    assert agg.assignment == (0, 0, 0, 1, 1, 1, 2, 2, 2)


def test_four_item_blocks():
    inst = four_item_instance()
    agg = aggregate_blocks(inst.costs, inst.owa_weights, 2)
    assert agg.reduced_costs.entries.tolist() == [[0.5, 0.5, 0, 0]] * 4
    assert agg.reduced_weights.weights == (F(2, 5), F(1, 5), F(1, 5), F(1, 5))
    assert rho(inst.owa_weights, 2) == F(2, 3)
    assert agg.certificate == F(4, 3)


def test_identity_blocks():
    rng = np.random.default_rng(0)
    C = rng.uniform(size=(5, 6))
    w = weights_alpha(6, 0.1)
    agg = aggregate_blocks(C, w, 1)
    assert np.array_equal(agg.reduced_costs.entries, C)
    assert agg.reduced_weights == w
    assert agg.certificate == pytest.approx(1.0, abs=1e-15)


def test_blocks_need_padding():
    with pytest.raises(ValidationError):
        aggregate_blocks(np.ones((2, 5)), WeightVector.uniform(5), 2)


@pytest.mark.parametrize("K,l,expected", [(8, 2, 8), (5, 2, 6), (5, 3, 6)])
def test_pad_examples(K, l, expected):
    rng = np.random.default_rng(K * l)
    inst = random_instance(rng, 4, K, WeightVector.uniform(K, exact=True))
    padded = pad_to_multiple(inst, l)
    assert padded.K == expected
    if expected == K:
        assert padded is inst
    else:
        assert np.all(padded.costs.entries[:, K:] == 0)
        assert all(x == 0 for x in padded.owa_weights.weights[K:])


def test_rho_examples():
    for K, l in [(6, 2), (6, 3), (12, 4), (9, 9)]:
        assert rho(WeightVector.uniform(K, exact=True), l) == F(1, l)
        assert worst_case_bound(WeightVector.uniform(K, exact=True), l) == 1
        assert rho(WeightVector((F(1),) + (F(0),) * (K - 1)), l) == 1
    with pytest.raises(ValidationError):
        rho(WeightVector((0.2, 0.8)), 2)


def test_full_block_is_row_mean_with_baseline_certificate():
    rng = np.random.default_rng(4)
    C = rng.uniform(size=(6, 8))
    w = weights_alpha(8, 0.01)
    agg = aggregate_blocks(C, w, 8)
    assert np.allclose(agg.reduced_costs.entries[:, 0], C.mean(axis=1))
    assert agg.certificate == pytest.approx(w[0] * 8, rel=1e-12)


def test_baseline_examples():
    C = np.array([[2.0, 0.0], [1.0, 3.0]])
    assert mean_cost_baseline(C, WeightVector((0.8, 0.2)))[0] == pytest.approx(1.6)
    assert np.allclose(mean_cost_baseline(C, WeightVector.uniform(2)), C.mean(axis=1))
    col = np.array([[1.5], [2.5]])
    assert mean_cost_baseline(col, WeightVector((1.0,))).tolist() == [1.5, 2.5]


def test_kmeans_two_item_example():
    inst = two_item_instance(10)
    labels = kmeans_cluster(inst.costs, 2)
    assert labels == (0,) + (1,) * 9
    agg = kmeans_aggregate(inst.costs, inst.owa_weights, 2)
    assert agg.reduced_weights.weights == (F(1, 2), F(1, 2))
    assert agg.reduced_costs.entries.tolist() == [[1, 0], [0, 1]]
    assert agg.certificate is None


def test_kmeans_extremes():
    rng = np.random.default_rng(2)
    C = rng.uniform(size=(5, 7))
    w = weights_alpha(7, 0.1)
    assert sorted(kmeans_cluster(C, 7)) == list(range(7))
    assert kmeans_cluster(C, 1) == (0,) * 7
    agg = kmeans_aggregate(C, w, 7)
    assert np.array_equal(agg.reduced_costs.entries, C)
    assert agg.reduced_weights == w
    with pytest.raises(ValidationError):
        kmeans_cluster(C, 8)


def test_kmeans_weight_blocks_uneven():
    w = WeightVector(tuple(F(k, 21) for k in range(6, 0, -1)))
    wb = kmeans_weight_blocks(w, 4)
    assert wb.weights == (w[0] + w[1], w[2] + w[3], w[4], w[5])


def test_kmeans_deterministic_and_nonempty():
    rng = np.random.default_rng(3)
    C = rng.uniform(size=(8, 30))
    for kbar in (2, 5, 11):
        a = kmeans_cluster(C, kbar, seed=7)
        assert a == kmeans_cluster(C, kbar, seed=7)
        assert sorted(set(a)) == list(range(kbar))
        agg = kmeans_aggregate(C, weights_alpha(30, 0.01), kbar, seed=7)
        assert sum(agg.group_sizes()) == 30 and min(agg.group_sizes()) >= 1
        assert float(sum(agg.reduced_weights.weights)) == pytest.approx(1.0, abs=1e-12)


def test_kmeans_handles_duplicate_columns():
    C = np.ones((3, 6))
    labels = kmeans_cluster(C, 3)
    assert sorted(set(labels)) == [0, 1, 2]


def test_cluster_order_groups_equal_columns():
    base = np.array([[1.0, 0.0], [0.0, 1.0]])
    C = base[:, [0, 1, 0, 1]]  # alternating twins
    order = cluster_order(C, 2)
    assert sorted(order[:2]) in ([0, 2], [1, 3])
    agg = aggregate_blocks(C, WeightVector.uniform(4), 2, order)
    assert sorted(agg.reduced_costs.entries.tolist()) == sorted(base.tolist())


def test_choose_level():
    assert choose_level(16, 0.5) == (2, 4, 4)
    assert choose_level(16, 1.0) == (1, 8, 2)
    # any eps strictly below 1 already rounds the level up to 2
    assert choose_level(16, 1 - 1e-9).level == 2
    assert choose_level(4, 0.5) == (2, 1, 4)
    assert choose_level(8, 0.01).l == 1
    with pytest.raises(ValidationError):
        choose_level(12, 0.5)
    with pytest.raises(ValidationError):
        choose_level(16, 0.0)


# -- properties --------------------------------------------------------------

@st.composite
def sandwich_case(draw):
    kbar = draw(st.integers(1, 8))
    l = draw(st.integers(1, 6))
    K = kbar * l
    raw = sorted(draw(st.lists(st.integers(0, 30), min_size=K, max_size=K)), reverse=True)
    if raw[0] == 0:
        raw[0] = 1
    w = WeightVector.normalized(tuple(F(r) for r in raw))
    a = draw(st.lists(st.integers(0, 50), min_size=K, max_size=K))
    return [F(v) for v in a], w, l


@given(sandwich_case())
def test_sandwich_exact(case):
    a, w, l = case
    agg = aggregate_blocks(np.array([a], dtype=float), w, l)
    abar = [sum(a[j:j + l]) / l for j in range(0, len(a), l)]
    low = owa_value(abar, agg.reduced_weights)
    assert low <= owa_value(a, w) <= agg.certificate * low


@given(st.integers(1, 10), st.integers(1, 5))
def test_rho_range(kbar, l):
    K = kbar * l
    w = weights_pcentra(K, max(1, K // 3))
    r = rho(w, l)
    assert 1 / l - 1e-12 <= r <= 1 + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4))
def test_aggregation_commutes_with_objective_map(seed, l):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 6, 3 * l)
    agg = aggregate_blocks(inst.costs, inst.owa_weights, l)
    x = rng.integers(0, 2, size=6)
    Fx = objective_values(inst, x)
    direct = Fx.reshape(-1, l).mean(axis=1)
    via = agg.reduced_costs.entries[x.astype(bool)].sum(axis=0)
    assert np.allclose(direct, via)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 9), st.integers(2, 5))
def test_padding_preserves_owa(seed, K, l):
    rng = np.random.default_rng(seed)
    w = WeightVector.normalized(tuple(F(int(v)) + 1 for v in rng.integers(0, 9, size=K)))
    inst = random_instance(rng, 5, K, w)
    padded = pad_to_multiple(inst, l)
    for _ in range(5):
        x = rng.integers(0, 2, size=5)
        assert owa_value(objective_values(inst, x), inst.owa_weights) == owa_value(
            objective_values(padded, x), padded.owa_weights
        )


def test_float_certificate_matches_exact():
    K, l = 12, 3
    w_exact = WeightVector(tuple(F(2 * (K - k) - 1, K * K) for k in range(K)))
    w_float = WeightVector(tuple(float(x) for x in w_exact))
    assert float(worst_case_bound(w_exact, l)) == pytest.approx(worst_case_bound(w_float, l), rel=1e-12)


def test_costmatrix_input_accepted():
    C = CostMatrix(np.arange(12, dtype=float).reshape(3, 4))
    agg = aggregate_blocks(C, WeightVector.uniform(4), 2)
    assert agg.reduced_costs.entries.tolist() == [[0.5, 2.5], [4.5, 6.5], [8.5, 10.5]]
