"""OWA multiobjective Min-Knapsack: objective aggregation with certified ratios."""

from owagg.aggregation import (
    AggregationResult,
    aggregate_blocks,
    choose_level,
    kmeans_aggregate,
    kmeans_cluster,
    mean_cost_baseline,
    pad_to_multiple,
    rho,
    worst_case_bound,
)
from owagg.core import (
    MINMAX,
    OWA,
    CostMatrix,
    Criterion,
    DimensionError,
    KnapsackInstance,
    Solution,
    ValidationError,
    WeightVector,
    hurwicz_value,
    hurwicz_weights,
    is_feasible,
    objective_values,
    owa_value,
)
from owagg.solvers import (
    Blocks,
    KMeans,
    SolveReport,
    Status,
    evaluate_ratio,
    lower_bound,
    solve,
    solve_aggregated,
    solve_baseline,
    solve_bnb,
    solve_brute_force,
    solve_hurwicz,
)

__version__ = "0.1.0"
