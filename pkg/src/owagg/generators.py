"""Weight vectors and random OWA Min-Knapsack instances.

Randomness comes from numpy's PCG64.  A seed is expanded with
``np.random.SeedSequence(seed).spawn(4)`` into four independent streams,
always consumed in this order and shape:

    0  item weights      b ~ U[0.1, 10]             (n,)
    1  cost multipliers  u ~ U[0.5, 1.5]            (n, K) or (n, K') for nominals
    2  nominal choice    integers in [0, K')        (K,)   nominal method only
    3  perturbations     U[0.8, 1.2]                (n, K) nominal method only

so an instance is a pure function of (n, K, method, seed) on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from owagg.core import CostMatrix, KnapsackInstance, ValidationError, WeightVector

B_RANGE = (0.1, 10.0)
COST_FACTOR_RANGE = (0.5, 1.5)
PERTURBATION_RANGE = (0.8, 1.2)


def weights_alpha(K: int, alpha: float) -> WeightVector:
    """Weights from g(z) = (1 - alpha**z) / (1 - alpha): w_k = g(k/K) - g((k-1)/K).

    Evaluated as alpha**((k-1)/K) * (1 - alpha**(1/K)) / (1 - alpha), which is
    the same telescoping difference but monotone under floating point.
    Smaller alpha means more weight on the worst ranks.
    """
    if not 0 < alpha < 1:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha!r}")
    if K < 1:
        raise ValidationError(f"K must be >= 1, got {K}")
    if K == 1:
        return WeightVector((1.0,), nonincreasing=True)
    log_a = math.log(alpha)
    step = -math.expm1(log_a / K) / (1 - alpha)
    w = np.exp(log_a * (np.arange(K) / K)) * step
    return WeightVector(tuple(w.tolist()), nonincreasing=True)


def weights_pcentra(K: int, p: int) -> WeightVector:
    """Average of the p largest values: w_k = 1/p for k <= p, else 0."""
    if not 1 <= p <= K:
        raise ValidationError(f"p must lie in [1, K={K}], got {p}")
    return WeightVector((1.0 / p,) * p + (0.0,) * (K - p), nonincreasing=True)


def pcentra_p(K: int, fraction: float) -> int:
    """p = fraction * K rounded to the nearest integer, at least 1."""
    return min(K, max(1, round(fraction * K)))


def _streams(seed: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(4)]


def _item_weights(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(*B_RANGE, size=n)


def _correlated_costs(rng: np.random.Generator, b: np.ndarray, K: int) -> np.ndarray:
    return rng.uniform(*COST_FACTOR_RANGE, size=(len(b), K)) * b[:, None]


def instance_uniform(
    n: int, K: int, seed: int, weights: WeightVector | None = None, name: str = ""
) -> KnapsackInstance:
    """c_ik = u_ik * b_i with u_ik ~ U[0.5, 1.5]; demand B = sum(b) / 3.

    ``weights`` defaults to uniform; attach others with ``with_weights``.
    """
    if n < 1 or K < 1:
        raise ValidationError(f"need n, K >= 1, got n={n}, K={K}")
    s = _streams(seed)
    b = _item_weights(s[0], n)
    C = _correlated_costs(s[1], b, K)
    return KnapsackInstance(b, b.sum() / 3, CostMatrix(C), weights or WeightVector.uniform(K), name=name)


def instance_nominal(
    n: int,
    K: int,
    Kprime: int,
    seed: int,
    weights: WeightVector | None = None,
    name: str = "",
    return_labels: bool = False,
):
    """K scenarios, each a random nominal scenario times i.i.d. U[0.8, 1.2] factors.

    The ``Kprime`` nominals are drawn like :func:`instance_uniform` costs;
    the nominal of each scenario is chosen uniformly with replacement, and
    every cost entry gets its own factor.  With ``return_labels=True`` the
    generating nominal index of each scenario is returned as well.
    """
    if not 1 <= Kprime < K:
        raise ValidationError(f"need 1 <= K' < K, got K'={Kprime}, K={K}")
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    s = _streams(seed)
    b = _item_weights(s[0], n)
    nominal = _correlated_costs(s[1], b, Kprime)
    labels = s[2].integers(0, Kprime, size=K)
    C = nominal[:, labels] * s[3].uniform(*PERTURBATION_RANGE, size=(n, K))
    inst = KnapsackInstance(b, b.sum() / 3, CostMatrix(C), weights or WeightVector.uniform(K), name=name)
    if return_labels:
        return inst, tuple(labels.tolist())
    return inst


@dataclass(frozen=True)
class InstanceConfig:
    """One row of an experiment design.

    ``cost_method`` is ``"uniform"`` or ``"nominal"`` (with ``kprime``);
    ``weight_method`` is ``"alpha"`` (``weight_param`` = alpha) or
    ``"pcentra"`` (``weight_param`` = p, an integer).
    """

    name: str
    n: int
    K: int
    cost_method: str = "uniform"
    weight_method: str = "alpha"
    weight_param: float = 0.1
    kprime: int | None = None

    def __post_init__(self):
        if self.cost_method not in ("uniform", "nominal"):
            raise ValidationError(f"unknown cost method {self.cost_method!r}")
        if self.cost_method == "nominal" and self.kprime is None:
            raise ValidationError("nominal cost method needs kprime")
        if self.weight_method not in ("alpha", "pcentra"):
            raise ValidationError(f"unknown weight method {self.weight_method!r}")

    def weights(self) -> WeightVector:
        if self.weight_method == "alpha":
            return weights_alpha(self.K, self.weight_param)
        return weights_pcentra(self.K, int(self.weight_param))

    def build(self, seed: int) -> KnapsackInstance:
        w = self.weights()
        if self.cost_method == "uniform":
            return instance_uniform(self.n, self.K, seed, w, self.name)
        return instance_nominal(self.n, self.K, self.kprime, seed, w, self.name)

    @classmethod
    def parse(cls, name: str, n: int, K: int, costs: str, weights: str) -> "InstanceConfig":
        """Build from compact strings: costs ``uniform`` | ``nominal:K'``,
        weights ``alpha:A`` | ``pcentra:P`` | ``pcentra:0.1K``."""
        cmeth, _, carg = costs.partition(":")
        wmeth, _, warg = weights.partition(":")
        try:
            kprime = int(carg) if cmeth == "nominal" else None
            if wmeth == "pcentra":
                param = pcentra_p(K, float(warg[:-1])) if warg.endswith("K") else int(warg)
            else:
                param = float(warg)
        except ValueError:
            raise ValidationError(f"bad config strings {costs!r}, {weights!r}") from None
        return cls(name, n, K, cmeth, wmeth, param, kprime)


def experiment_configs(n: int = 40) -> list[InstanceConfig]:
    """The sixteen instance families (I for K=50, J for K=200) at item count n."""
    out = []
    for prefix, K in (("I", 50), ("J", 200)):
        for group, costs in ((1, "uniform"), (2, "nominal:10")):
            for idx, weights in enumerate(("alpha:0.1", "alpha:0.001", "pcentra:0.1K", "pcentra:0.3K"), 1):
                out.append(InstanceConfig.parse(f"{prefix}{group}_{idx}", n, K, costs, weights))
    return out
