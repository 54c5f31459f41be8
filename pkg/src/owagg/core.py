"""Domain types and the OWA / Hurwicz criteria.

Costs live in float64 numpy arrays.  Weights keep whatever numeric type they
were given: passing :class:`fractions.Fraction` weights switches every
criterion evaluation to exact rational arithmetic, which is how the small
hand-checkable instances are verified without tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

WEIGHT_SUM_TOL = 1e-9
_MONOTONE_TOL = 1e-12


class ValidationError(ValueError):
    """An input violates a structural invariant (negative cost, bad weights, ...)."""


class DimensionError(ValidationError):
    """Vector or matrix sizes do not agree."""


def _is_exact(x) -> bool:
    return isinstance(x, Rational)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WeightVector:
    """OWA weights attached to ranks (largest value first).

    ``nonincreasing`` is detected from the weights when left as ``None``.
    Passing ``True`` asserts it and raises if the weights disagree.
    """

    weights: tuple
    nonincreasing: bool | None = None

    def __post_init__(self):
        w = tuple(self.weights)
        if not w:
            raise DimensionError("weight vector must have at least one entry")
        object.__setattr__(self, "weights", w)
        for x in w:
            if not (0 <= x <= 1):
                raise ValidationError(f"weight {x!r} outside [0, 1]")
        total = sum(w) if self.exact else math.fsum(w)
        if abs(total - 1) > WEIGHT_SUM_TOL:
            raise ValidationError(f"weights sum to {float(total)!r}, expected 1")
        monotone = all(a >= b - _MONOTONE_TOL for a, b in zip(w, w[1:]))
        if self.nonincreasing is None:
            object.__setattr__(self, "nonincreasing", monotone)
        elif self.nonincreasing and not monotone:
            raise ValidationError("weights flagged nonincreasing but are not")
        object.__setattr__(self, "_array", _frozen(np.array([float(x) for x in w])))

    @classmethod
    def normalized(cls, raw: Iterable, nonincreasing: bool | None = None) -> "WeightVector":
        """Rescale arbitrary nonnegative weights to unit sum (explicit opt-in)."""
        raw = tuple(raw)
        total = sum(raw) if all(_is_exact(x) for x in raw) else math.fsum(raw)
        if total <= 0:
            raise ValidationError("cannot normalise weights with nonpositive sum")
        return cls(tuple(x / total for x in raw), nonincreasing)

    @classmethod
    def uniform(cls, K: int, exact: bool = False) -> "WeightVector":
        w = Fraction(1, K) if exact else 1.0 / K
        return cls((w,) * K)

    @property
    def exact(self) -> bool:
        return all(_is_exact(x) for x in self.weights)

    @property
    def array(self) -> np.ndarray:
        """Read-only float64 view used by the numeric solvers."""
        return self._array

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __getitem__(self, k):
        return self.weights[k]

    def __eq__(self, other):
        if not isinstance(other, WeightVector):
            return NotImplemented
        return self.weights == other.weights

    def __hash__(self):
        return hash(self.weights)

    def __repr__(self):
        return f"WeightVector({list(self.weights)!r})"


def hurwicz_weights(K: int, lam) -> WeightVector:
    """OWA weights (lam, 0, ..., 0, 1 - lam) realising the Hurwicz criterion."""
    if not 0 <= lam <= 1:
        raise ValidationError(f"lambda must lie in [0, 1], got {lam!r}")
    if K == 1:
        return WeightVector((Fraction(1) if _is_exact(lam) else 1.0,))
    zero = Fraction(0) if _is_exact(lam) else 0.0
    w = [zero] * K
    w[0] = lam
    w[-1] = 1 - lam
    return WeightVector(tuple(w))


def maximum_weights(K: int) -> WeightVector:
    return WeightVector((Fraction(1),) + (Fraction(0),) * (K - 1))


class CostMatrix:
    """n x K nonnegative costs; column ``k`` is the cost vector of objective k."""

    __slots__ = ("_entries",)

    def __init__(self, entries):
        arr = np.array(entries, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[1] == 0:
            raise DimensionError(f"cost matrix must be 2-D with K >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("cost matrix contains non-finite entries")
        if np.any(arr < 0):
            i, k = np.argwhere(arr < 0)[0]
            raise ValidationError(f"negative cost {arr[i, k]!r} at item {i}, objective {k}")
        self._entries = _frozen(arr)

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def n(self) -> int:
        return self._entries.shape[0]

    @property
    def K(self) -> int:
        return self._entries.shape[1]

    def column(self, k: int) -> np.ndarray:
        return self._entries[:, k]

    def __eq__(self, other):
        if not isinstance(other, CostMatrix):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    def __repr__(self):
        return f"CostMatrix(n={self.n}, K={self.K})"


@dataclass(frozen=True, eq=False)
class KnapsackInstance:
    """Min-Knapsack with a capacity window ``B_lo <= b.x <= B_hi``.

    ``B_hi=None`` means no upper bound.  Setting ``b`` to ones and
    ``B_lo == B_hi`` gives a cardinality constraint.
    """

    b: np.ndarray
    B_lo: float
    costs: CostMatrix
    owa_weights: WeightVector
    B_hi: float | None = None
    name: str = ""

    def __post_init__(self):
        b = np.array(self.b, dtype=np.float64).reshape(-1)
        if np.any(b < 0) or not np.all(np.isfinite(b)):
            raise ValidationError("item weights must be finite and nonnegative")
        object.__setattr__(self, "b", _frozen(b))
        if not isinstance(self.costs, CostMatrix):
            object.__setattr__(self, "costs", CostMatrix(self.costs))
        if not isinstance(self.owa_weights, WeightVector):
            object.__setattr__(self, "owa_weights", WeightVector(tuple(self.owa_weights)))
        if self.costs.n != len(b):
            raise DimensionError(f"{len(b)} item weights but {self.costs.n} cost rows")
        if self.costs.K != len(self.owa_weights):
            raise DimensionError(
                f"{self.costs.K} objectives but {len(self.owa_weights)} OWA weights"
            )
        if self.B_lo < 0:
            raise ValidationError(f"B_lo must be nonnegative, got {self.B_lo!r}")
        if self.B_hi is not None and self.B_hi < self.B_lo:
            raise ValidationError(f"B_hi={self.B_hi!r} below B_lo={self.B_lo!r}")

    @property
    def n(self) -> int:
        return self.costs.n

    @property
    def K(self) -> int:
        return self.costs.K

    @property
    def upper(self) -> float:
        return math.inf if self.B_hi is None else self.B_hi

    def with_weights(self, w: WeightVector) -> "KnapsackInstance":
        return KnapsackInstance(self.b, self.B_lo, self.costs, w, self.B_hi, self.name)

    def with_costs(self, costs, w: WeightVector | None = None) -> "KnapsackInstance":
        return KnapsackInstance(
            self.b, self.B_lo, CostMatrix(costs), w or self.owa_weights, self.B_hi, self.name
        )

    def __eq__(self, other):
        if not isinstance(other, KnapsackInstance):
            return NotImplemented
        return (
            np.array_equal(self.b, other.b)
            and self.B_lo == other.B_lo
            and self.B_hi == other.B_hi
            and self.costs == other.costs
            and self.owa_weights == other.owa_weights
            and self.name == other.name
        )

    def __repr__(self):
        return f"KnapsackInstance(name={self.name!r}, n={self.n}, K={self.K})"


def _as_selection(x, n: int) -> np.ndarray:
    sel = np.asarray(x, dtype=np.int8).reshape(-1)
    if len(sel) != n:
        raise DimensionError(f"selection has length {len(sel)}, instance has n={n}")
    if np.any((sel != 0) & (sel != 1)):
        raise ValidationError("selection must be a 0/1 vector")
    return sel


def selection_code(x: Sequence[int]) -> int:
    """Integer code sum(x_i * 2**i): item 0 is the least significant bit.

    Ties between equally good solutions are broken towards the smallest code,
    which is also the order in which the brute-force solver enumerates.
    """
    return sum(1 << i for i, v in enumerate(x) if v)


def objective_values(inst: KnapsackInstance, x) -> np.ndarray:
    """Vector F(x) = (c_1.x, ..., c_K.x).  Feasibility is not checked."""
    sel = _as_selection(x, inst.n).astype(bool)
    return inst.costs.entries[sel].sum(axis=0)


def is_feasible(inst: KnapsackInstance, x) -> bool:
    load = float(inst.b @ _as_selection(x, inst.n))
    return inst.B_lo <= load <= inst.upper


@dataclass(frozen=True)
class Solution:
    selection: tuple[int, ...]
    objective_values: tuple[float, ...]

    @classmethod
    def from_selection(cls, inst: KnapsackInstance, x) -> "Solution":
        sel = tuple(int(v) for v in _as_selection(x, inst.n))
        return cls(sel, tuple(float(v) for v in objective_values(inst, sel)))

    @property
    def code(self) -> int:
        return selection_code(self.selection)

    @property
    def items(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.selection) if v)


def owa_value(values, w: WeightVector):
    """Sum of w_k times the k-th largest value.

    Returns a :class:`Fraction` when the weights are exact rationals (float
    values are converted exactly), otherwise a correctly rounded float.
    """
    values = list(values)
    if len(values) != len(w):
        raise DimensionError(f"{len(values)} values but {len(w)} weights")
    ranked = sorted(values, reverse=True)
    if w.exact:
        return sum((Fraction(wk) * Fraction(v) for wk, v in zip(w.weights, ranked)), Fraction(0))
    return math.fsum(float(wk) * float(v) for wk, v in zip(w.weights, ranked))


def hurwicz_value(values, lam):
    """lam * max + (1 - lam) * min.  For a single value this is that value."""
    values = list(values)
    if not values:
        raise DimensionError("Hurwicz criterion of an empty vector")
    hi, lo = max(values), min(values)
    if _is_exact(lam):
        return Fraction(lam) * Fraction(hi) + (1 - Fraction(lam)) * Fraction(lo)
    return lam * float(hi) + (1 - lam) * float(lo)


def owa_rows(F: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Vectorised OWA of every row of ``F`` (float path, used by the solvers)."""
    return -np.sort(-F, axis=1) @ w


@dataclass(frozen=True)
class Criterion:
    """Which aggregate of F(x) to minimise: ``owa``, ``minmax`` or ``hurwicz``."""

    kind: str = "owa"
    lam: float | Fraction | None = field(default=None)

    def __post_init__(self):
        if self.kind not in ("owa", "minmax", "hurwicz"):
            raise ValidationError(f"unknown criterion {self.kind!r}")
        if self.kind == "hurwicz":
            if self.lam is None or not 0 <= self.lam <= 1:
                raise ValidationError(f"hurwicz needs lambda in [0, 1], got {self.lam!r}")
        elif self.lam is not None:
            raise ValidationError(f"{self.kind} takes no lambda")

    @classmethod
    def parse(cls, text: str) -> "Criterion":
        kind, _, arg = text.strip().partition(":")
        if kind == "hurwicz":
            if not arg:
                raise ValidationError("hurwicz criterion needs a lambda, e.g. hurwicz:0.5")
            try:
                lam = Fraction(arg) if "/" in arg else float(arg)
            except ValueError:
                raise ValidationError(f"bad lambda {arg!r}") from None
            return cls("hurwicz", lam)
        if arg:
            raise ValidationError(f"{kind} takes no argument")
        return cls(kind)

    def __str__(self):
        return f"hurwicz:{self.lam}" if self.kind == "hurwicz" else self.kind

    def evaluate(self, values, w: WeightVector):
        if self.kind == "owa":
            return owa_value(values, w)
        values = list(values)
        if not values:
            raise DimensionError("criterion of an empty vector")
        if self.kind == "minmax":
            return max(values)
        return hurwicz_value(values, self.lam)

    def evaluate_many(self, F: np.ndarray, w: WeightVector) -> np.ndarray:
        if self.kind == "owa":
            return owa_rows(F, w.array)
        if self.kind == "minmax":
            return F.max(axis=1)
        lam = float(self.lam)
        return lam * F.max(axis=1) + (1 - lam) * F.min(axis=1)


OWA = Criterion("owa")
MINMAX = Criterion("minmax")
