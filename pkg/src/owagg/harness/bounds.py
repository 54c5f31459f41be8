"""Worst-case ratio table rho*l over block sizes and generator parameters."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from owagg.aggregation import worst_case_bound
from owagg.core import WeightVector
from owagg.generators import weights_alpha


@dataclass(frozen=True)
class BoundsTable:
    K: int
    ls: tuple[int, ...]
    alphas: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]  # values[i][j]: alphas[i], ls[j]

    def cell(self, alpha: float, l: int) -> float:
        return self.values[self.alphas.index(alpha)][self.ls.index(l)]

    def rounded(self, digits: int = 2) -> tuple[tuple[float, ...], ...]:
        return tuple(tuple(round(v, digits) for v in row) for row in self.values)

    def format(self) -> str:
        head = "alpha \\ l".rjust(10) + "".join(f"{l:>8d}" for l in self.ls)
        rows = [head]
        for a, row in zip(self.alphas, self.values):
            rows.append(f"{a:>10g}" + "".join(f"{v:>8.2f}" for v in row))
        return "\n".join(rows)

    def to_csv(self) -> str:
        out = ["alpha,l,bound,bound_rounded"]
        for a, row in zip(self.alphas, self.values):
            for l, v in zip(self.ls, row):
                out.append(f"{a!r},{l},{v!r},{round(v, 2):.2f}")
        return "\n".join(out) + "\n"


def _padded(w: WeightVector, l: int) -> WeightVector:
    extra = -len(w) % l
    if not extra:
        return w
    zero = Fraction(0) if w.exact else 0.0
    return WeightVector(w.weights + (zero,) * extra)


def bounds_table(K: int, ls, alphas) -> BoundsTable:
    """rho*l for alpha-generated weights; non-dividing l are zero-padded."""
    ls, alphas = tuple(int(l) for l in ls), tuple(float(a) for a in alphas)
    values = []
    for a in alphas:
        w = weights_alpha(K, a)
        values.append(tuple(float(worst_case_bound(_padded(w, l), l)) for l in ls))
    return BoundsTable(K, ls, alphas, tuple(values))
