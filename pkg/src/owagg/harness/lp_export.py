"""CPLEX-LP export of the linearised OWA Min-Knapsack model.

    min   sum_k p_k + q_k
    s.t.  p_k + q_j - sum_i w_k c_ij x_i >= 0     for all j, k   (row ord_k_j)
          sum_i b_i x_i >= B_lo                                 (row cap_lo)
          sum_i b_i x_i <= B_hi        if B_hi is finite        (row cap_hi)
          x binary, p and q free

Variables are 1-based: ``x_i`` selects item i, ``p_k`` is the dual of rank k
and ``q_j`` the dual of objective j.  For a fixed x the inner minimum over
(p, q) is the assignment-LP dual of sum_k w_k F_(k)(x), so the model's optimum
is the OWA optimum for any nonnegative weights.
"""

from __future__ import annotations

from pathlib import Path

from owagg.core import KnapsackInstance

_TERMS_PER_LINE = 8


def _linear(terms: list[tuple[float, str]]) -> list[str]:
    parts = []
    for coef, var in terms:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = var if mag == 1 else f"{mag!r} {var}"
        parts.append(f"{sign} {body}")
    if parts and parts[0].startswith("+ "):
        parts[0] = parts[0][2:]
    return [" ".join(parts[i:i + _TERMS_PER_LINE]) for i in range(0, len(parts), _TERMS_PER_LINE)]


def _row(name: str, terms, sense: str, rhs: float) -> list[str]:
    chunks = _linear(terms) or ["0 x_1"]
    out = [f" {name}: {chunks[0]}"] + [f"   {c}" for c in chunks[1:]]
    out[-1] += f" {sense} {float(rhs)!r}"
    return out


def format_mip(inst: KnapsackInstance) -> str:
    n, K = inst.n, inst.K
    C = inst.costs.entries
    w = inst.owa_weights.array
    lines = [
        f"\\ OWA Min-Knapsack {inst.name}".rstrip(),
        f"\\ n={n} K={K}; x_i items, p_k rank duals, q_j objective duals",
        "Minimize",
    ]
    obj = []
    for k in range(1, K + 1):
        obj += [(1.0, f"p_{k}"), (1.0, f"q_{k}")]
    chunks = _linear(obj)
    lines.append(f" obj: {chunks[0]}")
    lines += [f"   {c}" for c in chunks[1:]]
    lines.append("Subject To")
    load = [(float(bi), f"x_{i + 1}") for i, bi in enumerate(inst.b) if bi != 0]
    lines += _row("cap_lo", load, ">=", inst.B_lo)
    if inst.B_hi is not None:
        lines += _row("cap_hi", load, "<=", inst.B_hi)
    for k in range(K):
        for j in range(K):
            terms = [(1.0, f"p_{k + 1}"), (1.0, f"q_{j + 1}")]
            terms += [
                (-float(w[k] * C[i, j]), f"x_{i + 1}")
                for i in range(n)
                if w[k] * C[i, j] != 0
            ]
            lines += _row(f"ord_{k + 1}_{j + 1}", terms, ">=", 0.0)
    lines.append("Bounds")
    lines += [f" p_{k} free" for k in range(1, K + 1)]
    lines += [f" q_{k} free" for k in range(1, K + 1)]
    lines.append("Binaries")
    xs = [f"x_{i}" for i in range(1, n + 1)]
    lines += [" " + " ".join(xs[i:i + 10]) for i in range(0, n, 10)]
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_mip(inst: KnapsackInstance, path) -> Path:
    path = Path(path)
    path.write_text(format_mip(inst))
    return path
