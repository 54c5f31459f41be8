"""Plain-text instance files.

Layout (blank lines and ``#`` comments are ignored)::

    # owagg instance v1
    name <free text, may be empty>
    n <items>
    K <objectives>
    B_lo <float>
    B_hi <float | none>
    items
    <b_1> <c_11> ... <c_1K>
    ...                          n rows: item weight, then K costs
    weights <float | exact>
    <w_1> ... <w_K>
    end

Floats are written with ``repr`` (shortest round-trip form).  ``weights exact``
stores :class:`~fractions.Fraction` weights as ``p/q`` tokens, so exact weight
vectors survive a round trip unchanged.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np

from owagg.core import CostMatrix, KnapsackInstance, ValidationError, WeightVector

HEADER = "# owagg instance v1"


class InstanceFormatError(ValidationError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


def format_instance(inst: KnapsackInstance) -> str:
    w = inst.owa_weights
    lines = [
        HEADER,
        f"name {inst.name}".rstrip(),
        f"n {inst.n}",
        f"K {inst.K}",
        f"B_lo {float(inst.B_lo)!r}",
        f"B_hi {'none' if inst.B_hi is None else repr(float(inst.B_hi))}",
        "items",
    ]
    for bi, row in zip(inst.b.tolist(), inst.costs.entries.tolist()):
        lines.append(" ".join(repr(v) for v in [bi, *row]))
    if w.exact:
        lines += ["weights exact", " ".join(str(Fraction(x)) for x in w)]
    else:
        lines += ["weights float", " ".join(repr(float(x)) for x in w)]
    lines.append("end")
    return "\n".join(lines) + "\n"


def write_instance(inst: KnapsackInstance, path) -> None:
    Path(path).write_text(format_instance(inst))


class _Lines:
    def __init__(self, text: str):
        self._items = [
            (i, line.strip())
            for i, line in enumerate(text.splitlines(), 1)
            if line.strip() and not line.lstrip().startswith("#")
        ]
        self._pos = 0
        self.lineno = 0

    def next(self, what: str) -> str:
        if self._pos >= len(self._items):
            raise InstanceFormatError(f"unexpected end of file, expected {what}", self.lineno + 1)
        self.lineno, line = self._items[self._pos]
        self._pos += 1
        return line

    def keyed(self, key: str) -> str:
        line = self.next(key)
        head, _, rest = line.partition(" ")
        if head != key:
            raise InstanceFormatError(f"expected field {key!r}, found {head!r}", self.lineno)
        return rest.strip()

    def error(self, message: str) -> InstanceFormatError:
        return InstanceFormatError(message, self.lineno)

    def at_end(self) -> bool:
        return self._pos >= len(self._items)


def _number(tok: str, field: str, lines: _Lines, exact: bool = False):
    try:
        return Fraction(tok) if exact else float(tok)
    except (ValueError, ZeroDivisionError):
        raise lines.error(f"field {field!r}: cannot parse {tok!r} as a number") from None


def _count(lines: _Lines, key: str) -> int:
    tok = lines.keyed(key)
    try:
        val = int(tok)
    except ValueError:
        raise lines.error(f"field {key!r}: expected an integer, found {tok!r}") from None
    if val < 1:
        raise lines.error(f"field {key!r} must be >= 1")
    return val


def parse_instance(text: str) -> KnapsackInstance:
    lines = _Lines(text)
    line = lines.next("name")
    if line != "name" and not line.startswith("name "):
        raise lines.error(f"expected field 'name', found {line.split()[0]!r}")
    name = line[5:].strip()
    n = _count(lines, "n")
    K = _count(lines, "K")
    B_lo = _number(lines.keyed("B_lo"), "B_lo", lines)
    tok = lines.keyed("B_hi")
    B_hi = None if tok == "none" else _number(tok, "B_hi", lines)
    if lines.next("items") != "items":
        raise lines.error("expected 'items'")
    rows = []
    for i in range(n):
        toks = lines.next(f"item row {i + 1}").split()
        if len(toks) != K + 1:
            raise lines.error(f"item row {i + 1}: expected {K + 1} numbers, found {len(toks)}")
        rows.append([_number(t, f"item {i + 1}", lines) for t in toks])
    kind = lines.keyed("weights")
    if kind not in ("exact", "float"):
        raise lines.error(f"field 'weights': expected 'exact' or 'float', found {kind!r}")
    toks = lines.next("weight values").split()
    if len(toks) != K:
        raise lines.error(f"expected {K} weights, found {len(toks)}")
    w = tuple(_number(t, "weights", lines, exact=kind == "exact") for t in toks)
    if lines.next("end") != "end":
        raise lines.error("expected 'end'")
    if not lines.at_end():
        lines.next("")
        raise lines.error("content after 'end'")
    arr = np.array(rows)
    return KnapsackInstance(arr[:, 0], B_lo, CostMatrix(arr[:, 1:]), WeightVector(w), B_hi, name)


def read_instance(path) -> KnapsackInstance:
    return parse_instance(Path(path).read_text())
