"""Natural coordinates on jet spaces J^r(n, m) and the total derivative."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations_with_replacement
from math import comb
from typing import Sequence

from .algebra.polynomial import Polynomial
from .algebra.series import TruncatedSeries

_FIBER_RE = re.compile(r"^u(\d+)_(\d+)$")


def sorted_index(alpha: Sequence[int]) -> tuple[int, ...]:
    return tuple(sorted(alpha))


def fiber_name(k: int, alpha: Sequence[int]) -> str:
    """Name of u^k_alpha; ``alpha`` uses 1-based variable indices, any order."""
    alpha = sorted_index(alpha)
    if not alpha:
        return f"u{k}"
    return f"u{k}_" + "".join(str(a) for a in alpha)


def parse_jet_name(name: str) -> tuple[int, tuple[int, ...]] | None:
    """``u<k>`` or ``u<k>_<digits>`` -> (k, sorted alpha); None for anything else."""
    m = _FIBER_RE.match(name)
    if m:
        return int(m.group(1)), sorted_index(int(d) for d in m.group(2))
    if re.fullmatch(r"u\d+", name):
        return int(name[1:]), ()
    return None


@dataclass(frozen=True)
class JetContext:
    n: int
    m: int
    order: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.order < 0:
            raise ValueError("need n, m >= 1 and order >= 0")
        if self.n > 9:
            raise ValueError("jet names use one digit per index; n <= 9 is supported")

    @cached_property
    def variables(self) -> tuple[str, ...]:
        names = [f"x{i}" for i in range(1, self.n + 1)]
        names += [f"u{k}" for k in range(1, self.m + 1)]
        for s in range(1, self.order + 1):
            for k in range(1, self.m + 1):
                for alpha in combinations_with_replacement(range(1, self.n + 1), s):
                    names.append(fiber_name(k, alpha))
        return tuple(names)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.variables)}

    def index(self, name: str) -> int:
        name = self.normalize(name)
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"{name!r} is not a coordinate of J^{self.order}({self.n},{self.m})") from None

    def normalize(self, name: str) -> str:
        parsed = parse_jet_name(name)
        if parsed is None:
            return name
        k, alpha = parsed
        return fiber_name(k, alpha)

    def u(self, k: int, alpha: Sequence[int] = ()) -> str:
        name = fiber_name(k, alpha)
        self.index(name)
        return name

    def base_variables(self) -> tuple[str, ...]:
        return self.variables[: self.n + self.m]

    def fiber_of_order(self, s: int) -> list[tuple[int, tuple[int, ...]]]:
        return [(k, alpha) for k in range(1, self.m + 1)
                for alpha in combinations_with_replacement(range(1, self.n + 1), s)]

    def extend(self, order: int) -> "JetContext":
        return JetContext(self.n, self.m, max(order, self.order))

    def variable(self, name: str, cap=None) -> TruncatedSeries:
        return TruncatedSeries.var(self.variables, self.normalize(name), cap)


def jet_dimensions(n: int, m: int, r: int) -> dict:
    """Per-order fiber coordinate counts and the total dimension of J^r(n, m)."""
    ctx = JetContext(n, m, r)
    per_order = {s: m * comb(n + s - 1, s) for s in range(r + 1)}
    total = n + sum(per_order.values())
    assert total == len(ctx.variables) == n + m * comb(n + r, r)
    return {"per_order": per_order, "total": total, "coordinates": ctx.variables}


@dataclass(frozen=True)
class JetExpr:
    context: JetContext
    body: TruncatedSeries = field(compare=True)

    def __post_init__(self):
        if self.body.variables != self.context.variables:
            object.__setattr__(self, "body", self.body.reorder(self.context.variables))

    @classmethod
    def from_poly(cls, context: JetContext, poly: Polynomial, cap=None) -> "JetExpr":
        return cls(context, TruncatedSeries(poly.reorder(context.variables), cap))

    def max_fiber_order(self) -> int:
        top = 0
        for name in self.body.poly.used_variables():
            parsed = parse_jet_name(name)
            if parsed is not None:
                top = max(top, len(parsed[1]))
        return top

    def lift(self, order: int) -> "JetExpr":
        ctx = self.context.extend(order)
        if ctx == self.context:
            return self
        return JetExpr(ctx, self.body.reorder(ctx.variables))

    def __add__(self, other: "JetExpr") -> "JetExpr":
        a, b = _common(self, other)
        return JetExpr(a.context, a.body + b.body)

    def __sub__(self, other: "JetExpr") -> "JetExpr":
        a, b = _common(self, other)
        return JetExpr(a.context, a.body - b.body)

    def __mul__(self, other) -> "JetExpr":
        if isinstance(other, JetExpr):
            a, b = _common(self, other)
            return JetExpr(a.context, a.body * b.body)
        return JetExpr(self.context, self.body.scale(other))

    __rmul__ = __mul__

    def __str__(self) -> str:
        return str(self.body)


def _common(a: JetExpr, b: JetExpr) -> tuple[JetExpr, JetExpr]:
    if (a.context.n, a.context.m) != (b.context.n, b.context.m):
        raise ValueError("jet expressions over different (n, m)")
    order = max(a.context.order, b.context.order)
    return a.lift(order), b.lift(order)


def total_derivative(e: JetExpr, i: int) -> JetExpr:
    """D_i = d/dx_i + sum u^k_{alpha+i} d/du^k_alpha, with ``i`` 1-based.

    The result lives on a context one order higher than ``e``'s.
    """
    ctx = e.context
    if not 1 <= i <= ctx.n:
        raise IndexError(f"independent-variable index {i} out of range 1..{ctx.n}")
    big = ctx.extend(ctx.order + 1)
    body = e.body.reorder(big.variables)
    out = body.diff(f"x{i}")
    used = body.poly.used_variables()
    for k in range(1, ctx.m + 1):
        for s in range(0, ctx.order + 1):
            for alpha in combinations_with_replacement(range(1, ctx.n + 1), s):
                name = fiber_name(k, alpha)
                if name not in used:
                    continue
                image = TruncatedSeries.var(big.variables, fiber_name(k, alpha + (i,)))
                out = out + body.diff(name) * image
    return JetExpr(big, out)
