"""Second-order systems solved for w = u^1, with first-order relations for v = (u^2..u^m).

    w_{x_i x_j} = F_ij(x, u, w_x),      v^k_{x_j} = G^k_j(x, u, w_x)

All right-hand sides are series in the base context
``x1..xn, u1..um, u1_1..u1_n``.  The first-order jets of w form their own
truncation block, so a cap may bound the (x, u)-degree and the w_x-degree
separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .algebra.polynomial import ContextError, Polynomial
from .algebra.series import TruncatedSeries
from .jets import JetExpr, fiber_name


def base_variables(n: int, m: int) -> tuple[str, ...]:
    return (tuple(f"x{i}" for i in range(1, n + 1)) + tuple(f"u{k}" for k in range(1, m + 1))
            + tuple(fiber_name(1, (j,)) for j in range(1, n + 1)))


def base_blocks(n: int, m: int) -> tuple[int, ...]:
    return (0,) * (n + m) + (1,) * n


def w_names(n: int) -> tuple[str, ...]:
    return tuple(fiber_name(1, (j,)) for j in range(1, n + 1))


def _as_base(value, n: int, m: int) -> TruncatedSeries:
    variables = base_variables(n, m)
    blocks = base_blocks(n, m)
    if isinstance(value, JetExpr):
        value = value.body
    if isinstance(value, Polynomial):
        return TruncatedSeries(value.reorder(variables), None, blocks)
    if isinstance(value, TruncatedSeries):
        if value.variables == variables and (value.blocks == blocks or value.is_exact()):
            return TruncatedSeries(value.poly, value.caps if value.blocks == blocks else None, blocks)
        if value.is_exact():
            return TruncatedSeries(value.poly.reorder(variables), None, blocks)
        if len(value.caps) == 1:
            # a total-degree cap also bounds each block separately
            return TruncatedSeries(value.poly.reorder(variables), (value.caps[0], value.caps[0]), blocks)
        raise ContextError("right-hand side has an incompatible block layout")
    if isinstance(value, int):
        return TruncatedSeries.constant(variables, value, None, blocks)
    raise TypeError(f"cannot use {type(value).__name__} as a right-hand side")


@dataclass(frozen=True)
class PDESystemS:
    n: int
    m: int
    F: Mapping[tuple[int, int], TruncatedSeries]
    G: Mapping[tuple[int, int], TruncatedSeries] = field(default_factory=dict)
    cap: int | None = None

    def __post_init__(self):
        n, m = self.n, self.m
        if n < 1 or m < 1:
            raise ValueError("need n, m >= 1")
        F = {}
        for (i, j), v in self.F.items():
            i, j = min(i, j), max(i, j)
            if not (1 <= i <= n and 1 <= j <= n):
                raise ValueError(f"F index ({i},{j}) out of range")
            if (i, j) in F:
                raise ValueError(f"F {i} {j} given twice")
            F[(i, j)] = _as_base(v, n, m)
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                F.setdefault((i, j), _as_base(0, n, m))
        G = {}
        for (k, j), v in self.G.items():
            if not (2 <= k <= m and 1 <= j <= n):
                raise ValueError(f"G index ({k},{j}) out of range")
            G[(k, j)] = _as_base(v, n, m)
        for k in range(2, m + 1):
            for j in range(1, n + 1):
                G.setdefault((k, j), _as_base(0, n, m))
        object.__setattr__(self, "F", dict(sorted(F.items())))
        object.__setattr__(self, "G", dict(sorted(G.items())))

    @property
    def variables(self) -> tuple[str, ...]:
        return base_variables(self.n, self.m)

    @property
    def blocks(self) -> tuple[int, ...]:
        return base_blocks(self.n, self.m)

    def f(self, i: int, j: int) -> TruncatedSeries:
        return self.F[(min(i, j), max(i, j))]

    def g(self, k: int, j: int) -> TruncatedSeries:
        return self.G[(k, j)]

    def series(self, value) -> TruncatedSeries:
        return _as_base(value, self.n, self.m)

    def is_exact(self) -> bool:
        return all(v.is_exact() for v in list(self.F.values()) + list(self.G.values()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PDESystemS):
            return NotImplemented
        return ((self.n, self.m, self.cap) == (other.n, other.m, other.cap)
                and self.F == other.F and self.G == other.G)

    def __hash__(self):
        return hash((self.n, self.m, self.cap, tuple(self.F.items()), tuple(self.G.items())))


def restricted_total_derivative(e, i: int, S: PDESystemS) -> TruncatedSeries:
    """D_i followed by w_{ij} -> F_ij, v^k_j -> G^k_j, with ``i`` 1-based."""
    if not 1 <= i <= S.n:
        raise IndexError(f"independent-variable index {i} out of range 1..{S.n}")
    e = S.series(e)
    out = e.diff(f"x{i}")
    out = out + e.diff("u1") * TruncatedSeries.var(S.variables, fiber_name(1, (i,)), None, S.blocks)
    for k in range(2, S.m + 1):
        out = out + e.diff(f"u{k}") * S.g(k, i)
    for j in range(1, S.n + 1):
        out = out + e.diff(fiber_name(1, (j,))) * S.f(i, j)
    return out


@dataclass(frozen=True)
class DerivedSystem:
    system: PDESystemS
    Fk: Mapping[tuple[int, int, int], TruncatedSeries]

    def f(self, k: int, i: int, j: int) -> TruncatedSeries:
        return self.Fk[(k, min(i, j), max(i, j))]


def derive_full_second_order(S: PDESystemS) -> DerivedSystem:
    """u^k_{ij} on the system: F for k = 1, D^_j G^k_i for k >= 2 (stored i <= j)."""
    out = {}
    for (i, j), v in S.F.items():
        out[(1, i, j)] = v
    for k in range(2, S.m + 1):
        for i in range(1, S.n + 1):
            for j in range(i, S.n + 1):
                out[(k, i, j)] = restricted_total_derivative(S.g(k, i), j, S)
    return DerivedSystem(S, dict(sorted(out.items())))


@dataclass(frozen=True)
class InvolutivityReport:
    residuals: dict[str, TruncatedSeries]
    cap: int | None

    @property
    def involutive(self) -> bool:
        return all(r.is_zero() for r in self.residuals.values())

    def nonzero(self) -> dict[str, TruncatedSeries]:
        return {k: v for k, v in self.residuals.items() if not v.is_zero()}


def involutivity_residuals(S: PDESystemS) -> InvolutivityReport:
    """Cross-derivative conditions D^_l F_ij - D^_j F_il (j < l) and D^_j G^k_i - D^_i G^k_j (i < j)."""
    res: dict[str, TruncatedSeries] = {}
    n = S.n
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for l in range(j + 1, n + 1):
                res[f"F {i} {j} {l}"] = (restricted_total_derivative(S.f(i, j), l, S)
                                        - restricted_total_derivative(S.f(i, l), j, S))
    for k in range(2, S.m + 1):
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                res[f"G {k} {i} {j}"] = (restricted_total_derivative(S.g(k, i), j, S)
                                        - restricted_total_derivative(S.g(k, j), i, S))
    return InvolutivityReport(res, S.cap)
