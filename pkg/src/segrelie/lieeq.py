"""Linear determining (Lie) equations for infinitesimal symmetries of a PDESystemS."""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra.linalg import sparse_rref
from .algebra.polynomial import glex_key
from .algebra.series import TruncatedSeries
from .fields import (ConcreteVectorField, LinearForm, SymbolicVectorField, UnknownSymbol,
                     prolong_recursive, z_variables)
from .systems import (PDESystemS, derive_full_second_order, involutivity_residuals, w_names)

DEFAULT_SEED = 0x5EC4E
SAMPLE_POINTS = 5
NW_START = 4


def column_key(s: UnknownSymbol) -> tuple:
    """Column order for eliminations: highest order first, later unknowns
    (eta before theta) first, then graded-lex on the derivative index."""
    return (-s.order, -s.func, glex_key(s.exps))


def sample_points(nz: int, seed: int = DEFAULT_SEED, count: int = SAMPLE_POINTS) -> list[tuple[Fraction, ...]]:
    """Seeded rational points with small numerators and denominators."""
    rng = random.Random(seed)
    return [tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 7)) for _ in range(nz)) for _ in range(count)]


@dataclass(frozen=True)
class LinearPDESystem:
    """Homogeneous linear equations sum c_S(z) * S = 0 in derivatives S of the unknowns."""

    variables: tuple[str, ...]
    unknowns: tuple[str, ...]
    equations: tuple[LinearForm, ...]
    cap: int | None = None
    tags: tuple[str, ...] | None = None
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        nz = len(self.variables)
        eqs, tags = [], []
        given = self.tags if self.tags is not None else tuple("" for _ in self.equations)
        if len(given) != len(self.equations):
            raise ValueError("one tag per equation")
        for e, t in zip(self.equations, given):
            if e.variables != tuple(self.variables) or e.nz != nz:
                raise ValueError("equation context differs from the system's variables")
            for s in e.terms:
                if not 0 <= s.func < len(self.unknowns):
                    raise ValueError(f"equation refers to unknown #{s.func + 1}, system has {len(self.unknowns)}")
            if not e.is_zero():
                eqs.append(e)
                tags.append(t)
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "unknowns", tuple(self.unknowns))
        object.__setattr__(self, "equations", tuple(eqs))
        object.__setattr__(self, "tags", tuple(tags))

    @property
    def nz(self) -> int:
        return len(self.variables)

    def order(self) -> int:
        return max((e.order() for e in self.equations), default=0)

    def orders(self) -> list[int]:
        return [e.order() for e in self.equations]

    def is_exact(self) -> bool:
        return all(c.is_exact() for e in self.equations for c in e.terms.values())

    def label(self, s: UnknownSymbol) -> str:
        tail = "".join(name * e for name, e in zip(self.variables, s.exps))
        head = self.unknowns[s.func]
        return head if not tail else f"{head}_{tail}"

    def format_equation(self, e: LinearForm) -> str:
        parts = []
        for s in sorted(e.terms, key=column_key):
            c = e.terms[s]
            name = self.label(s)
            if c.is_exact() and c.poly.is_constant():
                v = c.poly.constant_term()
                body = name if abs(v) == 1 else f"{_fmt(abs(v))}*{name}"
                parts.append(("-" if v < 0 else "+", body))
            else:
                tail = "" if c.is_exact() else " + ..."
                parts.append(("+", f"({c.poly.to_str()}{tail})*{name}"))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out + " = 0"

    def with_equations(self, equations: Sequence[LinearForm], tags: Sequence[str] | None = None, **info) -> "LinearPDESystem":
        merged = dict(self.info)
        merged.update(info)
        return LinearPDESystem(self.variables, self.unknowns, tuple(equations), self.cap,
                               tuple(tags) if tags is not None else None, merged)

    def rows_at(self, point: Sequence, strict: bool = True, equations=None) -> list[dict[UnknownSymbol, Fraction]]:
        eqs = self.equations if equations is None else equations
        return [e.evaluate(point, strict) for e in eqs]

    def row_space_at(self, point: Sequence | None = None, strict: bool = True):
        """(columns, pivot symbols, reduced rows as {symbol: value}) at a point."""
        point = tuple(point) if point is not None else (0,) * self.nz
        rows = self.rows_at(point, strict)
        return reduced_row_space(rows)

    def generic_rank(self, seed: int = DEFAULT_SEED, points: int = SAMPLE_POINTS, equations=None) -> int:
        """Maximum rank over seeded sample points (coefficients of truncated
        series are summed as polynomials there)."""
        best = 0
        for p in sample_points(self.nz, seed, points):
            rows = self.rows_at(p, strict=False, equations=equations)
            _, piv, _ = reduced_row_space(rows)
            best = max(best, len(piv))
        return best


def _fmt(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def reduced_row_space(rows: Sequence[dict[UnknownSymbol, Fraction]], extra_columns=()):
    cols = sorted({s for r in rows for s in r} | set(extra_columns), key=column_key)
    index = {s: i for i, s in enumerate(cols)}
    pivots, reduced = sparse_rref({index[s]: v for s, v in r.items()} for r in rows)
    return (cols, [cols[p] for p in pivots],
            [{cols[c]: v for c, v in row.items()} for row in reduced])


def same_row_space(a: Sequence[dict], b: Sequence[dict]) -> bool:
    _, pa, ra = reduced_row_space(a)
    _, pb, rb = reduced_row_space(b)
    return pa == pb and ra == rb


def in_row_space(rows: Sequence[dict], candidate: dict) -> bool:
    _, piv, _ = reduced_row_space(rows)
    _, piv2, _ = reduced_row_space(list(rows) + [candidate])
    return len(piv) == len(piv2)


# ---------------------------------------------------------------------------
# generation


def lie_unknowns(n: int, m: int) -> tuple[str, ...]:
    return tuple(f"theta{j}" for j in range(1, n + 1)) + tuple(f"eta{k}" for k in range(1, m + 1))


def _w_cap(forms: Sequence[LinearForm]) -> int | None:
    cap = None
    for e in forms:
        for c in e.terms.values():
            wc = c.caps[1] if len(c.caps) > 1 else c.caps[0]
            if wc is not None:
                cap = wc if cap is None else min(cap, wc)
    return cap


def tangency_expressions(S: PDESystemS) -> list[tuple[str, LinearForm]]:
    """X^(2)(u^mu_ij - F^mu_ij) and X^(1)(v^k_j - G^k_j) restricted to the system,
    as linear forms over the base context (x, u, w_x)."""
    n, m = S.n, S.m
    V, blocks = S.variables, S.blocks
    nz = n + m
    derived = derive_full_second_order(S)
    X = SymbolicVectorField(n, m)
    P = prolong_recursive(X, 2)

    def lift(form: LinearForm) -> LinearForm:
        return form.reorder(V, blocks)

    def image(f):
        k, alpha = f
        if len(alpha) == 1:
            if k == 1:
                return TruncatedSeries.var(V, f"u1_{alpha[0]}", None, blocks)
            return S.g(k, alpha[0])
        return derived.f(k, alpha[0], alpha[1])

    theta = [lift(t) for t in P.theta]
    eta = [lift(e) for e in P.eta]
    eta1 = [P.table[(1, (j,))].substitute(image, lift) for j in range(1, n + 1)]

    def X1(f: TruncatedSeries) -> LinearForm:
        total = LinearForm(V, nz)
        for j in range(1, n + 1):
            total = total + theta[j - 1] * f.diff(f"x{j}")
        for k in range(1, m + 1):
            total = total + eta[k - 1] * f.diff(f"u{k}")
        for j in range(1, n + 1):
            d = f.diff(f"u1_{j}")
            if not d.is_zero():
                total = total + eta1[j - 1] * d
        return total

    out = []
    for mu in range(1, m + 1):
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                top = P.table[(mu, (i, j))].substitute(image, lift)
                out.append((f"u{mu}_{i}{j}", top - X1(derived.f(mu, i, j))))
    for k in range(2, m + 1):
        for j in range(1, n + 1):
            top = P.table[(k, (j,))].substitute(image, lift)
            out.append((f"u{k}_{j}", top - X1(S.g(k, j))))
    return out


def generate_lie_equations(S: PDESystemS, cap: int | None = None, seed: int = DEFAULT_SEED,
                           nw_start: int = NW_START) -> LinearPDESystem:
    """Determining equations: coefficients of the w_x-monomials of every
    restricted tangency condition, collected up to w_x-degree N_w.

    N_w starts at ``nw_start`` and grows until the generic rank is equal for two
    consecutive values, all monomials present are collected, or the w_x
    truncation of the inputs is reached.
    """
    n, m = S.n, S.m
    cap = S.cap if cap is None else cap
    inv = involutivity_residuals(S)
    notes = []
    if not inv.involutive:
        msg = "system is not involutive to cap; determining equations are generated regardless"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    exprs = tangency_expressions(S)
    wn = w_names(n)
    wcap = _w_cap([e for _, e in exprs])
    pieces: list[tuple[int, str, LinearForm]] = []
    for tag, e in exprs:
        for beta, form in sorted(e.split(wn).items(), key=lambda kv: glex_key(kv[0])):
            d = sum(beta)
            if wcap is not None and d > wcap:
                continue
            if cap is not None and not form.is_zero():
                form = LinearForm(form.variables, form.nz,
                                  {s: c.truncate(cap) if not c.is_exact() else c for s, c in form.terms.items()})
            pieces.append((d, f"{tag} w^{''.join(map(str, beta))}", form))
    zvars = z_variables(n, m)
    unknowns = lie_unknowns(n, m)
    top = max((d for d, _, _ in pieces), default=0)

    def system_upto(N):
        sel = [(t, f) for d, t, f in pieces if d <= N]
        return LinearPDESystem(zvars, unknowns, tuple(f for _, f in sel), cap, tuple(t for t, _ in sel))

    history = []
    N = nw_start if wcap is None else min(nw_start, wcap)
    reason = ""
    while True:
        sysN = system_upto(N)
        history.append((N, sysN.generic_rank(seed)))
        if N >= top:
            reason = "all w_x-monomials collected"
            break
        if wcap is not None and N >= wcap:
            reason = f"w_x truncation {wcap} reached"
            break
        if len(history) >= 2 and history[-1][1] == history[-2][1]:
            reason = "generic rank stable for two consecutive N_w"
            break
        N += 1
    info = {"n_w": N, "n_w_ranks": history, "n_w_reason": reason, "involutive": inv.involutive,
            "notes": notes, "n": n, "m": m, "seed": seed}
    return sysN.with_equations(sysN.equations, sysN.tags, **info)


def residual_of_field(S: PDESystemS | LinearPDESystem, X: ConcreteVectorField,
                      equations: LinearPDESystem | None = None) -> dict[str, TruncatedSeries]:
    """Every determining equation evaluated on X's coefficients."""
    R = equations
    if R is None:
        R = S if isinstance(S, LinearPDESystem) else generate_lie_equations(S)
    tau = X.tau()
    out = {}
    for k, (tag, e) in enumerate(zip(R.tags, R.equations)):
        out[tag or f"eq{k + 1}"] = e.apply(tau)
    return out
