"""Formal analysis of linear PDE systems: completion, prolongation, symbols,
finite type, parametric derivatives and a polynomial-solution oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb
from typing import Callable, Sequence

from .algebra.linalg import ExactMatrix, nullspace_from_rref, sparse_rref
from .algebra.polynomial import Polynomial, as_fraction, glex_key
from .fields import ConcreteVectorField, LinearForm, UnknownSymbol
from .lieeq import LinearPDESystem, column_key

DEFAULT_RMAX = 6


class NotFiniteTypeError(ValueError):
    """Raised when an operation needs finite type and it was not established."""


def multi_indices(nz: int, k: int) -> list[tuple[int, ...]]:
    out = []
    for combo in combinations_with_replacement(range(nz), k):
        e = [0] * nz
        for a in combo:
            e[a] += 1
        out.append(tuple(e))
    return sorted(out, key=glex_key)


def _sub(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x - y for x, y in zip(a, b))


def _add(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


class _Derivatives:
    """Memoized d^beta e for one equation."""

    def __init__(self, e: LinearForm):
        self.cache = {(0,) * e.nz: e}

    def get(self, beta: tuple[int, ...]) -> LinearForm:
        if beta not in self.cache:
            a = max(i for i, b in enumerate(beta) if b)
            prev = list(beta)
            prev[a] -= 1
            self.cache[beta] = self.get(tuple(prev)).diff(a)
        return self.cache[beta]


def _origin(R: LinearPDESystem, y0) -> tuple[Fraction, ...]:
    if y0 is None:
        return (Fraction(0),) * R.nz
    y0 = tuple(as_fraction(v) for v in y0)
    if len(y0) != R.nz:
        raise ValueError(f"base point has {len(y0)} coordinates, expected {R.nz}")
    return y0


def all_symbols(K: int, nz: int, order: int) -> list[UnknownSymbol]:
    return [UnknownSymbol(j, a) for j in range(K) for a in multi_indices(nz, order)]


def jet_count(K: int, nz: int, order: int) -> int:
    """Number of derivatives of K unknowns in nz variables of order <= ``order``."""
    return 0 if order < 0 else K * comb(nz + order, order)


# ---------------------------------------------------------------------------
# completion and prolongation


def complete(R: LinearPDESystem, order: int | None = None) -> LinearPDESystem:
    """Add every derivative of each lower-order equation up to the system order."""
    q = R.order() if order is None else order
    eqs, tags = list(R.equations), list(R.tags)
    for e, t in zip(R.equations, R.tags):
        p = e.order()
        if p >= q:
            continue
        D = _Derivatives(e)
        for k in range(1, q - p + 1):
            for beta in multi_indices(R.nz, k):
                eqs.append(D.get(beta))
                tags.append(f"d{''.join(map(str, beta))}({t})")
    return R.with_equations(eqs, tags, completed_to=q)


def prolong_linear(R: LinearPDESystem, r: int) -> LinearPDESystem:
    """Append all derivatives of order 1..r of every equation."""
    if r < 0:
        raise ValueError("r must be non-negative")
    if r == 0:
        return R
    eqs, tags = list(R.equations), list(R.tags)
    for e, t in zip(R.equations, R.tags):
        D = _Derivatives(e)
        for k in range(1, r + 1):
            for beta in multi_indices(R.nz, k):
                eqs.append(D.get(beta))
                tags.append(f"d{''.join(map(str, beta))}({t})")
    return R.with_equations(eqs, tags)


# ---------------------------------------------------------------------------
# symbols


@dataclass(frozen=True)
class SymbolSpace:
    order: int
    coordinates: tuple[UnknownSymbol, ...]
    basis: tuple[tuple[Fraction, ...], ...]
    rank: int

    @property
    def dim(self) -> int:
        return len(self.basis)

    def is_zero(self) -> bool:
        return not self.basis


def _symbol_from_rows(order: int, coords: list[UnknownSymbol], rows: list[dict[UnknownSymbol, Fraction]]) -> SymbolSpace:
    index = {s: i for i, s in enumerate(coords)}
    pivots, reduced = sparse_rref({index[s]: v for s, v in r.items() if v} for r in rows)
    basis = nullspace_from_rref(pivots, reduced, len(coords))
    return SymbolSpace(order, tuple(coords), tuple(basis), len(pivots))


def _coords(R: LinearPDESystem, s: int) -> list[UnknownSymbol]:
    return sorted(all_symbols(len(R.unknowns), R.nz, s), key=lambda c: (c.func, glex_key(c.exps)))


def _top_rows(e: LinearForm, y0, strict=True) -> tuple[int, dict[UnknownSymbol, Fraction]]:
    p = e.order()
    row = {}
    for s, c in e.terms.items():
        if s.order == p:
            v = c.evaluate(y0, strict)
            if v:
                row[s] = v
    return p, row


def symbol_at(R: LinearPDESystem, y0=None, s: int | None = None) -> SymbolSpace:
    """Nullspace of the order-s coefficient matrix of the equations of order s."""
    y0 = _origin(R, y0)
    s = R.order() if s is None else s
    rows = []
    for e in R.equations:
        if e.order() == s:
            rows.append(_top_rows(e, y0)[1])
    return _symbol_from_rows(s, _coords(R, s), rows)


def prolonged_symbol(R: LinearPDESystem, y0=None, s: int | None = None) -> SymbolSpace:
    """Symbol at order s of the completed system prolonged to order s.

    The top-order part of d^beta e is the top-order part of e shifted by
    beta, so rows come straight from the top-order coefficients at y0.
    """
    y0 = _origin(R, y0)
    s = R.order() if s is None else s
    rows = []
    for e in R.equations:
        p, top = _top_rows(e, y0)
        if p > s or not top:
            continue
        for beta in multi_indices(R.nz, s - p):
            rows.append({UnknownSymbol(t.func, _add(t.exps, beta)): v for t, v in top.items()})
    return _symbol_from_rows(s, _coords(R, s), rows)


@dataclass(frozen=True)
class TypeReport:
    finite: bool
    type: int | None
    order: int
    symbol_dims: dict[int, int]
    r_max: int
    point: tuple[Fraction, ...]


def finite_type(R: LinearPDESystem, y0=None, r_max: int = DEFAULT_RMAX) -> TypeReport:
    """Smallest r with G_{q+r}(y0) = 0 for the completed system, if r <= r_max."""
    if r_max < 0:
        raise ValueError("r_max must be non-negative")
    y0 = _origin(R, y0)
    q = R.order()
    dims = {}
    for r in range(0, r_max + 1):
        G = prolonged_symbol(R, y0, q + r)
        dims[q + r] = G.dim
        if G.is_zero():
            return TypeReport(True, r, q, dims, r_max, y0)
    return TypeReport(False, None, q, dims, r_max, y0)


# ---------------------------------------------------------------------------
# dimension bound and parametric derivatives


@dataclass(frozen=True)
class DimBoundReport:
    jet_count: int
    lower_rank: int
    parametric: tuple[UnknownSymbol, ...]
    parametric_labels: tuple[str, ...]
    bound: int
    order: int
    type: int
    point: tuple[Fraction, ...]

    @property
    def parametric_count(self) -> int:
        return len(self.parametric)


def prolonged_rows(R: LinearPDESystem, N: int, y0, strict: bool = True) -> list[dict[UnknownSymbol, Fraction]]:
    """All derivatives of every equation up to order N, evaluated at y0."""
    rows = []
    for e in R.equations:
        p = e.order()
        D = _Derivatives(e)
        for k in range(0, N - p + 1):
            for beta in multi_indices(R.nz, k):
                row = D.get(beta).evaluate(y0, strict)
                if row:
                    rows.append(row)
    return rows


def dim_bound(R: LinearPDESystem, y0=None, r_max: int = DEFAULT_RMAX,
              type_report: TypeReport | None = None) -> DimBoundReport:
    """Number of parametric derivatives of order <= q + type - 1 at y0.

    The prolonged system R_{q+type} is evaluated at y0 and reduced with the
    highest-order columns first.  Its symbol is zero, so every top-order jet is
    principal; what remains is the algebraic system L on the jets of order
    <= q + type - 1, and its free columns are the parametric derivatives.
    """
    y0 = _origin(R, y0)
    rep = type_report or finite_type(R, y0, r_max)
    if not rep.finite:
        raise NotFiniteTypeError(f"finite type not decided within r_max={rep.r_max}")
    N = rep.order + rep.type
    K, nz = len(R.unknowns), R.nz
    cols = sorted((s for k in range(N + 1) for s in all_symbols(K, nz, k)), key=column_key)
    index = {s: i for i, s in enumerate(cols)}
    rows = prolonged_rows(R, N, y0)
    pivots, _ = sparse_rref({index[s]: v for s, v in r.items()} for r in rows)
    top = K * comb(nz + N - 1, N)
    lower = jet_count(K, nz, N - 1)
    pset = set(pivots)
    free = [cols[i] for i in range(len(cols)) if i not in pset]
    if any(s.order == N for s in free):
        raise AssertionError("top-order jets must all be principal when the symbol vanishes")
    free.sort(key=lambda s: (s.order, s.func, glex_key(s.exps)))
    lower_rank = len(pivots) - top
    return DimBoundReport(lower, lower_rank, tuple(free), tuple(R.label(s) for s in free),
                          lower - lower_rank, N - 1, rep.type, y0)


# ---------------------------------------------------------------------------
# polynomial solutions


@dataclass(frozen=True)
class PolynomialSolutions:
    dimension: int
    degree: int
    basis: tuple[tuple[Polynomial, ...], ...]

    def fields(self, n: int, m: int) -> list[ConcreteVectorField]:
        return [ConcreteVectorField(n, m, tuple(b[:n]), tuple(b[n:])) for b in self.basis]


def _falling(e: int, d: int) -> int:
    out = 1
    for k in range(d):
        out *= e - k
    return out


def polynomial_solutions(R: LinearPDESystem, d_max: int) -> PolynomialSolutions:
    """All solutions with every unknown a polynomial of degree <= d_max."""
    if not R.is_exact():
        raise ValueError("polynomial_solutions needs exact (polynomial) coefficients")
    K, nz = len(R.unknowns), R.nz
    monos = [g for k in range(d_max + 1) for g in multi_indices(nz, k)]
    columns = [(j, g) for j in range(K) for g in monos]
    col_index = {c: i for i, c in enumerate(columns)}
    rows: list[dict[int, Fraction]] = []
    for e in R.equations:
        acc: dict[tuple[int, ...], dict[int, Fraction]] = {}
        for s, c in e.terms.items():
            for g in monos:
                if any(a < b for a, b in zip(g, s.exps)):
                    continue
                f = 1
                for a, b in zip(g, s.exps):
                    f *= _falling(a, b)
                base = _sub(g, s.exps)
                ci = col_index[(s.func, g)]
                for cm, cv in c.poly.terms.items():
                    key = _add(cm, base)
                    row = acc.setdefault(key, {})
                    v = row.get(ci, 0) + cv * f
                    if v:
                        row[ci] = v
                    else:
                        row.pop(ci, None)
        rows.extend(r for r in acc.values() if r)
    pivots, reduced = sparse_rref(rows)
    null = nullspace_from_rref(pivots, reduced, len(columns))
    basis = []
    for vec in null:
        polys = []
        for j in range(K):
            terms = {g: vec[col_index[(j, g)]] for g in monos if vec[col_index[(j, g)]]}
            polys.append(Polynomial(R.variables, terms))
        basis.append(tuple(polys))
    return PolynomialSolutions(len(basis), d_max, tuple(basis))


# ---------------------------------------------------------------------------
# constant-coefficient systems


def _check_constant_homogeneous(R: LinearPDESystem) -> None:
    for e in R.equations:
        for c in e.terms.values():
            if not (c.is_exact() and c.poly.is_constant()):
                raise ValueError("constant_coeff_Vs needs constant coefficients")
        if len({s.order for s in e.terms}) > 1:
            raise ValueError("constant_coeff_Vs needs every equation to be order-homogeneous")


def constant_coeff_Vs(R: LinearPDESystem, s: int) -> SymbolSpace:
    """V_s = {v of order s : sum_alpha a^k_{i alpha} v^i_{alpha+beta} = 0 for all k, |beta| = s - q_k}."""
    _check_constant_homogeneous(R)
    rows = []
    for e in R.equations:
        q = e.order()
        if q > s:
            continue
        top = {t: c.poly.constant_term() for t, c in e.terms.items()}
        for beta in multi_indices(R.nz, s - q):
            rows.append({UnknownSymbol(t.func, _add(t.exps, beta)): v for t, v in top.items()})
    return _symbol_from_rows(s, _coords(R, s), rows)


def characteristic_matrix(R: LinearPDESystem, y0=None, lam: Sequence = ()) -> tuple[ExactMatrix, bool]:
    """sigma_lambda(y0): rows are top-order equations, columns the unknowns."""
    y0 = _origin(R, y0)
    lam = tuple(as_fraction(v) for v in lam)
    if len(lam) != R.nz:
        raise ValueError(f"lambda needs {R.nz} components")
    q = R.order()
    K = len(R.unknowns)
    rows = []
    for e in R.equations:
        p, top = _top_rows(e, y0)
        if p != q:
            continue
        row = [Fraction(0)] * K
        for s, v in top.items():
            w = v
            for l, k in zip(lam, s.exps):
                w *= l ** k
            row[s.func] += w
        rows.append(row)
    M = ExactMatrix.from_rows(rows, K)
    return M, M.rank() == K


# ---------------------------------------------------------------------------
# deformations


@dataclass(frozen=True)
class DeformationSample:
    epsilon: Fraction
    type: int | None
    bound: int | None
    monotone: bool
    note: str = ""


@dataclass(frozen=True)
class DeformationReport:
    base: DeformationSample
    samples: tuple[DeformationSample, ...]

    @property
    def monotone(self) -> bool:
        return all(s.monotone for s in self.samples)


def _analyze(R: LinearPDESystem, y0, r_max) -> tuple[int | None, int | None, str]:
    rep = finite_type(R, y0, r_max)
    if not rep.finite:
        return None, None, f"finite type not decided within r_max={r_max}"
    return rep.type, dim_bound(R, y0, r_max, rep).bound, ""


def deformation_monotonicity_check(family: Callable[[Fraction], LinearPDESystem], samples: Sequence,
                                   y0=None, r_max: int = DEFAULT_RMAX) -> DeformationReport:
    """Compare type and dimension bound at each sampled epsilon with epsilon = 0."""
    t0, b0, note0 = _analyze(family(Fraction(0)), y0, r_max)
    if t0 is None:
        raise NotFiniteTypeError("the epsilon = 0 system is not of finite type within r_max")
    base = DeformationSample(Fraction(0), t0, b0, True, note0)
    out = []
    for eps in samples:
        eps = as_fraction(eps)
        t, b, note = _analyze(family(eps), y0, r_max)
        ok = t is not None and t <= t0 and b <= b0
        if not ok and not note:
            note = "monotonicity violated (epsilon may be too large)"
        out.append(DeformationSample(eps, t, b, ok, note))
    return DeformationReport(base, tuple(out))
