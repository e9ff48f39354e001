"""Vector fields on (x, u)-space, their prolongations to jets, and Lie-series flows.

A field X = sum theta_j d/dx_j + sum eta^k d/du^k has coefficients in one of
two rings:

* concrete: ``TruncatedSeries`` in z = (x, u);
* symbolic: ``LinearForm``, formal linear combinations of derivatives of the
  unknown functions theta_j, eta^k with series coefficients.

Both rings expose ``+ - scale diff is_zero``, and the prolongation code below
is written once against that interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import groupby
from math import factorial
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

from .algebra.polynomial import ContextError, Polynomial, as_fraction
from .algebra.series import TruncatedSeries
from .jets import fiber_name


def z_variables(n: int, m: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, n + 1)) + tuple(f"u{k}" for k in range(1, m + 1))


# ---------------------------------------------------------------------------
# unknown functions and linear forms in their derivatives


class UnknownSymbol(NamedTuple):
    """d^exps tau_func, with tau = (theta_1..theta_n, eta^1..eta^m), 0-based ``func``."""

    func: int
    exps: tuple[int, ...]

    @property
    def order(self) -> int:
        return sum(self.exps)

    def shifted(self, a: int, by: int = 1) -> "UnknownSymbol":
        e = list(self.exps)
        e[a] += by
        return UnknownSymbol(self.func, tuple(e))

    def label(self, n: int) -> str:
        """``theta1``, ``eta1_x1u1`` and so on."""
        head = f"theta{self.func + 1}" if self.func < n else f"eta{self.func - n + 1}"
        zn = z_variables(n, len(self.exps) - n)
        tail = "".join(name * e for name, e in zip(zn, self.exps))
        return head if not tail else f"{head}_{tail}"

    def jet_name(self) -> str:
        """Linear-system spelling ``t<j>_<digits>`` (digits index z, 1-based)."""
        digits = "".join(str(a + 1) * e for a, e in enumerate(self.exps))
        return f"t{self.func + 1}" + (f"_{digits}" if digits else "")


def symbol_sort_key(s: UnknownSymbol) -> tuple:
    return (s.order, s.func, tuple(-e for e in s.exps))


class LinearForm:
    """sum_S c_S(v) * S over UnknownSymbols S, coefficients series in ``variables``.

    The first ``nz`` variables are the z-coordinates the unknowns depend on;
    the remaining ones (if any) are parameters such as first-order jets.
    """

    __slots__ = ("variables", "nz", "terms")

    def __init__(self, variables: Sequence[str], nz: int, terms: Mapping[UnknownSymbol, TruncatedSeries] | None = None):
        self.variables = tuple(variables)
        self.nz = nz
        clean = {}
        for s, c in (terms or {}).items():
            if c.variables != self.variables:
                raise ContextError("coefficient context differs from the form's context")
            if not c.is_zero():
                clean[s] = c
        self.terms = clean

    @classmethod
    def symbol(cls, variables: Sequence[str], nz: int, s: UnknownSymbol, blocks=None) -> "LinearForm":
        return cls(variables, nz, {s: TruncatedSeries.constant(variables, 1, None, blocks)})

    def zero_like(self) -> "LinearForm":
        return LinearForm(self.variables, self.nz)

    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        return max((s.order for s in self.terms), default=-1)

    def symbols(self) -> list[UnknownSymbol]:
        return sorted(self.terms, key=symbol_sort_key)

    def _check(self, other: "LinearForm"):
        if self.variables != other.variables or self.nz != other.nz:
            raise ContextError("linear forms over different contexts")

    def __add__(self, other: "LinearForm") -> "LinearForm":
        self._check(other)
        out = dict(self.terms)
        for s, c in other.terms.items():
            out[s] = out[s] + c if s in out else c
        return LinearForm(self.variables, self.nz, out)

    def __neg__(self) -> "LinearForm":
        return LinearForm(self.variables, self.nz, {s: -c for s, c in self.terms.items()})

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + (-other)

    def scale(self, c) -> "LinearForm":
        c = as_fraction(c)
        return LinearForm(self.variables, self.nz, {s: v.scale(c) for s, v in self.terms.items()})

    def __mul__(self, other) -> "LinearForm":
        if isinstance(other, TruncatedSeries):
            return LinearForm(self.variables, self.nz, {s: c * other for s, c in self.terms.items()})
        return self.scale(other)

    __rmul__ = __mul__

    def diff(self, var: str | int) -> "LinearForm":
        """Total derivative in a z-variable (chain rule on the unknowns), or a
        plain partial in a parameter variable."""
        a = var if isinstance(var, int) else self.variables.index(var)
        out: dict[UnknownSymbol, TruncatedSeries] = {}
        for s, c in self.terms.items():
            dc = c.diff(a)
            if not dc.is_zero():
                out[s] = out[s] + dc if s in out else dc
            if a < self.nz:
                t = s.shifted(a)
                out[t] = out[t] + c if t in out else c
        return LinearForm(self.variables, self.nz, out)

    def reorder(self, variables: Sequence[str], blocks=None) -> "LinearForm":
        variables = tuple(variables)
        if variables[: self.nz] != self.variables[: self.nz]:
            raise ContextError("the z-coordinates must stay in front")
        return LinearForm(variables, self.nz, {s: c.reorder(variables, blocks) for s, c in self.terms.items()})

    def split(self, names: Sequence[str], max_degree: int | None = None) -> dict[tuple[int, ...], "LinearForm"]:
        """Coefficient forms of the monomials in ``names``; results live on z only."""
        names = tuple(names)
        zvars = self.variables[: self.nz]
        out: dict[tuple[int, ...], dict[UnknownSymbol, TruncatedSeries]] = {}
        for s, c in self.terms.items():
            zidx = [self.variables.index(v) for v in zvars]
            zblocks = tuple(c.blocks[i] for i in zidx)
            zcap = [c.caps[b] for b in sorted(set(zblocks))]
            zb = tuple(sorted(set(zblocks)).index(b) for b in zblocks)
            for beta, part in c.poly.coefficient_split(names).items():
                if max_degree is not None and sum(beta) > max_degree:
                    continue
                series = TruncatedSeries(part.reorder(zvars), tuple(zcap), zb)
                out.setdefault(beta, {})[s] = series
        return {b: LinearForm(zvars, self.nz, t) for b, t in out.items()
                if any(not v.is_zero() for v in t.values())}

    def evaluate(self, point: Sequence, strict: bool = True) -> dict[UnknownSymbol, Fraction]:
        out = {}
        for s, c in self.terms.items():
            v = c.evaluate(point, strict)
            if v:
                out[s] = v
        return out

    def apply(self, tau: Sequence[TruncatedSeries]) -> TruncatedSeries:
        """Substitute concrete functions tau_j(z) (series over this form's variables)."""
        total = TruncatedSeries.zero(self.variables)
        for s, c in self.terms.items():
            f = tau[s.func]
            for a, e in enumerate(s.exps):
                for _ in range(e):
                    f = f.diff(a)
            total = total + c * f
        return total

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearForm):
            return NotImplemented
        return self.variables == other.variables and self.nz == other.nz and self.terms == other.terms

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def to_str(self, n: int | None = None, style: str = "label") -> str:
        if not self.terms:
            return "0"
        if n is None:
            style = "jet"
        parts = []
        for s in sorted(self.terms, key=symbol_sort_key, reverse=True):
            name = s.label(n) if style == "label" else s.jet_name()
            c = self.terms[s]
            text = c.poly.to_str()
            if c.poly == 1:
                parts.append(("+", name))
            elif c.poly == -1:
                parts.append(("-", name))
            elif c.poly.is_constant() and c.is_exact():
                v = c.poly.constant_term()
                parts.append(("-" if v < 0 else "+", f"{abs(v)}*{name}"))
            else:
                parts.append(("+", f"({text}{'' if c.is_exact() else ' + ...'})*{name}"))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self):
        return self.to_str()

    __repr__ = __str__


# ---------------------------------------------------------------------------
# polynomials in fiber coordinates with ring coefficients

Fiber = tuple[int, tuple[int, ...]]     # (k, sorted alpha), |alpha| >= 1


def _fkey(f: Fiber):
    return (len(f[1]), f[0], f[1])


def _mono(factors: Iterable[Fiber]) -> tuple[Fiber, ...]:
    return tuple(sorted(((k, tuple(sorted(a))) for k, a in factors), key=_fkey))


class FiberPoly:
    """sum_mono c_mono * mono with ``mono`` a sorted tuple of fiber coordinates."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[Fiber, ...], object] | None = None):
        self.terms = {m: c for m, c in (terms or {}).items() if not c.is_zero()}

    @classmethod
    def const(cls, c) -> "FiberPoly":
        return cls({(): c})

    def add_term(self, factors: Iterable[Fiber], c, sign: int = 1) -> None:
        if c.is_zero():
            return
        m = _mono(factors)
        c = c if sign == 1 else c.scale(sign)
        if m in self.terms:
            s = self.terms[m] + c
            if s.is_zero():
                del self.terms[m]
            else:
                self.terms[m] = s
        else:
            self.terms[m] = c

    def __add__(self, other: "FiberPoly") -> "FiberPoly":
        out = FiberPoly(self.terms)
        for m, c in other.terms.items():
            out.add_term(m, c)
        return out

    def __neg__(self) -> "FiberPoly":
        return FiberPoly({m: c.scale(-1) for m, c in self.terms.items()})

    def __sub__(self, other: "FiberPoly") -> "FiberPoly":
        return self + (-other)

    def scale(self, c) -> "FiberPoly":
        return FiberPoly({m: v.scale(c) for m, v in self.terms.items()})

    def times(self, f: Fiber) -> "FiberPoly":
        return FiberPoly({_mono(m + (f,)): c for m, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=-1)

    def total_derivative(self, i: int, n: int, m: int) -> "FiberPoly":
        """D_i with 1-based ``i``; coefficients are differentiated in z by name."""
        out = FiberPoly()
        for mono, c in self.terms.items():
            out.add_term(mono, c.diff(f"x{i}"))
            for k in range(1, m + 1):
                out.add_term(mono + ((k, (i,)),), c.diff(f"u{k}"))
            for pos, (k, alpha) in enumerate(mono):
                rest = mono[:pos] + mono[pos + 1:]
                out.add_term(rest + ((k, alpha + (i,)),), c)
        return out

    def substitute(self, images: Callable[[Fiber], TruncatedSeries], lift: Callable[[object], object]):
        """Replace every fiber coordinate by a series; ``lift`` moves coefficients
        into the series' context.  Returns a ring element there."""
        total = None
        cache: dict[Fiber, TruncatedSeries] = {}
        for mono, c in self.terms.items():
            term = lift(c)
            for f in mono:
                if f not in cache:
                    cache[f] = images(f)
                term = term * cache[f]
            total = term if total is None else total + term
        return total

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiberPoly):
            return NotImplemented
        return self.terms == other.terms

    def to_str(self, coeff_str=str) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=lambda mo: (len(mo), [_fkey(f) for f in mo])):
            names = "*".join(fiber_name(*f) + (f"^{len(list(g))}" if mono.count(f) > 1 else "")
                             for f, g in groupby(mono))
            c = coeff_str(self.terms[mono])
            parts.append(f"({c})" + (f"*{names}" if names else ""))
        return " + ".join(parts)

    def __str__(self):
        return self.to_str()


# ---------------------------------------------------------------------------
# vector fields


@dataclass(frozen=True)
class SymbolicVectorField:
    n: int
    m: int

    @property
    def zvars(self) -> tuple[str, ...]:
        return z_variables(self.n, self.m)

    def coefficients(self) -> tuple[tuple[LinearForm, ...], tuple[LinearForm, ...]]:
        z = self.zvars
        nz = len(z)
        forms = [LinearForm.symbol(z, nz, UnknownSymbol(j, (0,) * nz)) for j in range(nz)]
        return tuple(forms[: self.n]), tuple(forms[self.n:])


@dataclass(frozen=True)
class ConcreteVectorField:
    n: int
    m: int
    theta: tuple[TruncatedSeries, ...]
    eta: tuple[TruncatedSeries, ...]

    def __post_init__(self):
        z = z_variables(self.n, self.m)
        if len(self.theta) != self.n or len(self.eta) != self.m:
            raise ValueError("coefficient count does not match (n, m)")
        fixed = []
        for c in self.theta + self.eta:
            if isinstance(c, Polynomial):
                c = TruncatedSeries.exact(c)
            if c.variables != z:
                c = c.reorder(z)
            fixed.append(c)
        object.__setattr__(self, "theta", tuple(fixed[: self.n]))
        object.__setattr__(self, "eta", tuple(fixed[self.n:]))

    @classmethod
    def from_polys(cls, n: int, m: int, theta: Sequence, eta: Sequence) -> "ConcreteVectorField":
        """Coefficients given as Polynomials (or expression strings via the parser)."""
        return cls(n, m, tuple(theta), tuple(eta))

    @property
    def zvars(self) -> tuple[str, ...]:
        return z_variables(self.n, self.m)

    def coefficients(self):
        return self.theta, self.eta

    def tau(self) -> tuple[TruncatedSeries, ...]:
        return self.theta + self.eta

    def __add__(self, other: "ConcreteVectorField") -> "ConcreteVectorField":
        return ConcreteVectorField(self.n, self.m, tuple(a + b for a, b in zip(self.theta, other.theta)),
                                   tuple(a + b for a, b in zip(self.eta, other.eta)))

    def scale(self, c) -> "ConcreteVectorField":
        return ConcreteVectorField(self.n, self.m, tuple(a.scale(c) for a in self.theta),
                                   tuple(a.scale(c) for a in self.eta))

    def apply(self, f: TruncatedSeries) -> TruncatedSeries:
        """X f for a series f over z."""
        out = TruncatedSeries.zero(f.variables)
        for j, c in enumerate(self.theta, 1):
            out = out + c * f.diff(f"x{j}")
        for k, c in enumerate(self.eta, 1):
            out = out + c * f.diff(f"u{k}")
        return out

    def vanishing_order(self) -> int:
        """Smallest total degree present in any coefficient (large if X = 0)."""
        lows = [c.poly.low_degree() for c in self.tau() if not c.is_zero()]
        return min(lows) if lows else 1 << 30


@dataclass
class ProlongedField:
    n: int
    m: int
    order: int
    theta: tuple
    eta: tuple
    table: dict[Fiber, FiberPoly]

    def coefficient(self, k: int, alpha: Sequence[int]) -> FiberPoly:
        return self.table[(k, tuple(sorted(alpha)))]

    def restrict(self, order: int) -> "ProlongedField":
        return ProlongedField(self.n, self.m, order, self.theta, self.eta,
                              {f: p for f, p in self.table.items() if len(f[1]) <= order})

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProlongedField):
            return NotImplemented
        return ((self.n, self.m, self.order) == (other.n, other.m, other.order)
                and self.theta == other.theta and self.eta == other.eta and self.table == other.table)

    def __str__(self) -> str:
        lines = []
        for (k, a), p in sorted(self.table.items(), key=lambda kv: _fkey(kv[0])):
            lines.append(f"eta{k}_{''.join(map(str, a))} = {p}")
        return "\n".join(lines)


def _jet_indices(n: int, s: int):
    from itertools import combinations_with_replacement
    return combinations_with_replacement(range(1, n + 1), s)


def prolong_recursive(X, r: int) -> ProlongedField:
    """Coefficients eta^mu_alpha for 1 <= |alpha| <= r by the standard recursion

        eta^mu_{alpha i} = D_i eta^mu_alpha - sum_j (D_i theta^j) u^mu_{alpha j}.
    """
    if r < 1:
        raise ValueError("prolongation order must be at least 1")
    n, m = X.n, X.m
    theta, eta = X.coefficients()
    Dtheta = {(i, j): FiberPoly.const(theta[j - 1]).total_derivative(i, n, m)
              for i in range(1, n + 1) for j in range(1, n + 1)}
    table: dict[Fiber, FiberPoly] = {}
    for mu in range(1, m + 1):
        table[(mu, ())] = FiberPoly.const(eta[mu - 1])
    for s in range(1, r + 1):
        for mu in range(1, m + 1):
            for alpha in _jet_indices(n, s):
                head, i = alpha[:-1], alpha[-1]
                acc = table[(mu, head)].total_derivative(i, n, m)
                for j in range(1, n + 1):
                    acc = acc - Dtheta[(i, j)].times((mu, tuple(sorted(head + (j,)))))
                table[(mu, alpha)] = acc
    for mu in range(1, m + 1):
        del table[(mu, ())]
    return ProlongedField(n, m, r, theta, eta, table)


def _d(c, *names):
    for v in names:
        c = c.diff(v)
    return c


def _fib(k: int, *alpha: int) -> Fiber:
    return (k, tuple(sorted(alpha)))


def closed_first_order(X, mu: int, i1: int) -> FiberPoly:
    n, m = X.n, X.m
    theta, eta = X.coefficients()
    e = eta[mu - 1]
    x = lambda i: f"x{i}"
    u = lambda k: f"u{k}"
    P = FiberPoly()
    P.add_term((), _d(e, x(i1)))
    for k in range(1, m + 1):
        P.add_term((_fib(k, i1),), _d(e, u(k)))
    for j in range(1, n + 1):
        P.add_term((_fib(mu, j),), _d(theta[j - 1], x(i1)), -1)
        for k in range(1, m + 1):
            P.add_term((_fib(k, i1), _fib(mu, j)), _d(theta[j - 1], u(k)), -1)
    return P


def closed_lambda(X, mu: int, i1: int, i2: int) -> FiberPoly:
    """The part of eta^mu_{i1 i2} that is linear in second-order jets."""
    n, m = X.n, X.m
    theta, eta = X.coefficients()
    e = eta[mu - 1]
    x = lambda i: f"x{i}"
    u = lambda k: f"u{k}"
    L = FiberPoly()
    for s in range(1, m + 1):
        L.add_term((_fib(s, i2, i1),), _d(e, u(s)))
    for p in range(1, n + 1):
        L.add_term((_fib(mu, i2, p),), _d(theta[p - 1], x(i1)), -1)
    for j in range(1, n + 1):
        L.add_term((_fib(mu, i1, j),), _d(theta[j - 1], x(i2)), -1)
    for p in range(1, n + 1):
        for q in range(1, m + 1):
            L.add_term((_fib(q, i2, i1), _fib(mu, p)), _d(theta[p - 1], u(q)), -1)
            L.add_term((_fib(mu, i2, p), _fib(q, i1)), _d(theta[p - 1], u(q)), -1)
    for j in range(1, n + 1):
        for s in range(1, m + 1):
            L.add_term((_fib(mu, i1, j), _fib(s, i2)), _d(theta[j - 1], u(s)), -1)
    return L


def closed_second_order(X, mu: int, i1: int, i2: int) -> tuple[FiberPoly, FiberPoly]:
    """(eta^mu_{i1 i2} - Lambda^mu_{i1 i2}, Lambda^mu_{i1 i2}) grouped as in the
    explicit second-prolongation formulas."""
    n, m = X.n, X.m
    theta, eta = X.coefficients()
    e = eta[mu - 1]
    th = lambda j: theta[j - 1]
    x = lambda i: f"x{i}"
    u = lambda k: f"u{k}"
    P = FiberPoly()
    others = [k for k in range(1, m + 1) if k != mu]
    if i1 != i2:
        P.add_term((), _d(e, x(i2), x(i1)))
        P.add_term((_fib(mu, i1),), _d(e, x(i2), u(mu)) - _d(th(i1), x(i2), x(i1)))
        P.add_term((_fib(mu, i2),), _d(e, x(i1), u(mu)) - _d(th(i2), x(i2), x(i1)))
        for k in others:
            P.add_term((_fib(k, i1),), _d(e, x(i2), u(k)))
            P.add_term((_fib(k, i2),), _d(e, x(i1), u(k)))
        for k in range(1, n + 1):
            if k not in (i1, i2):
                P.add_term((_fib(mu, k),), _d(th(k), x(i2), x(i1)), -1)
        for k in range(1, m + 1):
            for j in range(1, n + 1):
                if j != i2:
                    P.add_term((_fib(k, i1), _fib(mu, j)), _d(th(j), x(i2), u(k)), -1)
        for i in range(1, m + 1):
            for s in range(1, n + 1):
                if s != i1:
                    P.add_term((_fib(i, i2), _fib(mu, s)), _d(th(s), x(i1), u(i)), -1)
        for r_ in others:
            for p in others:
                P.add_term((_fib(r_, i2), _fib(p, i1)), _d(e, u(r_), u(p)))
        for t in others:
            P.add_term((_fib(t, i1), _fib(mu, i2)), _d(e, u(mu), u(t)) - _d(th(i2), x(i2), u(t)))
        for q in others:
            P.add_term((_fib(q, i2), _fib(mu, i1)), _d(e, u(q), u(mu)) - _d(th(i1), u(q), x(i1)))
        P.add_term((_fib(mu, i1), _fib(mu, i2)),
                   _d(e, u(mu), u(mu)) - _d(th(i2), x(i2), u(mu)) - _d(th(i1), x(i1), u(mu)))
        for a in range(1, m + 1):
            for b in range(1, m + 1):
                for s in range(1, n + 1):
                    P.add_term((_fib(a, i2), _fib(b, i1), _fib(mu, s)), _d(th(s), u(a), u(b)), -1)
    else:
        i = i1
        P.add_term((), _d(e, x(i), x(i)))
        P.add_term((_fib(mu, i),), _d(e, x(i), u(mu)).scale(2) - _d(th(i), x(i), x(i)))
        for k in others:
            P.add_term((_fib(k, i),), _d(e, x(i), u(k)).scale(2))
        for k in range(1, n + 1):
            if k != i:
                P.add_term((_fib(mu, k),), _d(th(k), x(i), x(i)), -1)
        for k in range(1, m + 1):
            for j in range(1, n + 1):
                if j != i:
                    P.add_term((_fib(k, i), _fib(mu, j)), _d(th(j), x(i), u(k)), -2)
        for r_ in others:
            for p in others:
                P.add_term((_fib(r_, i), _fib(p, i)), _d(e, u(r_), u(p)))
        for t in others:
            P.add_term((_fib(t, i), _fib(mu, i)), _d(e, u(mu), u(t)) - _d(th(i), x(i), u(t)))
        for q in others:
            P.add_term((_fib(q, i), _fib(mu, i)), _d(e, u(q), u(mu)) - _d(th(i), x(i), u(q)))
        P.add_term((_fib(mu, i), _fib(mu, i)), _d(e, u(mu), u(mu)) - _d(th(i), x(i), u(mu)).scale(2))
        for a in range(1, m + 1):
            for b in range(1, m + 1):
                for s in range(1, n + 1):
                    P.add_term((_fib(a, i), _fib(b, i), _fib(mu, s)), _d(th(s), u(a), u(b)), -1)
    return P, closed_lambda(X, mu, i1, i2)


def prolong2_closed(X) -> ProlongedField:
    """Second prolongation assembled from the explicit closed formulas."""
    n, m = X.n, X.m
    theta, eta = X.coefficients()
    table: dict[Fiber, FiberPoly] = {}
    for mu in range(1, m + 1):
        for i in range(1, n + 1):
            table[(mu, (i,))] = closed_first_order(X, mu, i)
        for a in _jet_indices(n, 2):
            rest, lam = closed_second_order(X, mu, a[0], a[1])
            table[(mu, a)] = rest + lam
    return ProlongedField(n, m, 2, theta, eta, table)


# ---------------------------------------------------------------------------
# flows


@dataclass(frozen=True)
class FlowResult:
    """Images z* = exp(tX) z, summed through ``order`` terms of the Lie series.

    ``terminated``: X^(order+1) z = 0, so the images are exact.
    ``degree_raising``: every coefficient vanishes to order >= 2, so each term
    raises degree and the images are correct through total degree ``order``.
    Otherwise the images are partial sums in t (still exact in z).
    """

    images: dict[str, TruncatedSeries]
    order: int
    terminated: bool
    degree_raising: bool


def lie_series_flow(X: ConcreteVectorField, t, cap: int) -> FlowResult:
    t = as_fraction(t)
    z = X.zvars
    if any(not c.is_exact() for c in X.tau()):
        raise ValueError("lie_series_flow needs polynomial (exact) coefficients")
    images: dict[str, TruncatedSeries] = {}
    terminated = True
    for name in z:
        term = TruncatedSeries.var(z, name)
        total = term
        done = False
        for k in range(1, cap + 1):
            term = X.apply(term)
            if term.is_zero():
                done = True
                break
            total = total + term.scale(t ** k / factorial(k))
        if not done:
            done = X.apply(term).is_zero()
        terminated = terminated and done
        images[name] = total
    raising = X.vanishing_order() >= 2
    if not terminated and raising:
        images = {k: v.truncate(cap) for k, v in images.items()}
    return FlowResult(images, cap, terminated, raising)
