"""Sparse multivariate polynomials with exact rational coefficients.

A polynomial lives in an ordered variable context (a tuple of names).  Terms
are stored as ``{exponent tuple: Fraction}`` with zero coefficients dropped.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

Monomial = tuple[int, ...]


class ContextError(ValueError):
    """Raised when operands live in different variable contexts."""


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"non-rational scalar {value!r}; only exact rationals are supported")


def glex_key(mono: Monomial) -> tuple:
    """Graded lexicographic sort key: lower degree first, then x1 before x2."""
    return (sum(mono), tuple(-e for e in mono))


def _format_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class Polynomial:
    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[Monomial, object] | None = None):
        self.variables = tuple(variables)
        nvars = len(self.variables)
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for mono, c in terms.items():
                c = as_fraction(c)
                if c == 0:
                    continue
                if len(mono) != nvars or any(e < 0 for e in mono):
                    raise ValueError(f"bad exponent tuple {mono} for context {self.variables}")
                clean[tuple(mono)] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, variables: tuple[str, ...], terms: dict[Monomial, Fraction]) -> "Polynomial":
        # trusted constructor: terms already clean
        p = object.__new__(cls)
        p.variables = variables
        p.terms = terms
        p._hash = None
        return p

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, variables: Sequence[str]) -> "Polynomial":
        return cls._raw(tuple(variables), {})

    @classmethod
    def constant(cls, variables: Sequence[str], c) -> "Polynomial":
        variables = tuple(variables)
        c = as_fraction(c)
        return cls._raw(variables, {(0,) * len(variables): c} if c else {})

    @classmethod
    def var(cls, variables: Sequence[str], name: str) -> "Polynomial":
        variables = tuple(variables)
        try:
            i = variables.index(name)
        except ValueError:
            raise ContextError(f"unknown variable {name!r}") from None
        mono = [0] * len(variables)
        mono[i] = 1
        return cls._raw(variables, {tuple(mono): Fraction(1)})

    @classmethod
    def monomial(cls, variables: Sequence[str], mono: Monomial, c=1) -> "Polynomial":
        return cls(variables, {tuple(mono): c})

    # -- basic queries ------------------------------------------------
    @property
    def nvars(self) -> int:
        return len(self.variables)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=-1)

    def low_degree(self) -> int:
        """Lowest total degree present; -1 for the zero polynomial."""
        return min((sum(m) for m in self.terms), default=-1)

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise ContextError(f"unknown variable {name!r} in context {self.variables}") from None

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: glex_key(t[0]))

    def __iter__(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(self.sorted_terms())

    def __len__(self) -> int:
        return len(self.terms)

    # -- arithmetic ---------------------------------------------------
    def _check(self, other: "Polynomial") -> None:
        if self.variables != other.variables:
            raise ContextError(f"context mismatch: {self.variables} vs {other.variables}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.constant(self.variables, other)

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(self.variables, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.variables, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def scale(self, c) -> "Polynomial":
        c = as_fraction(c)
        if c == 0:
            return Polynomial.zero(self.variables)
        return Polynomial._raw(self.variables, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        return self.mul(other)

    __rmul__ = __mul__

    def mul(self, other: "Polynomial", keep=None) -> "Polynomial":
        """Product; ``keep(mono)`` may reject monomials (truncation)."""
        self._check(other)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                if keep is not None and not keep(m):
                    continue
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Polynomial._raw(self.variables, out)

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        result = Polynomial.constant(self.variables, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def diff(self, var: str | int) -> "Polynomial":
        i = var if isinstance(var, int) else self.index(var)
        if not 0 <= i < self.nvars:
            raise ContextError(f"variable index {i} out of range")
        out = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                mm = list(m)
                mm[i] = e - 1
                out[tuple(mm)] = c * e
        return Polynomial._raw(self.variables, out)

    def filter(self, keep) -> "Polynomial":
        return Polynomial._raw(self.variables, {m: c for m, c in self.terms.items() if keep(m)})

    def truncate(self, cap: int) -> "Polynomial":
        return self.filter(lambda m: sum(m) <= cap)

    def homogeneous_part(self, d: int) -> "Polynomial":
        return self.filter(lambda m: sum(m) == d)

    # -- evaluation, substitution, context changes ---------------------
    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.nvars:
            raise ContextError("point dimension does not match context")
        pt = [as_fraction(p) for p in point]
        total = Fraction(0)
        for m, c in self.terms.items():
            v = c
            for x, e in zip(pt, m):
                if e:
                    v *= x**e
            total += v
        return total

    def partial_evaluate(self, values: Mapping[str, object]) -> "Polynomial":
        """Set the named variables to rationals; the context is unchanged."""
        idx = {self.index(k): as_fraction(v) for k, v in values.items()}
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            mm = list(m)
            for i, v in idx.items():
                if mm[i]:
                    c = c * v ** mm[i]
                    mm[i] = 0
            if c:
                key = tuple(mm)
                s = out.get(key, 0) + c
                if s:
                    out[key] = s
                else:
                    del out[key]
        return Polynomial._raw(self.variables, out)

    def reorder(self, variables: Sequence[str]) -> "Polynomial":
        """Re-express in another context that contains every used variable."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        pos = {v: i for i, v in enumerate(variables)}
        used = {i for m in self.terms for i, e in enumerate(m) if e}
        for i in used:
            if self.variables[i] not in pos:
                raise ContextError(f"variable {self.variables[i]!r} missing from target context")
        mapping = [pos.get(v) for v in self.variables]
        n = len(variables)
        out = {}
        for m, c in self.terms.items():
            mm = [0] * n
            for i, e in enumerate(m):
                if e:
                    mm[mapping[i]] = e
            out[tuple(mm)] = c
        return Polynomial._raw(variables, out)

    def used_variables(self) -> set[str]:
        return {self.variables[i] for m in self.terms for i, e in enumerate(m) if e}

    def coefficient_split(self, names: Iterable[str]) -> dict[Monomial, "Polynomial"]:
        """Group terms by their exponents in ``names``; coefficients stay in this context."""
        idx = [self.index(n) for n in names]
        out: dict[Monomial, dict[Monomial, Fraction]] = {}
        for m, c in self.terms.items():
            key = tuple(m[i] for i in idx)
            mm = list(m)
            for i in idx:
                mm[i] = 0
            out.setdefault(key, {})[tuple(mm)] = c
        return {k: Polynomial._raw(self.variables, v) for k, v in out.items()}

    # -- comparison & printing ------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.variables == other.variables and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == Polynomial.constant(self.variables, other).terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self.terms.items())))
        return self._hash

    def to_str(self, names: Sequence[str] | None = None) -> str:
        names = tuple(names) if names is not None else self.variables
        if not self.terms:
            return "0"
        pieces = []
        for m, c in self.sorted_terms():
            factors = []
            for name, e in zip(names, m):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            mag = abs(c)
            if not factors:
                body = _format_fraction(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = _format_fraction(mag) + "*" + "*".join(factors)
            pieces.append((c < 0, body))
        neg, body = pieces[0]
        out = ("-" if neg else "") + body
        for neg, body in pieces[1:]:
            out += (" - " if neg else " + ") + body
        return out

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"Polynomial({self.to_str()!r}, vars={self.variables})"
