"""Truncated multivariate power series over the rationals.

A series is a polynomial together with truncation caps.  Variables are
grouped into blocks; a term survives iff, in every block with a cap, its
degree in that block's variables does not exceed the cap.  The usual case is
a single block (total degree).  ``None`` caps mean "exact": the polynomial is
the whole function.

The stored polynomial is only asserted to agree with the true function
modulo the monomials beyond the caps, so every operation lowers caps where
it loses information (differentiation lowers the cap of the block it acts
in) and products take the smaller cap per block.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .linalg import ExactMatrix, SingularMatrixError, rref_rank_nullspace
from .polynomial import ContextError, Monomial, Polynomial, as_fraction

Cap = int | None


class TruncationError(ValueError):
    """Raised when a result would claim precision the inputs do not carry."""


def _min_cap(a: Cap, b: Cap) -> Cap:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class TruncatedSeries:
    __slots__ = ("poly", "caps", "blocks", "_groups")

    def __init__(self, poly: Polynomial, cap: Cap | Sequence[Cap] = None, blocks: Sequence[int] | None = None):
        if blocks is None:
            blocks = (0,) * poly.nvars
        blocks = tuple(blocks)
        if len(blocks) != poly.nvars:
            raise ContextError("block assignment does not match the variable count")
        nblocks = max(blocks, default=-1) + 1 or 1
        if isinstance(cap, (list, tuple)):
            caps = tuple(cap)
        else:
            caps = (cap,) * nblocks
        if len(caps) != nblocks:
            raise ValueError(f"expected {nblocks} caps, got {len(caps)}")
        self.blocks = blocks
        self.caps = caps
        self._groups = tuple(tuple(i for i, b in enumerate(blocks) if b == k) for k in range(nblocks))
        if all(c is None for c in caps):
            self.poly = poly
        else:
            self.poly = poly.filter(self._keeper())

    # -- construction helpers ------------------------------------------
    @classmethod
    def exact(cls, poly: Polynomial, blocks: Sequence[int] | None = None) -> "TruncatedSeries":
        return cls(poly, None, blocks)

    @classmethod
    def zero(cls, variables: Sequence[str], cap: Cap | Sequence[Cap] = None, blocks=None) -> "TruncatedSeries":
        return cls(Polynomial.zero(variables), cap, blocks)

    @classmethod
    def constant(cls, variables: Sequence[str], c, cap=None, blocks=None) -> "TruncatedSeries":
        return cls(Polynomial.constant(variables, c), cap, blocks)

    @classmethod
    def var(cls, variables: Sequence[str], name: str, cap=None, blocks=None) -> "TruncatedSeries":
        return cls(Polynomial.var(variables, name), cap, blocks)

    def _keeper(self):
        checks = [(g, c) for g, c in zip(self._groups, self.caps) if c is not None]
        if any(c < 0 for _, c in checks):
            return lambda m: False
        if len(checks) == 1 and len(checks[0][0]) == len(self.blocks):
            cap = checks[0][1]
            return lambda m: sum(m) <= cap
        return lambda m: all(sum(m[i] for i in g) <= c for g, c in checks)

    # -- properties ----------------------------------------------------
    @property
    def variables(self) -> tuple[str, ...]:
        return self.poly.variables

    @property
    def cap(self):
        """The cap: an int/None for single-block series, the tuple otherwise."""
        return self.caps[0] if len(self.caps) == 1 else self.caps

    def is_exact(self) -> bool:
        return all(c is None for c in self.caps)

    def is_zero(self) -> bool:
        """Zero through the caps."""
        return self.poly.is_zero()

    def known(self) -> bool:
        """False when some cap went negative (nothing is known)."""
        return all(c is None or c >= 0 for c in self.caps)

    def block_of(self, var: str | int) -> int:
        i = var if isinstance(var, int) else self.poly.index(var)
        return self.blocks[i]

    # -- compatibility ---------------------------------------------------
    def _pair(self, other: "TruncatedSeries"):
        if self.variables != other.variables:
            raise ContextError(f"context mismatch: {self.variables} vs {other.variables}")
        if self.blocks == other.blocks:
            return self.blocks, tuple(_min_cap(a, b) for a, b in zip(self.caps, other.caps))
        if other.is_exact():
            return self.blocks, self.caps
        if self.is_exact():
            return other.blocks, other.caps
        raise ContextError("series with different block structures cannot be combined")

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            return other
        if isinstance(other, Polynomial):
            return TruncatedSeries(other, None, self.blocks)
        return TruncatedSeries.constant(self.variables, other, None, self.blocks)

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other) -> "TruncatedSeries":
        other = self._coerce(other)
        blocks, caps = self._pair(other)
        return TruncatedSeries(self.poly + other.poly, caps, blocks)

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(-self.poly, self.caps, self.blocks)

    def __sub__(self, other) -> "TruncatedSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "TruncatedSeries":
        return self._coerce(other) - self

    def scale(self, c) -> "TruncatedSeries":
        return TruncatedSeries(self.poly.scale(c), self.caps, self.blocks)

    def __mul__(self, other) -> "TruncatedSeries":
        if not isinstance(other, (TruncatedSeries, Polynomial)):
            return self.scale(other)
        other = self._coerce(other)
        blocks, caps = self._pair(other)
        out = TruncatedSeries(Polynomial.zero(self.variables), caps, blocks)
        keep = None if out.is_exact() else out._keeper()
        out.poly = self.poly.mul(other.poly, keep)
        return out

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "TruncatedSeries":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        result = TruncatedSeries.constant(self.variables, 1, None, self.blocks)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def diff(self, var: str | int) -> "TruncatedSeries":
        i = var if isinstance(var, int) else self.poly.index(var)
        b = self.blocks[i]
        caps = list(self.caps)
        if caps[b] is not None:
            caps[b] -= 1
        return TruncatedSeries(self.poly.diff(i), tuple(caps), self.blocks)

    def truncate(self, cap: Cap | Sequence[Cap]) -> "TruncatedSeries":
        """Lower the caps (never raises them)."""
        new = cap if isinstance(cap, (list, tuple)) else (cap,) * len(self.caps)
        return TruncatedSeries(self.poly, tuple(_min_cap(a, b) for a, b in zip(self.caps, new)), self.blocks)

    # -- evaluation --------------------------------------------------------
    def constant_term(self) -> Fraction:
        if not self.known():
            raise TruncationError("constant term lost to truncation")
        return self.poly.constant_term()

    def evaluate(self, point: Sequence, strict: bool = True) -> Fraction:
        """Value at ``point``.

        A truncated series is only a Taylor polynomial at the origin, so with
        ``strict`` a nonzero point is rejected unless the series is exact.
        """
        pt = [as_fraction(p) for p in point]
        if not any(pt):
            return self.constant_term()
        if strict and not self.is_exact():
            raise TruncationError("point outside the representable domain of a truncated series")
        return self.poly.evaluate(pt)

    # -- context changes ---------------------------------------------------
    def reorder(self, variables: Sequence[str], blocks: Sequence[int] | None = None,
                caps: Sequence[Cap] | Cap | None = None) -> "TruncatedSeries":
        """Move into another context.

        Exact series may change block structure freely.  A truncated series
        keeps its caps; the target block layout must be given when it differs.
        """
        poly = self.poly.reorder(variables)
        if self.is_exact():
            return TruncatedSeries(poly, caps, blocks)
        if blocks is None:
            if len(self.caps) != 1:
                raise ContextError("target block layout required for a multi-block series")
            return TruncatedSeries(poly, self.caps[0] if caps is None else caps, None)
        return TruncatedSeries(poly, self.caps if caps is None else caps, blocks)

    # -- comparison & printing ---------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.poly == other.poly and self.caps == other.caps and self.blocks == other.blocks

    def __hash__(self) -> int:
        return hash((self.poly, self.caps, self.blocks))

    def same_through(self, other: "TruncatedSeries") -> bool:
        """Agreement modulo the coarser of the two truncations."""
        _, caps = self._pair(other)
        probe = TruncatedSeries(self.poly - other.poly, caps, self.blocks if not self.is_exact() else other.blocks)
        return probe.is_zero()

    def __str__(self) -> str:
        s = self.poly.to_str()
        if self.is_exact():
            return s
        return f"{s} + O{self.caps if len(self.caps) > 1 else '(' + str(self.caps[0] + 1) + ')'}"

    def __repr__(self) -> str:
        return f"TruncatedSeries({self.poly.to_str()!r}, caps={self.caps})"


def series_substitute(p: TruncatedSeries | Polynomial, assignment: Mapping[str, TruncatedSeries],
                      cap: Cap | Sequence[Cap] = None, target: Sequence[str] | None = None) -> TruncatedSeries:
    """Compose ``p`` with the assigned series.

    Variables of ``p`` without an assignment are carried over by name into
    the target context.  A truncated source is only composed soundly when
    every image has zero constant term and the target is graded by total
    degree; an exact (polynomial) source may be composed with anything.
    """
    if isinstance(p, Polynomial):
        p = TruncatedSeries.exact(p)
    images = [s for s in assignment.values()]
    if target is None:
        if not images:
            return p if cap is None else p.truncate(cap)
        target = images[0].variables
    target = tuple(target)
    for s in images:
        if s.variables != target:
            raise ContextError("all substituted series must share one context")
    structured = [s for s in images if not s.is_exact()]
    blocks = structured[0].blocks if structured else (images[0].blocks if images else None)
    for s in structured:
        if s.blocks != blocks:
            raise ContextError("substituted series disagree on block structure")
    nblocks = (max(blocks) + 1) if blocks else 1

    valid: list[Cap] = [None] * nblocks
    for s in images:
        if s.blocks == blocks:
            valid = [_min_cap(a, b) for a, b in zip(valid, s.caps)]

    full: list[TruncatedSeries] = []
    for name in p.variables:
        if name in assignment:
            full.append(assignment[name])
        else:
            if name not in target:
                if any(m[p.poly.index(name)] for m in p.poly.terms):
                    raise ContextError(f"variable {name!r} has no image in the target context")
                full.append(TruncatedSeries.zero(target, None, blocks))
                continue
            full.append(TruncatedSeries.var(target, name, None, blocks))

    if not p.is_exact():
        if len(p.caps) != 1 or nblocks != 1:
            raise TruncationError("truncated source can only be composed under total-degree grading")
        for s, name in zip(full, p.variables):
            if s.poly.constant_term() != 0:
                raise TruncationError(f"image of {name!r} has a nonzero constant term; "
                                      "composition with a truncated source is unsound")
        valid = [_min_cap(valid[0], p.caps[0])]

    if cap is not None:
        want = list(cap) if isinstance(cap, (list, tuple)) else [cap] * nblocks
        for w, v in zip(want, valid):
            if w is not None and v is not None and w > v:
                raise TruncationError(f"requested cap {w} exceeds the available precision {v}")
        valid = [_min_cap(a, b) for a, b in zip(valid, want)]

    caps = tuple(valid)
    result = TruncatedSeries.zero(target, caps, blocks)
    keep = None if result.is_exact() else result._keeper()
    powers: list[dict[int, TruncatedSeries]] = [dict() for _ in full]

    def power(i: int, e: int) -> TruncatedSeries:
        cache = powers[i]
        if e not in cache:
            if e == 1:
                cache[e] = TruncatedSeries(full[i].poly, caps, blocks)
            else:
                half = power(i, e // 2)
                sq = _trunc_mul(half, half, caps, blocks, keep)
                cache[e] = _trunc_mul(sq, power(i, 1), caps, blocks, keep) if e % 2 else sq
        return cache[e]

    acc: dict[Monomial, Fraction] = {}
    for mono, c in p.poly.terms.items():
        term = TruncatedSeries.constant(target, c, caps, blocks)
        for i, e in enumerate(mono):
            if e:
                term = _trunc_mul(term, power(i, e), caps, blocks, keep)
                if term.poly.is_zero():
                    break
        for m, v in term.poly.terms.items():
            s = acc.get(m, 0) + v
            if s:
                acc[m] = s
            else:
                del acc[m]
    result.poly = Polynomial._raw(target, acc)
    return result


def _trunc_mul(a: TruncatedSeries, b: TruncatedSeries, caps, blocks, keep) -> TruncatedSeries:
    out = TruncatedSeries.zero(a.variables, caps, blocks)
    out.poly = a.poly.mul(b.poly, keep)
    return out


def jacobian_at_origin(eqs: Sequence[TruncatedSeries], names: Sequence[str]) -> ExactMatrix:
    return ExactMatrix.from_rows([[e.diff(n).constant_term() for n in names] for e in eqs], len(names))


def implicit_solve(eqs: Sequence[TruncatedSeries | Polynomial], unknowns: Sequence[str],
                   cap: Cap | Sequence[Cap], blocks: Sequence[int] | None = None,
                   max_rounds: int | None = None) -> dict[str, TruncatedSeries]:
    """Solve ``eqs(x, p) = 0`` for ``p = p(x)`` as truncated series with ``p(0) = 0``.

    Uses the chord iteration ``p <- p - J0^{-1} eqs(x, p)`` with the Jacobian
    at the origin; each round fixes at least one more total degree, so it
    terminates on the finite quotient cut out by the caps.
    """
    eqs = [TruncatedSeries.exact(e) if isinstance(e, Polynomial) else e for e in eqs]
    if not eqs:
        return {}
    unknowns = tuple(unknowns)
    if len(eqs) != len(unknowns):
        raise SingularMatrixError(f"non-square system: {len(eqs)} equations, {len(unknowns)} unknowns", -1)
    variables = eqs[0].variables
    for e in eqs:
        if e.variables != variables:
            raise ContextError("equations must share one context")
    for u in unknowns:
        if u not in variables:
            raise ContextError(f"unknown {u!r} not in the equations' context")
    target = tuple(v for v in variables if v not in unknowns)
    for e in eqs:
        if e.constant_term() != 0:
            raise ValueError("equations must vanish at the origin")
    J0 = jacobian_at_origin(eqs, unknowns)
    _, rank, _ = rref_rank_nullspace(J0)
    if rank < len(unknowns):
        raise SingularMatrixError(f"linear part is singular (rank {rank} < {len(unknowns)})", rank)
    Jinv = J0.inverse()

    probe = TruncatedSeries.zero(target, cap, blocks)
    if any(c is None for c in probe.caps):
        raise TruncationError("implicit_solve needs a finite cap in every block")
    if max_rounds is None:
        max_rounds = sum(probe.caps) + 2
    phi = {u: TruncatedSeries.zero(target, probe.caps, probe.blocks) for u in unknowns}
    for _ in range(max_rounds + 1):
        assignment = dict(phi)
        for v in target:
            assignment[v] = TruncatedSeries.var(target, v, probe.caps, probe.blocks)
        residual = [series_substitute(e, assignment, probe.caps) for e in eqs]
        new = {}
        for i, u in enumerate(unknowns):
            corr = TruncatedSeries.zero(target, probe.caps, probe.blocks)
            for j, r in enumerate(residual):
                if Jinv[i, j]:
                    corr = corr + r.scale(Jinv[i, j])
            new[u] = phi[u] - corr
        if all(new[u].poly == phi[u].poly for u in unknowns):
            return new
        phi = new
    raise TruncationError("implicit_solve did not stabilise within the round budget")
