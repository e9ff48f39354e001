"""Input language: rational polynomial expressions and line-oriented system files.

Expressions::

    expr   := term (("+" | "-") term)*
    term   := factor ("*" factor)*
    factor := "-" factor | atom ("^" INT)?
    atom   := RATIONAL | NAME | "(" expr ")"

Rationals are ``digits[/digits]``; there is no division operator.  Names are
``x<i>``, ``u<k>``, ``u<k>_<digits>`` (digits normalized to non-decreasing
order), ``z<i>``, ``o<k>``, ``y<i>`` and ``t<j>[_<digits>]`` depending on the
file type.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..algebra.linalg import ExactMatrix
from ..algebra.polynomial import Polynomial
from ..fields import LinearForm, UnknownSymbol
from ..algebra.series import TruncatedSeries
from ..lieeq import LinearPDESystem
from ..segre import SegreDefining, segre_variables
from ..systems import PDESystemS, base_variables

DEFAULT_CAP = 6


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None, source: str | None = None):
        self.line, self.col, self.source = line, col, source
        where = ""
        if line is not None:
            where = f"line {line}, col {col}: " if col is not None else f"line {line}: "
        elif col is not None:
            where = f"col {col}: "
        super().__init__(where + message)
        self.bare = message


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z]+\d*(?:_\w*)?)|(?P<op>[-+*^()]))")


@dataclass
class _Tok:
    kind: str
    text: str
    col: int      # 1-based


def tokenize(text: str) -> list[_Tok]:
    pos, out = 0, []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", col=pos + 1)
        kind = m.lastgroup
        start = m.start(kind)
        tok = m.group(kind)
        if kind == "num" and "/" in tok and int(tok.split("/")[1]) == 0:
            raise ParseError("zero denominator", col=start + 1)
        out.append(_Tok(kind, tok, start + 1))
        pos = m.end()
    out.append(_Tok("end", "", len(text) + 1))
    return out


def normalize_name(name: str, col: int = 1) -> str:
    """Validate an identifier and sort the digits of its multi-index."""
    m = re.fullmatch(r"([A-Za-z]+)(\d*)(?:(_)(\w*))?", name)
    if not m or not m.group(2):
        raise ParseError(f"malformed variable name {name!r}", col=col)
    head, num, us, idx = m.groups()
    if num.startswith("0"):
        raise ParseError(f"variable index in {name!r} must start at 1", col=col)
    if us is None:
        return head + num
    if not idx:
        raise ParseError("malformed jet index: trailing underscore", col=col + len(head) + len(num))
    if not idx.isdigit() or "0" in idx:
        raise ParseError(f"malformed jet index {idx!r} (digits 1-9 expected)", col=col + len(head) + len(num) + 1)
    return f"{head}{num}_{''.join(sorted(idx))}"


class _ExprParser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.toks = tokenize(text)
        self.i = 0
        self.variables = tuple(variables)
        self.known = set(variables)

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        t = self.take()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", col=t.col)

    def parse(self) -> Polynomial:
        p = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected {t.text!r}", col=t.col)
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.factor()
        while self.peek().text == "*":
            self.take()
            p = p * self.factor()
        return p

    def factor(self) -> Polynomial:
        if self.peek().text == "-":
            self.take()
            return -self.factor()
        base = self.atom()
        if self.peek().text == "^":
            self.take()
            t = self.take()
            if t.kind != "num" or "/" in t.text:
                raise ParseError("exponent must be a non-negative integer", col=t.col)
            base = base ** int(t.text)
        return base

    def atom(self) -> Polynomial:
        t = self.take()
        if t.kind == "num":
            return Polynomial.constant(self.variables, Fraction(t.text))
        if t.kind == "name":
            name = t.text if t.text in self.known else normalize_name(t.text, t.col)
            if name not in self.known:
                raise ParseError(f"unknown variable {name!r}", col=t.col)
            return Polynomial.var(self.variables, name)
        if t.text == "(":
            p = self.expr()
            self.expect(")")
            return p
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", col=t.col)


def _infer_context(text: str) -> tuple[str, ...]:
    names = set()
    for t in tokenize(text):
        if t.kind == "name":
            names.add(normalize_name(t.text, t.col))

    def key(name):
        m = re.fullmatch(r"([A-Za-z]+)(\d+)(?:_(\d+))?", name)
        head, num, idx = m.groups()
        order = {"x": 0, "u": 1, "z": 2, "o": 3, "y": 4, "t": 5}.get(head, 6)
        return (len(idx or ""), order, head, int(num), idx or "")
    return tuple(sorted(names, key=key))


def parse_expression(text: str, variables: Sequence[str] | None = None) -> Polynomial:
    """Parse into a Polynomial over ``variables`` (inferred from the text if omitted)."""
    ctx = tuple(variables) if variables is not None else _infer_context(text)
    return _ExprParser(text, ctx).parse()


# ---------------------------------------------------------------------------
# files


@dataclass
class SourceSystem:
    kind: str                      # "system" | "segre" | "linear"
    payload: object
    cap: int = DEFAULT_CAP
    extra: dict = field(default_factory=dict)


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if line.strip():
            yield no, line


def _header(line: str, no: int, keyword: str, names: Sequence[str], optional=()) -> dict[str, int]:
    parts = line.split()
    if parts[0] != keyword:
        raise ParseError(f"expected header {keyword!r}", no, 1)
    vals: dict[str, int] = {}
    positional = [p for p in parts[1:] if "=" not in p]
    keyed = [p for p in parts[1:] if "=" in p]
    for name, p in zip(names, positional):
        vals[name] = p
    for p in keyed:
        k, v = p.split("=", 1)
        if k not in names and k not in optional:
            raise ParseError(f"unknown header key {k!r}", no, line.index(p) + 1)
        vals[k] = v
    out = {}
    for k, v in vals.items():
        if not re.fullmatch(r"\d+", v):
            raise ParseError(f"header value {k}={v!r} must be a non-negative integer", no, line.index(v) + 1)
        out[k] = int(v)
    return out


def _expr_at(text: str, variables, no: int, offset: int) -> Polynomial:
    try:
        return parse_expression(text, variables)
    except ParseError as err:
        raise ParseError(err.bare, no, (err.col or 1) + offset) from None


def parse_system_file(text: str) -> SourceSystem:
    lines = list(_lines(text))
    if not lines:
        raise ParseError("empty input", 1, 1)
    no, first = lines[0]
    kind = first.split()[0]
    if kind == "system":
        return _parse_pde_system(lines)
    if kind == "segre":
        return _parse_segre(lines)
    if kind == "linear":
        return _parse_linear(lines)
    raise ParseError(f"unknown file type {kind!r} (expected system, segre or linear)", no, 1)


def _parse_pde_system(lines) -> SourceSystem:
    no, head = lines[0]
    h = _header(head, no, "system", ("n", "m", "cap"))
    if "n" not in h or "m" not in h:
        raise ParseError("header needs n and m", no, 1)
    n, m, cap = h["n"], h["m"], h.get("cap", DEFAULT_CAP)
    if n < 1 or m < 1 or n > 9:
        raise ParseError("need 1 <= n <= 9 and m >= 1", no, 1)
    V = base_variables(n, m)
    F, G = {}, {}
    for no, line in lines[1:]:
        m_ = re.match(r"\s*([FG])\s+(\d+)\s+(\d+)\s*=\s*", line)
        if not m_:
            raise ParseError("expected 'F <i> <j> = <expr>' or 'G <k> <j> = <expr>'", no, 1)
        which, a, b = m_.group(1), int(m_.group(2)), int(m_.group(3))
        expr = _expr_at(line[m_.end():], V, no, m_.end())
        if which == "F":
            if not (1 <= a <= n and 1 <= b <= n):
                raise ParseError(f"F index ({a},{b}) out of range", no, 1)
            key = (min(a, b), max(a, b))
            if key in F:
                raise ParseError(f"F {key[0]} {key[1]} given twice", no, 1)
            F[key] = expr
        else:
            if not (2 <= a <= m and 1 <= b <= n):
                raise ParseError(f"G index ({a},{b}) out of range", no, 1)
            if (a, b) in G:
                raise ParseError(f"G {a} {b} given twice", no, 1)
            G[(a, b)] = expr
    return SourceSystem("system", PDESystemS(n, m, F, G, h.get("cap")), cap)


def _parse_matrix(text: str, no: int, offset: int) -> list[list[Fraction]]:
    src = text.strip()
    if not re.fullmatch(r"\[\s*\[.*\]\s*\]", src):
        raise ParseError("matrix must look like [[a, b], [c, d]]", no, offset + 1)
    rows = re.findall(r"\[([^\[\]]*)\]", src)
    out = []
    for r in rows:
        entries = [e.strip() for e in r.split(",")]
        row = []
        for e in entries:
            if not re.fullmatch(r"-?\d+(/\d+)?", e):
                raise ParseError(f"matrix entry {e!r} is not a rational", no, offset + 1)
            if "/" in e and int(e.split("/")[1]) == 0:
                raise ParseError("zero denominator", no, offset + 1)
            row.append(Fraction(e))
        out.append(row)
    return out


def _parse_segre(lines) -> SourceSystem:
    no, head = lines[0]
    h = _header(head, no, "segre", ("n", "m", "cap"))
    if "n" not in h or "m" not in h:
        raise ParseError("header needs n and m", no, 1)
    n, m, cap = h["n"], h["m"], h.get("cap", DEFAULT_CAP)
    V = segre_variables(n, m)
    L, R = {}, {}
    for no, line in lines[1:]:
        m_ = re.match(r"\s*([LR])(\d+)\s*=\s*", line)
        if not m_:
            raise ParseError("expected 'L<k> = [[...]]' or 'R<k> = <expr>'", no, 1)
        which, k = m_.group(1), int(m_.group(2))
        if not 1 <= k <= m:
            raise ParseError(f"index {k} out of range 1..{m}", no, 2)
        rest = line[m_.end():]
        if which == "L":
            M = _parse_matrix(rest, no, m_.end())
            if len(M) != n or any(len(r) != n for r in M):
                raise ParseError(f"L{k} must be {n}x{n}", no, m_.end() + 1)
            L[k] = ExactMatrix.from_rows(M, n)
        else:
            R[k] = _expr_at(rest, V, no, m_.end())
    missing = [k for k in range(1, m + 1) if k not in L]
    if missing:
        raise ParseError(f"missing L{missing[0]}", lines[-1][0], 1)
    Rs = tuple(R.get(k, Polynomial.zero(V)) for k in range(1, m + 1))
    try:
        D = SegreDefining(n, m, tuple(L[k] for k in range(1, m + 1)), Rs)
    except ValueError as err:
        raise ParseError(str(err), lines[0][0], 1) from None
    return SourceSystem("segre", D, cap, extra={"cap": h.get("cap")})


def linear_variables(nz: int) -> tuple[str, ...]:
    return tuple(f"y{i}" for i in range(1, nz + 1))


def parse_linear_symbol(name: str, K: int, nz: int) -> UnknownSymbol:
    m = re.fullmatch(r"t(\d+)(?:_(\d+))?", name)
    j = int(m.group(1))
    if not 1 <= j <= K:
        raise ValueError(f"unknown t{j} out of range 1..{K}")
    exps = [0] * nz
    for d in m.group(2) or "":
        a = int(d)
        if not 1 <= a <= nz:
            raise ValueError(f"derivative index {a} out of range 1..{nz}")
        exps[a - 1] += 1
    return UnknownSymbol(j - 1, tuple(exps))


def _parse_linear(lines) -> SourceSystem:
    no, head = lines[0]
    h = _header(head, no, "linear", ("vars",), optional=("unknowns", "cap"))
    if "vars" not in h:
        raise ParseError("header needs vars", no, 1)
    nz = h["vars"]
    K = h.get("unknowns", nz)
    cap = h.get("cap", DEFAULT_CAP)
    if not 1 <= nz <= 9 or K < 1:
        raise ParseError("need 1 <= vars <= 9 and unknowns >= 1", no, 1)
    Y = linear_variables(nz)
    eqs, tags = [], []
    for no, line in lines[1:]:
        m_ = re.match(r"\s*eq\s*=\s*", line)
        if not m_:
            raise ParseError("expected 'eq = <linear expression>'", no, 1)
        body = line[m_.end():]
        try:
            names = [n_ for n_ in _infer_context(body) if n_.startswith("t")]
        except ParseError as err:
            raise ParseError(err.bare, no, (err.col or 1) + m_.end()) from None
        ctx = Y + tuple(names)
        p = _expr_at(body, ctx, no, m_.end())
        syms = {}
        for nm in names:
            try:
                syms[nm] = parse_linear_symbol(nm, K, nz)
            except ValueError as err:
                raise ParseError(str(err), no, m_.end() + body.find(nm[:2]) + 1) from None
        tidx = [ctx.index(nm) for nm in names]
        terms: dict[UnknownSymbol, dict] = {}
        for mono, c in p.terms.items():
            tdeg = sum(mono[i] for i in tidx)
            if tdeg != 1:
                raise ParseError("equation must be homogeneous linear in the unknowns", no, m_.end() + 1)
            which = next(i for i in tidx if mono[i])
            s = syms[ctx[which]]
            terms.setdefault(s, {})[mono[:nz]] = c
        form = LinearForm(Y, nz, {s: TruncatedSeries(Polynomial(Y, t)) for s, t in terms.items()})
        if form.is_zero():
            continue
        eqs.append(form)
        tags.append(f"line {no}")
    unknowns = tuple(f"t{j}" for j in range(1, K + 1))
    return SourceSystem("linear", LinearPDESystem(Y, unknowns, tuple(eqs), h.get("cap"), tuple(tags)), cap)
