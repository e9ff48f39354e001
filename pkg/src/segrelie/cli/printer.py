"""Canonical text for systems; ``parse_system_file(print_*(s))`` gives ``s`` back."""

from __future__ import annotations

from fractions import Fraction

from ..algebra.series import TruncatedSeries
from ..fields import symbol_sort_key
from ..lieeq import LinearPDESystem
from ..segre import SegreDefining
from ..systems import PDESystemS
from .parser import linear_variables


def _frac(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _caps_note(s: TruncatedSeries) -> str:
    if s.is_exact():
        return ""
    return f"  # truncated, caps {tuple(s.caps)}"


def print_system(S: PDESystemS) -> str:
    head = f"system n={S.n} m={S.m}" + (f" cap={S.cap}" if S.cap is not None else "")
    lines = [head]
    for (i, j), v in S.F.items():
        lines.append(f"F {i} {j} = {v.poly.to_str()}{_caps_note(v)}")
    for (k, j), v in S.G.items():
        lines.append(f"G {k} {j} = {v.poly.to_str()}{_caps_note(v)}")
    return "\n".join(lines) + "\n"


def print_segre(D: SegreDefining, cap: int | None = None) -> str:
    lines = [f"segre n={D.n} m={D.m}" + (f" cap={cap}" if cap is not None else "")]
    for k, M in enumerate(D.L, 1):
        rows = ", ".join("[" + ", ".join(_frac(v) for v in M.row(i)) + "]" for i in range(M.rows))
        lines.append(f"L{k} = [{rows}]")
    for k, r in enumerate(D.R, 1):
        if not r.is_zero():
            lines.append(f"R{k} = {r.to_str()}")
    return "\n".join(lines) + "\n"


def print_linear(R: LinearPDESystem) -> str:
    Y = linear_variables(R.nz)
    head = f"linear vars={R.nz} unknowns={len(R.unknowns)}" + (f" cap={R.cap}" if R.cap is not None else "")
    lines = [head]
    for e in R.equations:
        parts = []
        for s in sorted(e.terms, key=symbol_sort_key, reverse=True):
            c = e.terms[s]
            coeff = c.poly.to_str(Y)
            parts.append(f"({coeff})*{s.jet_name()}")
        note = "" if all(c.is_exact() for c in e.terms.values()) else "  # coefficients truncated"
        lines.append("eq = " + " + ".join(parts) + note)
    return "\n".join(lines) + "\n"


def print_source(obj) -> str:
    if isinstance(obj, PDESystemS):
        return print_system(obj)
    if isinstance(obj, SegreDefining):
        return print_segre(obj)
    if isinstance(obj, LinearPDESystem):
        return print_linear(obj)
    raise TypeError(f"cannot print {type(obj).__name__}")
