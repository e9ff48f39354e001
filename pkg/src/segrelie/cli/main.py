"""Command-line driver.

Exit codes: 0 success, 2 input error, 3 finite type not decided within r_max.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from fractions import Fraction

from .. import __version__
from ..algebra.linalg import SingularMatrixError
from ..fields import SymbolicVectorField, prolong2_closed, prolong_recursive
from ..lieeq import DEFAULT_SEED, LinearPDESystem, generate_lie_equations
from ..lintype import (DEFAULT_RMAX, dim_bound, finite_type, polynomial_solutions,
                       deformation_monotonicity_check)
from ..segre import SegreDefining, aut_bound_report, derive_segre_system, scale_deform
from ..systems import PDESystemS, involutivity_residuals
from .parser import ParseError, SourceSystem, parse_system_file
from .printer import print_linear, print_segre, print_source, print_system
from .report import build_report, render

EXIT_OK, EXIT_INPUT, EXIT_UNDECIDED = 0, 2, 3
DEFAULT_EPSILONS = ("1/8", "1/4")


class InputError(Exception):
    pass


class Undecided(Exception):
    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def _point(text: str) -> tuple[Fraction, ...]:
    return tuple(_rational(p) for p in text.split(",") if p.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", nargs="?", default="-", help="input file, '-' for standard input")
    common.add_argument("--cap", type=int, help="series truncation (default: file header, else 6)")
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="sampling seed (default 0x5EC4E)")
    common.add_argument("--rmax", type=int, default=DEFAULT_RMAX, help="prolongation limit for finite type")
    common.add_argument("--point", type=_point, help="base point y0 as comma-separated rationals")
    common.add_argument("--epsilon", type=_rational, action="append",
                        help="deformation sample (repeatable; default 1/8 and 1/4)")
    common.add_argument("--oracle-degree", type=int, help="also count polynomial solutions up to this degree")

    p = argparse.ArgumentParser(prog="segrelie", description="Symmetry analysis of Segre-family PDE systems.")
    p.add_argument("--version", action="version", version=f"segrelie {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("parse", parents=[common], help="print the input in canonical form")
    pr = sub.add_parser("prolong", parents=[common], help="prolongation formulas of the generic field")
    pr.add_argument("--order", type=int, default=2)
    le = sub.add_parser("lie-eqs", parents=[common], help="generate the determining equations")
    le.add_argument("--linear", action="store_true", help="emit a linear-system file instead of a report")
    sub.add_parser("analyze", parents=[common], help="full analysis report")
    sub.add_parser("segre", parents=[common], help="derive the PDE system of a Segre family")
    sub.add_parser("involutive", parents=[common], help="compatibility residuals")
    sub.add_parser("flat-dim", parents=[common], help="dimension bound with a polynomial-solution cross-check")
    sub.add_parser("deform-check", parents=[common], help="type and bound along the scaling deformation")
    return p


# ---------------------------------------------------------------------------
# helpers


def _config(args, src: SourceSystem) -> dict:
    eps = args.epsilon if args.epsilon else [Fraction(e) for e in DEFAULT_EPSILONS]
    return {
        "cap": _cap(args, src),
        "seed": args.seed,
        "r_max": args.rmax,
        "point": list(args.point) if args.point is not None else None,
        "epsilon": list(eps) if args.command == "deform-check" else None,
        "oracle_degree": args.oracle_degree,
        "input_kind": src.kind,
    }


def _cap(args, src: SourceSystem) -> int:
    return args.cap if args.cap is not None else src.cap


def _pde_system(src: SourceSystem, cap: int) -> PDESystemS:
    if src.kind == "system":
        return src.payload
    if src.kind == "segre":
        return derive_segre_system(src.payload, cap)
    raise InputError(f"command needs a system or segre file, got a {src.kind} file")


def _linear(src: SourceSystem, args) -> tuple[LinearPDESystem, dict]:
    if src.kind == "linear":
        return src.payload, {}
    S = _pde_system(src, _cap(args, src))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        R = generate_lie_equations(S, _cap(args, src), args.seed)
    return R, {"system": S}


def _point_for(R: LinearPDESystem, args):
    if args.point is None:
        return None
    if len(args.point) != R.nz:
        raise InputError(f"--point needs {R.nz} coordinates, got {len(args.point)}")
    return args.point


def _lie_summary(R: LinearPDESystem) -> dict:
    orders = R.orders()
    out = {"count": len(R.equations),
           "orders": {str(q): orders.count(q) for q in sorted(set(orders))},
           "exact": R.is_exact()}
    if "n_w" in R.info:
        out["n_w"] = R.info["n_w"]
        out["n_w_reason"] = R.info["n_w_reason"]
        out["n_w_ranks"] = [list(h) for h in R.info["n_w_ranks"]]
    return out


def _involutivity(S: PDESystemS) -> dict:
    rep = involutivity_residuals(S)
    return {"involutive": rep.involutive, "cap": rep.cap,
            "residuals": {k: str(v) for k, v in rep.residuals.items()}}


def _type_and_bound(R: LinearPDESystem, y0, r_max: int) -> tuple[dict, object]:
    rep = finite_type(R, y0, r_max)
    t = {"finite": rep.finite, "type": rep.type, "order": rep.order,
         "symbol_dims": {str(k): v for k, v in rep.symbol_dims.items()},
         "point": list(rep.point)}
    if not rep.finite:
        return t, None
    return t, dim_bound(R, y0, r_max, rep)


def _bound_dict(b) -> dict:
    return {"bound": b.bound, "jet_count": b.jet_count, "lower_rank": b.lower_rank,
            "jet_order": b.order, "parametric": list(b.parametric_labels)}


def _oracle(R: LinearPDESystem, degree: int | None) -> dict | None:
    if degree is None:
        return None
    if not R.is_exact():
        return {"degree": degree, "dimension": None,
                "note": "coefficients are truncated series; oracle needs exact equations"}
    sol = polynomial_solutions(R, degree)
    return {"degree": degree, "dimension": sol.dimension}


# ---------------------------------------------------------------------------
# commands


def cmd_parse(args, src):
    if src.kind == "segre":
        return print_segre(src.payload, src.extra.get("cap"))
    return print_source(src.payload)


def cmd_prolong(args, src):
    if src.kind == "linear":
        raise InputError("prolong needs a system or segre file")
    n, m = (src.payload.n, src.payload.m)
    if args.order < 1:
        raise InputError("--order must be at least 1")
    X = SymbolicVectorField(n, m)
    P = prolong2_closed(X) if args.order == 2 else prolong_recursive(X, args.order)
    table = {}
    for (k, a), p in sorted(P.table.items(), key=lambda kv: (len(kv[0][1]), kv[0])):
        table[f"u{k}_{''.join(map(str, a))}"] = p.to_str(lambda c: c.to_str(n))
    return {"n": n, "m": m, "order": args.order,
            "method": "closed" if args.order == 2 else "recursive", "coefficients": table}


def cmd_lie_eqs(args, src):
    R, _ = _linear(src, args)
    if args.linear:
        return print_linear(R)
    return {"summary": _lie_summary(R),
            "equations": [{"tag": t, "equation": R.format_equation(e)} for t, e in zip(R.tags, R.equations)]}


def cmd_analyze(args, src):
    R, extra = _linear(src, args)
    y0 = _point_for(R, args)
    result = {}
    if "system" in extra:
        result["involutivity"] = _involutivity(extra["system"])
        del result["involutivity"]["residuals"]
    result["determining_equations"] = _lie_summary(R)
    t, b = _type_and_bound(R, y0, args.rmax)
    result["type"] = t
    if b is None:
        raise Undecided(f"finite type not decided within r_max={args.rmax}", result)
    result["dim_bound"] = _bound_dict(b)
    oracle = _oracle(R, args.oracle_degree)
    if oracle is not None:
        result["oracle"] = oracle
    if src.kind == "segre":
        result["aut"] = aut_bound_report(src.payload, b)
    return result


def cmd_segre(args, src):
    if src.kind != "segre":
        raise InputError("segre needs a segre file")
    return print_system(derive_segre_system(src.payload, _cap(args, src)))


def cmd_involutive(args, src):
    S = _pde_system(src, _cap(args, src))
    return _involutivity(S)


def cmd_flat_dim(args, src):
    R, extra = _linear(src, args)
    S = extra.get("system")
    if S is not None and not S.is_exact():
        raise InputError("flat-dim needs an exact system (a flat system or a quadric)")
    y0 = _point_for(R, args)
    t, b = _type_and_bound(R, y0, args.rmax)
    result = {"type": t}
    if b is None:
        raise Undecided(f"finite type not decided within r_max={args.rmax}", result)
    degree = args.oracle_degree if args.oracle_degree is not None else 3
    oracle = _oracle(R, degree)
    result["dim_bound"] = _bound_dict(b)
    result["oracle"] = oracle
    result["agree"] = oracle["dimension"] == b.bound
    return result


def cmd_deform_check(args, src):
    if src.kind != "segre":
        raise InputError("deform-check needs a segre file")
    D: SegreDefining = src.payload
    cap = _cap(args, src)
    eps = args.epsilon if args.epsilon else [Fraction(e) for e in DEFAULT_EPSILONS]

    def family(e):
        S = derive_segre_system(scale_deform(D, e), cap)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return generate_lie_equations(S, cap, args.seed)

    first = family(Fraction(0))
    y0 = _point_for(first, args)
    try:
        rep = deformation_monotonicity_check(family, eps, y0, args.rmax)
    except ValueError as err:
        raise Undecided(str(err)) from None

    def row(s):
        line = f"dim_R Aut(M_eps) <= {s.bound}" if s.bound is not None else None
        return {"epsilon": s.epsilon, "type": s.type, "bound": s.bound, "monotone": s.monotone,
                "aut": line, "note": s.note}

    return {"base": row(rep.base), "samples": [row(s) for s in rep.samples], "monotone": rep.monotone}


COMMANDS = {
    "parse": cmd_parse, "prolong": cmd_prolong, "lie-eqs": cmd_lie_eqs, "analyze": cmd_analyze,
    "segre": cmd_segre, "involutive": cmd_involutive, "flat-dim": cmd_flat_dim,
    "deform-check": cmd_deform_check,
}


def _read(path: str, stdin) -> str:
    if path == "-":
        return stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as err:
        raise InputError(f"cannot read {path}: {err.strerror}") from None


def run(argv=None, stdout=None, stderr=None, stdin=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    stdin = stdin or sys.stdin
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        text = _read(args.file, stdin)
        src = parse_system_file(text)
        if args.cap is not None and args.cap < 1:
            raise InputError("--cap must be positive")
        if args.rmax < 0:
            raise InputError("--rmax must be non-negative")
        out = COMMANDS[args.command](args, src)
    except ParseError as err:
        where = "" if args.file == "-" else f"{args.file}: "
        print(f"segrelie: {where}{err}", file=stderr)
        return EXIT_INPUT
    except (InputError, SingularMatrixError) as err:
        print(f"segrelie: {err}", file=stderr)
        return EXIT_INPUT
    except Undecided as err:
        if err.report is not None:
            stdout.write(render(build_report(args.command, _config(args, src), text, err.report)))
        print(f"segrelie: {err}", file=stderr)
        return EXIT_UNDECIDED
    if isinstance(out, str):
        stdout.write(out)
    else:
        stdout.write(render(build_report(args.command, _config(args, src), text, out)))
    return EXIT_OK


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
