import sys
import re
from fractions import Fraction

import pytest
from hypothesis import settings

from segrelie.cli.parser import parse_expression
from segrelie.fields import UnknownSymbol, z_variables
from segrelie.lieeq import generate_lie_equations
from segrelie.systems import PDESystemS, base_variables

settings.register_profile("segrelie", max_examples=40, deadline=None)
settings.load_profile("segrelie")


def P(text, variables):
    return parse_expression(text, variables)


def sym(label, n, m):
    """'eta1_x1u1' -> UnknownSymbol over z = (x.., u..)."""
    mt = re.fullmatch(r"(theta|eta)(\d+)(?:_(\w+))?", label)
    head, j, tail = mt.group(1), int(mt.group(2)), mt.group(3) or ""
    func = j - 1 if head == "theta" else n + j - 1
    z = z_variables(n, m)
    exps = [0] * len(z)
    for name in re.findall(r"[xu]\d", tail):
        exps[z.index(name)] += 1
    return UnknownSymbol(func, tuple(exps))


def row(n, m, **coeffs):
    """Constant-coefficient row, e.g. row(1, 1, eta1_x1x1=1)."""
    return {sym(k, n, m): Fraction(v) for k, v in coeffs.items()}


def flat_ode():
    return PDESystemS(1, 1, {})


@pytest.fixture(scope="session")
def flat_ode_lie():
    return generate_lie_equations(flat_ode())


@pytest.fixture(scope="session")
def base11():
    return base_variables(1, 1)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
