import random
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, strategies as st

from conftest import P, sym
from segrelie.algebra import Polynomial, TruncatedSeries, series_substitute
from segrelie.fields import (ConcreteVectorField, FiberPoly, LinearForm, SymbolicVectorField, closed_second_order,
                             lie_series_flow, prolong2_closed, prolong_recursive, z_variables)

Z11 = z_variables(1, 1)
U1, U11 = (1, (1,)), (1, (1, 1))


def L(label, n=1, m=1):
    z = z_variables(n, m)
    return LinearForm.symbol(z, len(z), sym(label, n, m))


def fiber_poly(terms):
    out = FiberPoly()
    for factors, c in terms:
        out.add_term(factors, c)
    return out


def field(n, m, theta, eta):
    z = z_variables(n, m)
    return ConcreteVectorField(n, m, tuple(P(t, z) for t in theta), tuple(P(e, z) for e in eta))


def series(text, z=Z11):
    return TruncatedSeries.exact(P(text, z))


# -- the n = m = 1 formulas ---------------------------------------------------


def test_first_prolongation_formula():
    expected = fiber_poly([
        ((), L("eta1_x1")),
        ((U1,), L("eta1_u1") - L("theta1_x1")),
        ((U1, U1), -L("theta1_u1")),
    ])
    assert prolong_recursive(SymbolicVectorField(1, 1), 1).coefficient(1, (1,)) == expected


def test_second_prolongation_formula():
    expected = fiber_poly([
        ((), L("eta1_x1x1")),
        ((U1,), L("eta1_x1u1").scale(2) - L("theta1_x1x1")),
        ((U1, U1), L("eta1_u1u1") - L("theta1_x1u1").scale(2)),
        ((U1, U1, U1), -L("theta1_u1u1")),
        ((U11,), L("eta1_u1") - L("theta1_x1").scale(2)),
        ((U1, U11), L("theta1_u1").scale(-3)),
    ])
    X = SymbolicVectorField(1, 1)
    assert prolong_recursive(X, 2).coefficient(1, (1, 1)) == expected
    assert prolong2_closed(X).coefficient(1, (1, 1)) == expected


def test_translation_has_no_fiber_action():
    P2 = prolong_recursive(field(1, 1, ["1"], ["0"]), 3)
    assert all(p.is_zero() for p in P2.table.values())


def test_euler_field_in_x():
    P2 = prolong_recursive(field(1, 1, ["x1"], ["0"]), 2)
    assert P2.coefficient(1, (1,)) == fiber_poly([((U1,), series("-1"))])
    assert P2.coefficient(1, (1, 1)) == fiber_poly([((U11,), series("-2"))])


def test_constant_field_closed_form_vanishes():
    X = field(2, 2, ["3", "-1"], ["1/2", "7"])
    for mu in (1, 2):
        for a in ((1, 1), (1, 2), (2, 2)):
            rest, lam = closed_second_order(X, mu, *a)
            assert rest.is_zero() and lam.is_zero()


@pytest.mark.parametrize("n, m", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_closed_equals_recursive_symbolic(n, m):
    X = SymbolicVectorField(n, m)
    assert prolong2_closed(X) == prolong_recursive(X, 2)


def _random_field(rng, n, m, degree=3):
    z = z_variables(n, m)

    def rand_poly():
        terms = {}
        for _ in range(rng.randint(0, 4)):
            mono = [0] * len(z)
            for _ in range(rng.randint(0, degree)):
                mono[rng.randrange(len(z))] += 1
            terms[tuple(mono)] = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
        return Polynomial(z, terms)

    return ConcreteVectorField(n, m, tuple(rand_poly() for _ in range(n)), tuple(rand_poly() for _ in range(m)))


def test_closed_equals_recursive_on_random_fields():
    rng = random.Random(0x5EC4E)
    for _ in range(100):
        X = _random_field(rng, rng.randint(1, 2), rng.randint(1, 2))
        assert prolong2_closed(X) == prolong_recursive(X, 2)


@given(st.integers(0, 10 ** 6), st.fractions(max_denominator=4), st.fractions(max_denominator=4))
def test_prolongation_is_linear(seed, a, b):
    rng = random.Random(seed)
    X, Y = _random_field(rng, 2, 1), _random_field(rng, 2, 1)
    PX, PY = prolong_recursive(X, 2), prolong_recursive(Y, 2)
    PZ = prolong_recursive(X.scale(a) + Y.scale(b), 2)
    for key, p in PZ.table.items():
        assert p == PX.table[key].scale(a) + PY.table[key].scale(b)
    for key in PX.table:
        assert PZ.table[key] == PX.table[key].scale(a) + PY.table[key].scale(b)


# -- flows -------------------------------------------------------------------


def test_translation_flow():
    out = lie_series_flow(field(1, 1, ["1"], ["0"]), 1, 4)
    assert out.terminated
    assert out.images["x1"].poly == P("x1 + 1", Z11)
    assert out.images["u1"].poly == P("u1", Z11)


def test_euler_flow_partial_sums():
    t, cap = Fraction(1, 2), 5
    out = lie_series_flow(field(1, 1, ["x1"], ["0"]), t, cap)
    factor = sum(t ** k / factorial(k) for k in range(cap + 1))
    assert out.images["x1"].poly == P("x1", Z11).scale(factor)
    assert not out.terminated and not out.degree_raising


def test_projective_flow_is_geometric_series():
    t = Fraction(1, 3)
    out = lie_series_flow(field(1, 1, ["x1^2"], ["0"]), t, 4)
    assert out.degree_raising
    assert out.images["x1"].poly == P("x1 + 1/3*x1^2 + 1/9*x1^3 + 1/27*x1^4", Z11)


def test_flow_at_zero_time_is_identity():
    out = lie_series_flow(field(1, 1, ["x1^2"], ["x1*u1"]), 0, 4)
    for name in Z11:
        assert out.images[name].poly == P(name, Z11)


def _compose(outer, inner, cap):
    z = tuple(inner)
    return {k: series_substitute(v, inner, cap, z) for k, v in outer.items()}


@pytest.mark.parametrize("theta, eta", [(["x1^2"], ["x1*u1"]), (["x1*u1"], ["u1^2"]), (["u1^2 + x1^3"], ["x1^2"])])
def test_flow_group_law(theta, eta):
    X = field(1, 1, theta, eta)
    cap = 5
    s, t = Fraction(1, 3), Fraction(-1, 2)
    fs = lie_series_flow(X, s, cap).images
    ft = lie_series_flow(X, t, cap).images
    fst = lie_series_flow(X, s + t, cap).images
    composed = _compose(fs, ft, cap)
    for k in Z11:
        assert composed[k].same_through(fst[k])
