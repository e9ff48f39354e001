from fractions import Fraction
from math import factorial

import pytest

from conftest import P, flat_ode, row
from segrelie.algebra import Polynomial, TruncatedSeries
from segrelie.fields import ConcreteVectorField, LinearForm, z_variables
from segrelie.lieeq import (DEFAULT_SEED, generate_lie_equations, in_row_space, residual_of_field,
                            same_row_space, sample_points)
from segrelie.segre import flat_system
from segrelie.systems import PDESystemS, base_variables

Z = z_variables(1, 1)

FLAT_ODE_ROWS = [
    row(1, 1, eta1_x1x1=1),
    row(1, 1, eta1_x1u1=2, theta1_x1x1=-1),
    row(1, 1, eta1_u1u1=1, theta1_x1u1=-2),
    row(1, 1, theta1_u1u1=1),
]

CLASSICAL = [
    ("1", "0"), ("0", "1"), ("x1", "0"), ("0", "x1"),
    ("u1", "0"), ("0", "u1"), ("x1^2", "x1*u1"), ("x1*u1", "u1^2"),
]


def field(theta, eta, n=1, m=1):
    z = z_variables(n, m)
    return ConcreteVectorField(n, m, tuple(P(t, z) for t in theta), tuple(P(e, z) for e in eta))


def test_flat_ode_row_space_at_seeded_points(flat_ode_lie):
    R = flat_ode_lie
    assert len(R.equations) == 4
    for p in sample_points(2, DEFAULT_SEED):
        assert same_row_space(R.rows_at(p), FLAT_ODE_ROWS)


def test_flat_ode_equation_text(flat_ode_lie):
    text = sorted(flat_ode_lie.format_equation(e) for e in flat_ode_lie.equations)
    assert text == ["-theta1_u1u1 = 0", "2*eta1_x1u1 - theta1_x1x1 = 0", "eta1_u1u1 - 2*theta1_x1u1 = 0",
                    "eta1_x1x1 = 0"]


@pytest.mark.parametrize("theta, eta", CLASSICAL)
def test_classical_generators_have_zero_residual(flat_ode_lie, theta, eta):
    res = residual_of_field(flat_ode(), field([theta], [eta]), flat_ode_lie)
    assert all(r.is_zero() for r in res.values())


def test_non_symmetry_has_nonzero_residual(flat_ode_lie):
    res = residual_of_field(flat_ode(), field(["u1^2"], ["0"]), flat_ode_lie)
    nonzero = [r for r in res.values() if not r.is_zero()]
    assert nonzero and all(r.poly.is_constant() for r in nonzero)
    assert sorted(abs(r.poly.constant_term()) for r in nonzero) == [2]


def test_zero_field_has_zero_residual():
    S = PDESystemS(2, 2, {}, {(2, 1): P("u1_2", base_variables(2, 2))})
    res = residual_of_field(S, field(["0", "0"], ["0", "0"], 2, 2))
    assert res and all(r.is_zero() for r in res.values())


def test_generation_reports_stabilization(flat_ode_lie):
    info = flat_ode_lie.info
    assert info["n_w"] >= 3 and info["seed"] == DEFAULT_SEED
    assert info["n_w_reason"]


def test_non_involutive_input_warns():
    S = PDESystemS(2, 2, {}, {(2, 1): P("x2", base_variables(2, 2))})
    with pytest.warns(UserWarning, match="not involutive"):
        R = generate_lie_equations(S)
    assert R.info["involutive"] is False


# -- the scalar ODE u'' = (u')^2 --------------------------------------------------

# Generated rows, confirmed by the symmetries -e^u d/du and -x e^u d/du of u'' = u'^2
# (v = e^-u linearizes the equation to v'' = 0).
QUADRATIC_ROWS = [
    row(1, 1, eta1_x1x1=1),
    row(1, 1, eta1_x1u1=2, theta1_x1x1=-1, eta1_x1=-2),
    row(1, 1, eta1_u1u1=1, theta1_x1u1=-2, eta1_u1=-1),
    row(1, 1, theta1_u1u1=-1, theta1_u1=-1),
]


@pytest.fixture(scope="module")
def quadratic():
    return generate_lie_equations(PDESystemS(1, 1, {(1, 1): P("u1_1^2", base_variables(1, 1))}))


def test_quadratic_ode_row_space(quadratic):
    for p in sample_points(2, DEFAULT_SEED):
        assert same_row_space(quadratic.rows_at(p), QUADRATIC_ROWS)


def test_quadratic_ode_printed_instantiation(quadratic):
    # printed with f^2 = 1 and all other f^nu = 0
    rows = quadratic.rows_at((1, 2))
    assert in_row_space(rows, row(1, 1, eta1_x1x1=1))
    assert in_row_space(rows, row(1, 1, theta1_u1u1=-1, theta1_u1=-1))
    # the printed forms of the next two drop the first-order terms -2 eta_x and -eta_u
    assert not in_row_space(rows, row(1, 1, eta1_x1u1=2, theta1_x1x1=-1))
    assert not in_row_space(rows, row(1, 1, eta1_u1u1=1, theta1_x1u1=-2))


def _exp_u(cap, times_x=False):
    terms = {}
    for k in range(cap + 1):
        terms[(1 if times_x else 0, k)] = -Fraction(1, factorial(k))
    return TruncatedSeries(Polynomial(Z, terms), cap)


@pytest.mark.parametrize("times_x", [False, True])
def test_linearizing_symmetries_solve_generated_equations(quadratic, times_x):
    cap = 6
    eta = _exp_u(cap, times_x=times_x)
    X = ConcreteVectorField(1, 1, (TruncatedSeries.zero(Z, cap),), (eta,))
    res = residual_of_field(quadratic, X, quadratic)
    assert all(r.is_zero() for r in res.values())
    # and they violate at least one of the two printed second-order relations
    printed = [row(1, 1, eta1_x1u1=2, theta1_x1x1=-1), row(1, 1, eta1_u1u1=1, theta1_x1u1=-2)]
    values = [_as_form(r).apply(X.tau()) for r in printed]
    assert any(not v.is_zero() for v in values)


def _as_form(r):
    return LinearForm(Z, 2, {s: TruncatedSeries.constant(Z, c) for s, c in r.items()})


# -- flat n = m = 2 with relations ---------------------------------------------------


def test_diag_relations_first_order_equations():
    R = generate_lie_equations(flat_system([[[1, 0], [0, -1]]]))
    rows = R.rows_at((0,) * 4)
    assert in_row_space(rows, row(2, 2, eta2_x1=1, eta1_x1=-1))
    assert in_row_space(rows, row(2, 2, eta2_x2=1, eta1_x2=1))


def test_flat_orders_are_separated():
    for A in ([[1, 0], [0, -1]], [[0, -1], [1, 0]], [[0, 1], [0, 0]]):
        R = generate_lie_equations(flat_system([A]))
        for e in R.equations:
            assert len({s.order for s in e.terms}) == 1
            assert e.order() in (1, 2)


def test_equations_are_homogeneous_linear(quadratic):
    for e in quadratic.equations:
        assert e.terms and not e.is_zero()


GENERIC_A = [[2, 3], [5, 7]]


@pytest.fixture(scope="module")
def generic_flat():
    return generate_lie_equations(flat_system([GENERIC_A]))


def test_generic_relations_printed_groups(generic_flat):
    (a11, a12), (a21, a22) = GENERIC_A
    rows = generic_flat.rows_at((0,) * 4)
    assert in_row_space(rows, row(2, 2, eta2_x1=1, eta1_x1=-a11, eta1_x2=-a12))
    assert in_row_space(rows, row(2, 2, eta2_x2=1, eta1_x1=-a21, eta1_x2=-a22))
    assert in_row_space(rows, row(2, 2, theta1_u1=1, theta1_u2=a22, theta2_u2=-a21))
    assert in_row_space(rows, row(2, 2, theta2_u1=1, theta1_u2=-a12, theta2_u2=a11))
    for lab in ("eta1_x1x1", "eta1_x1x2", "eta1_x2x2"):
        assert in_row_space(rows, row(2, 2, **{lab: 1}))


def test_commuting_linear_field_decides_printed_relation(generic_flat):
    # theta = A^T x commutes with the relation, so it is a symmetry of the flat system
    (a11, a12), (a21, a22) = GENERIC_A
    X = field([f"{a11}*x1 + {a21}*x2", f"{a12}*x1 + {a22}*x2"], ["0", "0"], 2, 2)
    res = residual_of_field(None, X, generic_flat)
    assert all(r.is_zero() for r in res.values())
    rows = generic_flat.rows_at((0,) * 4)
    # printed with (a11 + a22) in front of theta2_x1; the field requires (a22 - a11)
    base = dict(eta2_u2=a12, eta1_u1=-a12, eta1_u2=-a12 * (a11 + a22), theta1_x1=-a12, theta2_x2=a12)
    assert in_row_space(rows, row(2, 2, theta2_x1=-(a22 - a11), **base))
    assert not in_row_space(rows, row(2, 2, theta2_x1=-(a11 + a22), **base))
