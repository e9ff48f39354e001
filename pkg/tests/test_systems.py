import random
from fractions import Fraction

import pytest

from conftest import P
from segrelie.algebra import Polynomial, TruncatedSeries
from segrelie.segre import quadric_system
from segrelie.systems import (PDESystemS, base_blocks, base_variables, derive_full_second_order, involutivity_residuals,
                              restricted_total_derivative)

B21 = base_variables(2, 1)
B22 = base_variables(2, 2)


def s(text, V):
    n = sum(v.startswith("x") for v in V)
    return TruncatedSeries.exact(P(text, V), base_blocks(n, len(V) - 2 * n))


def test_base_context_order():
    assert B22 == ("x1", "x2", "u1", "u2", "u1_1", "u1_2")


def test_restricted_derivative_examples():
    S = PDESystemS(2, 2, {(1, 1): P("x1", B22)}, {(2, 1): P("u1_1 + x2", B22), (2, 2): P("u1_2", B22)})
    assert restricted_total_derivative(s("u1_1", B22), 1, S) == S.f(1, 1)
    assert restricted_total_derivative(s("u2", B22), 1, S) == S.g(2, 1)
    for i in (1, 2):
        for j in (1, 2):
            out = restricted_total_derivative(s(f"x{j}", B22), i, S)
            assert out == s(str(int(i == j)), B22)


def test_f_is_symmetric_by_storage():
    S = PDESystemS(2, 1, {(2, 1): P("x1*u1_2", B21)})
    assert S.f(1, 2) is S.f(2, 1)
    assert S.f(1, 1).is_zero()


def test_duplicate_f_rejected():
    with pytest.raises(ValueError):
        PDESystemS(2, 1, {(1, 2): P("x1", B21), (2, 1): P("x2", B21)})


def test_index_range_checked():
    with pytest.raises(ValueError):
        PDESystemS(1, 2, {}, {(1, 1): P("u1_1", base_variables(1, 2))})


def test_flat_with_relations_has_zero_derived_second_order():
    S = quadric_system([[[1, 0], [0, 1]], [[1, 0], [0, -1]]])
    D = derive_full_second_order(S)
    assert all(v.is_zero() for v in D.Fk.values())


def test_s3_derived_second_order():
    S = quadric_system([[[0, 1], [1, 0]], [[1, 0], [0, 0]]])
    D = derive_full_second_order(S)
    for i in (1, 2):
        for j in (1, 2):
            assert D.f(2, i, j).is_zero()


def test_chain_rule_through_relation():
    B = base_variables(1, 2)
    S = PDESystemS(1, 2, {}, {(2, 1): P("u1_1^2", B)})
    assert derive_full_second_order(S).f(2, 1, 1).is_zero()
    S = PDESystemS(1, 2, {(1, 1): P("x1", B)}, {(2, 1): P("u1_1^2", B)})
    assert derive_full_second_order(S).f(2, 1, 1) == s("2*x1*u1_1", B)


def test_first_order_f_is_the_input():
    S = PDESystemS(2, 2, {(1, 2): P("x1*u1_1", B22)}, {(2, 1): P("u1_2", B22)})
    D = derive_full_second_order(S)
    for i, j in ((1, 1), (1, 2), (2, 2)):
        assert D.f(1, i, j) == S.f(i, j)


def test_flat_is_involutive():
    S = quadric_system([[[1, 0], [0, 1]], [[0, -1], [1, 0]]])
    assert involutivity_residuals(S).involutive


def test_counterexample_is_not_involutive():
    B = base_variables(2, 2)
    S = PDESystemS(2, 2, {}, {(2, 1): P("x2", B), (2, 2): P("0", B)})
    rep = involutivity_residuals(S)
    assert not rep.involutive
    assert rep.nonzero() == {"G 2 1 2": s("1", B)}


def test_nonflat_f_compatibility():
    # w_11 = x2 with w_12 = w_22 = 0 is incompatible: D_2 w_11 = 1 but D_1 w_12 = 0
    S = PDESystemS(2, 1, {(1, 1): P("x2", B21)})
    assert not involutivity_residuals(S).involutive


def test_residual_report_carries_cap():
    S = PDESystemS(1, 1, {}, cap=4)
    assert involutivity_residuals(S).cap == 4


def _random_base_poly(rng, V, degree=3):
    terms = {}
    for _ in range(4):
        mono = [0] * len(V)
        for _ in range(rng.randint(0, degree)):
            mono[rng.randrange(len(V))] += 1
        terms[tuple(mono)] = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
    return TruncatedSeries.exact(Polynomial(V, terms))


@pytest.mark.parametrize("L", [
    [[[1, 0], [0, 1]], [[1, 0], [0, -1]]],
    [[[1, 0], [0, -1]], [[0, 1], [1, 0]]],
    [[[0, 1], [1, 0]], [[1, 0], [0, 0]]],
])
def test_restricted_derivatives_commute_on_involutive_systems(L):
    S = quadric_system(L)
    assert involutivity_residuals(S).involutive
    rng = random.Random(3)
    for _ in range(10):
        e = _random_base_poly(rng, S.variables)
        d12 = restricted_total_derivative(restricted_total_derivative(e, 1, S), 2, S)
        d21 = restricted_total_derivative(restricted_total_derivative(e, 2, S), 1, S)
        assert d12 == d21


def test_rederiving_changes_nothing():
    B = base_variables(1, 2)
    S = PDESystemS(1, 2, {(1, 1): P("u1_1^2", B)}, {(2, 1): P("x1*u1_1", B)})
    D1 = derive_full_second_order(S)
    S2 = PDESystemS(1, 2, {(1, 1): D1.f(1, 1, 1)}, {(2, 1): S.g(2, 1)})
    assert derive_full_second_order(S2).Fk == D1.Fk
