import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import P
from segrelie.cli.parser import parse_system_file
from segrelie.fields import UnknownSymbol
from segrelie.algebra import sparse_rank
from segrelie.lieeq import generate_lie_equations, reduced_row_space, sample_points
from segrelie.lintype import (NotFiniteTypeError, characteristic_matrix, complete, constant_coeff_Vs,
                              deformation_monotonicity_check, dim_bound, finite_type, jet_count,
                              polynomial_solutions, prolong_linear, prolonged_rows, symbol_at)
from segrelie.segre import SegreDefining, derive_segre_system, flat_system
from segrelie.systems import PDESystemS


def linear(text):
    return parse_system_file(text).payload


def tsym(func, *exps):
    return UnknownSymbol(func, tuple(exps))


@pytest.fixture(scope="module")
def flat22():
    return {name: generate_lie_equations(flat_system([A])) for name, A in {
        "diag": [[1, 0], [0, -1]], "rot": [[0, -1], [1, 0]], "nil": [[0, 1], [0, 0]]}.items()}


# -- completion and prolongation ---------------------------------------------------


def test_complete_adds_derivatives_of_lower_order_equation():
    R = linear("linear vars=2 unknowns=1\neq = t1_1\neq = t1_22")
    C = complete(R)
    tops = {tuple(e.terms) for e in C.equations}
    assert (tsym(0, 2, 0),) in tops and (tsym(0, 1, 1),) in tops
    assert len(C.equations) == 4


def test_complete_leaves_pure_top_order_alone():
    R = linear("linear vars=2 unknowns=1\neq = t1_11 + t1_22")
    assert complete(R).equations == R.equations


def test_prolong_zero_steps_is_identity():
    R = linear("linear vars=1 unknowns=1\neq = t1_1")
    assert prolong_linear(R, 0) is R


def test_prolong_one_step():
    R = linear("linear vars=1 unknowns=1\neq = t1_1")
    eqs = prolong_linear(R, 1).equations
    assert [tuple(e.terms) for e in eqs] == [(tsym(0, 1),), (tsym(0, 2),)]


def test_flat_ode_first_prolongation_symbol(flat_ode_lie):
    R1 = prolong_linear(flat_ode_lie, 1)
    third = [e for e in R1.equations if e.order() == 3]
    assert len(third) == 8
    G3 = symbol_at(R1, s=3)
    assert len(G3.coordinates) == 8 and G3.dim == 0


# -- symbols ------------------------------------------------------------------------


def test_flat_ode_symbol(flat_ode_lie):
    G = symbol_at(flat_ode_lie)
    assert G.dim == 2 and len(G.coordinates) == 6


def test_symbol_of_empty_system_is_everything():
    R = linear("linear vars=2 unknowns=1")
    assert symbol_at(R, s=2).dim == 3


def test_symbol_of_pure_second_derivative():
    R = linear("linear vars=1 unknowns=1\neq = t1_11")
    assert symbol_at(R).is_zero()


# -- finite type and bound ----------------------------------------------------------------


def test_flat_ode_type_and_bound(flat_ode_lie):
    rep = finite_type(flat_ode_lie)
    assert rep.finite and rep.type == 1 and rep.symbol_dims == {2: 2, 3: 0}
    b = dim_bound(flat_ode_lie)
    assert (b.jet_count, b.lower_rank, b.bound) == (12, 4, 8)
    assert b.parametric_labels == ("theta1", "eta1", "theta1_x1", "theta1_u1", "eta1_x1", "eta1_u1",
                                   "theta1_x1x1", "theta1_x1u1")


@pytest.mark.parametrize("name", ["diag", "rot", "nil"])
def test_flat_pairs_are_type_one_and_bound_matches_oracle(flat22, name):
    R = flat22[name]
    rep = finite_type(R)
    assert rep.finite and rep.type == 1
    assert dim_bound(R, type_report=rep).bound == polynomial_solutions(R, 3).dimension


@pytest.mark.parametrize("n, m, expected", [(1, 1, 8), (2, 1, 15)])
def test_no_relation_flat_bound(n, m, expected):
    R = generate_lie_equations(PDESystemS(n, m, {}))
    assert expected == (n + m + 2) * (n + m)
    assert dim_bound(R).bound == expected
    assert polynomial_solutions(R, 3).dimension == expected


def test_harmonic_not_decided():
    R = linear("linear vars=2 unknowns=1\neq = t1_11 + t1_22")
    rep = finite_type(R)
    assert not rep.finite and rep.type is None
    assert all(d > 0 for d in rep.symbol_dims.values())
    with pytest.raises(NotFiniteTypeError, match="r_max=6"):
        dim_bound(R)


def test_bound_at_other_point(flat_ode_lie):
    assert dim_bound(flat_ode_lie, (Fraction(1, 2), 3)).bound == 8


# -- polynomial oracle ----------------------------------------------------------------------


@pytest.mark.parametrize("d, dim", [(1, 6), (2, 8), (3, 8)])
def test_flat_ode_polynomial_solutions(flat_ode_lie, d, dim):
    assert polynomial_solutions(flat_ode_lie, d).dimension == dim


def test_projective_generator_is_in_the_span(flat_ode_lie):
    sol = polynomial_solutions(flat_ode_lie, 2)
    z = flat_ode_lie.variables
    target = (P("x1^2", z), P("x1*u1", z))
    rows = [{(j, m): c for j, p in enumerate(b) for m, c in p.terms.items()} for b in sol.basis]
    cols = sorted({k for r in rows for k in r} | {(j, m) for j, p in enumerate(target) for m in p.terms})
    index = {c: i for i, c in enumerate(cols)}
    as_row = lambda r: {index[k]: v for k, v in r.items()}
    base = sparse_rank(as_row(r) for r in rows)
    extra = {(j, m): c for j, p in enumerate(target) for m, c in p.terms.items()}
    assert sparse_rank([as_row(r) for r in rows] + [as_row(extra)]) == base


def test_oracle_needs_exact_coefficients():
    D = SegreDefining(1, 1, ([[1]],), (P("x1^2*z1^2", ("x1", "z1", "o1")),))
    R = generate_lie_equations(derive_segre_system(D, 4))
    with pytest.raises(ValueError):
        polynomial_solutions(R, 2)


# -- constant coefficients ----------------------------------------------------------------------


def test_flat_ode_Vs(flat_ode_lie):
    assert constant_coeff_Vs(flat_ode_lie, 2).dim == 2
    assert constant_coeff_Vs(flat_ode_lie, 3).is_zero()


def test_degenerate_relations_never_close():
    R = generate_lie_equations(flat_system([[[1, 0], [0, 1]]]))
    for s in range(1, 7):
        assert constant_coeff_Vs(R, s).dim > 0
    assert polynomial_solutions(R, 3).dimension > polynomial_solutions(R, 2).dimension


def test_Vs_rejects_variable_coefficients():
    R = linear("linear vars=1 unknowns=1\neq = y1*t1_1")
    with pytest.raises(ValueError):
        constant_coeff_Vs(R, 2)


@pytest.mark.parametrize("name", ["diag", "rot", "nil"])
def test_vanishing_Vs_stabilizes_oracle(flat22, name):
    R = flat22[name]
    s = next(s for s in range(1, 7) if constant_coeff_Vs(R, s).is_zero())
    assert polynomial_solutions(R, s - 1).dimension == polynomial_solutions(R, s + 1).dimension


# -- characteristic matrix --------------------------------------------------------------------------


def test_characteristic_matrix(flat_ode_lie):
    M, inj = characteristic_matrix(flat_ode_lie, lam=(1, 0))
    assert inj and (M.rows, M.cols) == (4, 2)
    M, inj = characteristic_matrix(flat_ode_lie, lam=(0, 0))
    assert not inj
    for lam in sample_points(2, 99):
        if any(lam):
            assert characteristic_matrix(flat_ode_lie, lam=lam)[1]


# -- deformation ----------------------------------------------------------------------------------------


def test_constant_family_is_flat(flat_ode_lie):
    rep = deformation_monotonicity_check(lambda e: flat_ode_lie, [Fraction(1, 8), Fraction(1, 4)])
    assert rep.monotone
    assert all((s.type, s.bound) == (rep.base.type, rep.base.bound) for s in rep.samples)


def test_flat_pair_family_keeps_type():
    family = lambda e: generate_lie_equations(flat_system([[[1, 0], [0, -1 + e]]]))
    rep = deformation_monotonicity_check(family, [Fraction(1, 8), Fraction(1, 4)])
    assert rep.monotone and all(s.type == 1 for s in rep.samples)


def test_nonmonotone_sample_is_reported_not_raised():
    a = linear("linear vars=1 unknowns=1\neq = t1_11")
    b = linear("linear vars=1 unknowns=1\neq = t1_111")
    rep = deformation_monotonicity_check(lambda e: a if e == 0 else b, [1])
    assert not rep.monotone and rep.samples[0].note


# -- properties ---------------------------------------------------------------------------------------


def test_solutions_satisfy_completion_and_prolongation(flat22, flat_ode_lie):
    for R in [flat_ode_lie, *flat22.values()]:
        sol = polynomial_solutions(R, 2)
        taus = [f.tau() for f in sol.fields(*_nm(R))]
        for S in (complete(R), prolong_linear(R, 2)):
            for tau in taus:
                assert all(e.apply(tau).is_zero() for e in S.equations)


def _nm(R):
    n = sum(u.startswith("theta") for u in R.unknowns)
    return n, len(R.unknowns) - n


@pytest.mark.parametrize("name", ["diag", "rot", "nil"])
def test_rank_is_monotone_in_order(flat22, name):
    R = flat22[name]
    ranks = []
    for N in range(2, 5):
        rows = prolonged_rows(R, N, (0,) * R.nz)
        ranks.append(len(reduced_row_space(rows)[1]))
    assert ranks == sorted(ranks)


@given(st.integers(0, 2 ** 16))
def test_bound_dominates_oracle_on_random_flat_pairs(seed):
    rng = random.Random(seed)
    A = [[rng.randint(-2, 2) for _ in range(2)] for _ in range(2)]
    R = generate_lie_equations(flat_system([A]))
    rep = finite_type(R)
    if rep.finite:
        assert dim_bound(R, type_report=rep).bound >= polynomial_solutions(R, 2).dimension


def test_jet_count():
    assert jet_count(2, 2, 2) == 12
    assert jet_count(4, 4, 2) == 60
    assert jet_count(1, 1, -1) == 0
