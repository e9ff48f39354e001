"""Segre families of Levi-nondegenerate submanifolds as PDE systems.

Input is the holomorphized defining data: for k = 1..m the Segre variety
Q(zeta, omega) is the graph

    u^k + omega_k = <L^k x, zeta> + R^k(x, zeta, omega),

with R^k free of terms of degree <= 2.  In series contexts zeta_i is named
``z<i>`` and omega_k is named ``o<k>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .algebra.linalg import ExactMatrix, SingularMatrixError, dense_to_sparse, sparse_rank
from .algebra.polynomial import Polynomial, as_fraction
from .algebra.series import TruncatedSeries, implicit_solve, series_substitute
from .lintype import DimBoundReport
from .systems import PDESystemS, base_blocks, base_variables

DEFAULT_CAP = 6


def segre_variables(n: int, m: int) -> tuple[str, ...]:
    return (tuple(f"x{i}" for i in range(1, n + 1)) + tuple(f"z{i}" for i in range(1, n + 1))
            + tuple(f"o{k}" for k in range(1, m + 1)))


def _matrix(M, n: int) -> ExactMatrix:
    M = M if isinstance(M, ExactMatrix) else ExactMatrix.from_rows(M)
    if (M.rows, M.cols) != (n, n):
        raise ValueError(f"expected an {n}x{n} matrix, got {M.rows}x{M.cols}")
    return M


@dataclass(frozen=True)
class SegreDefining:
    n: int
    m: int
    L: tuple[ExactMatrix, ...]
    R: tuple[Polynomial, ...] = ()

    def __post_init__(self):
        n, m = self.n, self.m
        if len(self.L) != m:
            raise ValueError(f"need {m} hermitian-part matrices, got {len(self.L)}")
        object.__setattr__(self, "L", tuple(_matrix(M, n) for M in self.L))
        V = segre_variables(n, m)
        R = list(self.R) or [Polynomial.zero(V) for _ in range(m)]
        if len(R) != m:
            raise ValueError(f"need {m} remainder series, got {len(R)}")
        fixed = []
        for k, r in enumerate(R, 1):
            if isinstance(r, TruncatedSeries):
                if not r.is_exact():
                    raise ValueError(f"R{k} must be given exactly (a polynomial)")
                r = r.poly
            r = r.reorder(V)
            if not r.is_zero() and r.low_degree() < 3:
                raise ValueError(f"R{k} has a term of degree {r.low_degree()} <= 2")
            fixed.append(r)
        object.__setattr__(self, "R", tuple(fixed))
        try:
            self.L[0].inverse()
        except SingularMatrixError as err:
            raise SingularMatrixError(f"L1 is singular (rank {err.rank} < {n}); Levi form degenerate",
                                      err.rank) from None

    @property
    def variables(self) -> tuple[str, ...]:
        return segre_variables(self.n, self.m)

    def is_quadric(self) -> bool:
        return all(r.is_zero() for r in self.R)


@dataclass(frozen=True)
class FlatRelationMatrices:
    A: tuple[ExactMatrix, ...]    # A^2..A^m

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(M if isinstance(M, ExactMatrix) else ExactMatrix.from_rows(M)
                                            for M in self.A))

    @property
    def n(self) -> int:
        return self.A[0].rows if self.A else 0


def relation_matrices(L: Sequence) -> list[ExactMatrix]:
    """A^k with v^k_x = A^k w_x: zeta = ((L^1)^T)^{-1} w_x, so A^k = (L^k)^T ((L^1)^T)^{-1}."""
    L = [M if isinstance(M, ExactMatrix) else ExactMatrix.from_rows(M) for M in L]
    N = L[0].transpose().inverse()
    return [M.transpose() @ N for M in L[1:]]


def flat_system(A: FlatRelationMatrices | Sequence, n: int | None = None, cap: int | None = None) -> PDESystemS:
    """u^1_{x_i x_j} = 0, u^k_x = A^k u^1_x."""
    mats = A.A if isinstance(A, FlatRelationMatrices) else FlatRelationMatrices(tuple(A)).A
    if n is None:
        if not mats:
            raise ValueError("n is required when there are no relations")
        n = mats[0].rows
    m = len(mats) + 1
    V = base_variables(n, m)
    w = [Polynomial.var(V, f"u1_{j}") for j in range(1, n + 1)]
    G = {}
    for k, M in enumerate(mats, 2):
        for j in range(n):
            acc = Polynomial.zero(V)
            for i in range(n):
                if M[j, i]:
                    acc = acc + w[i].scale(M[j, i])
            G[(k, j + 1)] = acc
    return PDESystemS(n, m, {}, G, cap)


def quadric_system(L: Sequence, cap: int | None = None) -> PDESystemS:
    L = [M if isinstance(M, ExactMatrix) else ExactMatrix.from_rows(M) for M in L]
    n = L[0].rows
    try:
        mats = relation_matrices(L)
    except SingularMatrixError as err:
        raise SingularMatrixError(f"L1 is singular (rank {err.rank} < {n})", err.rank) from None
    return flat_system(mats, n, cap)


def _hermitian_pairing(M: ExactMatrix, V: Sequence[str], n: int) -> Polynomial:
    """<M x, zeta> = sum_{j,l} M_{jl} x_l zeta_j."""
    out = Polynomial.zero(V)
    for j in range(n):
        for l in range(n):
            if M[j, l]:
                out = out + (Polynomial.var(V, f"x{l + 1}") * Polynomial.var(V, f"z{j + 1}")).scale(M[j, l])
    return out


def derive_segre_system(D: SegreDefining, cap: int = DEFAULT_CAP) -> PDESystemS:
    """Eliminate (zeta, omega) from the Segre graph equations and their first
    x-derivatives (k = 1) by the implicit function theorem.

    Series are truncated in the box (x, u)-degree <= cap, w_x-degree <= cap.
    If the truncated solution satisfies the equations exactly it is exact.
    """
    n, m = D.n, D.m
    SV = D.variables
    B = base_variables(n, m)
    blocks = base_blocks(n, m)
    W = B + tuple(f"z{i}" for i in range(1, n + 1)) + tuple(f"o{k}" for k in range(1, m + 1))
    unknowns = tuple(f"z{i}" for i in range(1, n + 1)) + tuple(f"o{k}" for k in range(1, m + 1))

    graph = []   # u^k as a function of (x, zeta, omega)
    for k in range(m):
        graph.append(_hermitian_pairing(D.L[k], SV, n) + D.R[k] - Polynomial.var(SV, f"o{k + 1}"))
    lift = lambda p: p.reorder(W)
    eqs = []
    for k in range(m):
        eqs.append(Polynomial.var(W, f"u{k + 1}") - lift(graph[k]))
    for i in range(1, n + 1):
        eqs.append(Polynomial.var(W, f"u1_{i}") - lift(graph[0].diff(f"x{i}")))
    phi = implicit_solve(eqs, unknowns, (cap, cap), blocks)

    exact_try = {k: TruncatedSeries(v.poly, None, blocks) for k, v in phi.items()}
    if all(series_substitute(e, exact_try, None, B).is_zero() for e in eqs):
        phi = exact_try

    assign = dict(phi)
    for i in range(1, n + 1):
        assign[f"x{i}"] = TruncatedSeries.var(B, f"x{i}", None, blocks)

    def through_phi(p: Polynomial) -> TruncatedSeries:
        return series_substitute(p, assign, None, B)

    F = {}
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            F[(i, j)] = through_phi(graph[0].diff(f"x{i}").diff(f"x{j}"))
    G = {}
    for k in range(2, m + 1):
        for j in range(1, n + 1):
            G[(k, j)] = through_phi(graph[k - 1].diff(f"x{j}"))
    return PDESystemS(n, m, F, G, cap)


def linear_part_ok(S: PDESystemS, A: Sequence[ExactMatrix]) -> bool:
    """G^k = A^k w_x + psi with psi free of terms of total degree <= 1."""
    n = S.n
    for k, M in enumerate(A, 2):
        for j in range(1, n + 1):
            g = S.g(k, j).poly
            lin = {mono: c for mono, c in g.terms.items() if sum(mono) <= 1}
            want = {}
            for i in range(n):
                if M[j - 1, i]:
                    mono = [0] * len(S.variables)
                    mono[S.variables.index(f"u1_{i + 1}")] = 1
                    want[tuple(mono)] = M[j - 1, i]
            if lin != want:
                return False
    return True


def scale_deform(D: SegreDefining, eps) -> SegreDefining:
    """R^k(x, zeta, omega) -> eps^-2 R^k(eps x, eps zeta, eps^2 omega); L unchanged."""
    eps = as_fraction(eps)
    n = D.n
    weights = (1,) * (2 * n) + (2,) * D.m
    newR = []
    for r in D.R:
        terms = {}
        for mono, c in r.terms.items():
            wdeg = sum(w * e for w, e in zip(weights, mono))
            terms[mono] = c * eps ** (wdeg - 2)
        newR.append(Polynomial(r.variables, terms))
    return SegreDefining(n, D.m, D.L, tuple(newR))


def flat_nondegenerate_check(A: FlatRelationMatrices | Sequence) -> bool:
    """True iff Id, A^2, ..., A^m are linearly independent."""
    mats = A.A if isinstance(A, FlatRelationMatrices) else FlatRelationMatrices(tuple(A)).A
    if not mats:
        return True
    n = mats[0].rows
    vecs = [[Fraction(int(i == j)) for i in range(n) for j in range(n)]]
    vecs += [[M[i, j] for i in range(n) for j in range(n)] for M in mats]
    return sparse_rank(dense_to_sparse(v) for v in vecs) == len(vecs)


def aut_bound_report(D: SegreDefining, analysis: DimBoundReport) -> str:
    return f"dim_R Aut(M) <= {analysis.bound}"
