"""Exact linear algebra over the rationals.

Elimination works on sparse rows (``{column: Fraction}``) because the
matrices built from determining equations are very sparse.  The reduced row
echelon form of a row space is unique, so the result does not depend on the
order in which rows are fed in.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .polynomial import as_fraction

SparseRow = dict[int, Fraction]


class SingularMatrixError(ValueError):
    def __init__(self, message: str, rank: int):
        super().__init__(message)
        self.rank = rank


@dataclass(frozen=True)
class ExactMatrix:
    rows: int
    cols: int
    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError("entries do not match the declared shape")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "ExactMatrix":
        data = tuple(tuple(as_fraction(x) for x in r) for r in rows)
        ncols = cols if cols is not None else (len(data[0]) if data else 0)
        return cls(len(data), ncols, data)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls.from_rows([[0] * cols for _ in range(rows)], cols)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i]

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix.from_rows([[self.entries[i][j] for i in range(self.rows)]
                                      for j in range(self.cols)], self.rows)

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        return ExactMatrix.from_rows(
            [[sum((self.entries[i][k] * other.entries[k][j] for k in range(self.cols)), Fraction(0))
              for j in range(other.cols)] for i in range(self.rows)], other.cols)

    def apply(self, vec: Sequence) -> tuple[Fraction, ...]:
        return tuple(sum((a * as_fraction(b) for a, b in zip(r, vec)), Fraction(0)) for r in self.entries)

    def rank(self) -> int:
        return rref_rank_nullspace(self)[1]

    def inverse(self) -> "ExactMatrix":
        if self.rows != self.cols:
            raise SingularMatrixError("inverse of a non-square matrix", self.rank())
        n = self.rows
        aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(self.entries)]
        pivots, prow = sparse_rref([dense_to_sparse(r) for r in aug])
        if pivots != list(range(n)):
            rank = sum(1 for p in pivots if p < n)
            raise SingularMatrixError(f"matrix is singular (rank {rank} < {n})", rank)
        return ExactMatrix.from_rows([[prow[i].get(n + j, Fraction(0)) for j in range(n)]
                                      for i in range(n)], n)

    def to_lists(self) -> list[list[Fraction]]:
        return [list(r) for r in self.entries]

    def __str__(self) -> str:
        return "[" + ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self.entries) + "]"


def dense_to_sparse(row: Sequence) -> SparseRow:
    return {j: as_fraction(v) for j, v in enumerate(row) if v != 0}


def sparse_rref(rows: Iterable[Mapping[int, Fraction]]) -> tuple[list[int], list[SparseRow]]:
    """Reduced row echelon form of sparse rows.

    Returns ``(pivot_columns, reduced_rows)`` sorted by pivot column.  The
    echelon form is maintained fully reduced after each inserted row.
    """
    basis: dict[int, SparseRow] = {}
    for raw in rows:
        row = {j: Fraction(v) for j, v in raw.items() if v != 0}
        for p in [c for c in row if c in basis]:
            f = row.get(p)
            if not f:
                continue
            for c, v in basis[p].items():
                s = row.get(c, 0) - f * v
                if s:
                    row[c] = s
                else:
                    row.pop(c, None)
        if not row:
            continue
        lead = min(row)
        inv = 1 / row[lead]
        row = {c: v * inv for c, v in row.items()}
        for p, prow in basis.items():
            f = prow.get(lead)
            if f:
                for c, v in row.items():
                    s = prow.get(c, 0) - f * v
                    if s:
                        prow[c] = s
                    else:
                        prow.pop(c, None)
        basis[lead] = row
    pivots = sorted(basis)
    return pivots, [basis[p] for p in pivots]


def sparse_rank(rows: Iterable[Mapping[int, Fraction]]) -> int:
    return len(sparse_rref(rows)[0])


def nullspace_from_rref(pivots: Sequence[int], reduced: Sequence[SparseRow], ncols: int) -> list[tuple[Fraction, ...]]:
    pivot_set = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for p, row in zip(pivots, reduced):
            v = row.get(f)
            if v:
                vec[p] = -v
        basis.append(tuple(vec))
    return basis


def rref_rank_nullspace(M: ExactMatrix) -> tuple[ExactMatrix, int, list[tuple[Fraction, ...]]]:
    pivots, reduced = sparse_rref(dense_to_sparse(r) for r in M.entries)
    rank = len(pivots)
    dense = [[row.get(j, Fraction(0)) for j in range(M.cols)] for row in reduced]
    dense += [[Fraction(0)] * M.cols for _ in range(M.rows - rank)]
    return (ExactMatrix.from_rows(dense, M.cols), rank,
            nullspace_from_rref(pivots, reduced, M.cols))
