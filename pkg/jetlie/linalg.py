"""
Exact linear algebra over QQ on sparse rows.

Rows and vectors are ``{column: Rat}`` dicts; the heavy lifting is sympy's
``DomainMatrix`` rref. Nullspace bases put a 1 in their free column, ordered by
free column, so results are deterministic for identical input.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from .algebra import Rat
from .errors import DomainError

Vector = Dict[int, Rat]


def to_matrix(rows: Sequence[Vector], ncols: int) -> DomainMatrix:
    dok = {(i, j): v for i, row in enumerate(rows) for j, v in row.items() if v}
    return DomainMatrix.from_dok(dok, (len(rows), ncols), QQ)


def rref(rows: Sequence[Vector], ncols: int) -> Tuple[List[Vector], Tuple[int, ...]]:
    """Nonzero rows of the reduced row echelon form and the pivot columns"""
    rows = [row for row in rows if any(row.values())]
    if not rows:
        return [], ()
    reduced, pivots = to_matrix(rows, ncols).rref()
    out: List[Vector] = [{} for _ in pivots]
    for (i, j), value in reduced.to_dok().items():
        if i < len(pivots) and value:
            out[i][j] = value
    return out, tuple(pivots)


def rank(rows: Sequence[Vector], ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Vector], ncols: int) -> List[Vector]:
    """Basis of {v : row . v = 0 for every row}"""
    reduced, pivots = rref(rows, ncols)
    pivot_set = set(pivots)
    basis: List[Vector] = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vector: Vector = {free: QQ.one}
        for row, pivot in zip(reduced, pivots):
            value = row.get(free)
            if value:
                vector[pivot] = -value
        basis.append(vector)
    return basis


def solve_linear(rows: Sequence[Vector], rhs: Sequence[Rat], ncols: int) -> Optional[Vector]:
    """One solution of rows . v = rhs with free unknowns set to 0; None if inconsistent"""
    augmented = []
    for row, value in zip(rows, rhs):
        extended = dict(row)
        if value:
            extended[ncols] = value
        augmented.append(extended)
    reduced, pivots = rref(augmented, ncols + 1)
    if ncols in pivots:
        return None
    solution: Vector = {}
    for row, pivot in zip(reduced, pivots):
        value = row.get(ncols)
        if value:
            solution[pivot] = value
    return solution


def in_span(basis: Sequence[Vector], target: Vector) -> Optional[List[Rat]]:
    """Coefficients c with sum c_i basis_i = target, or None when target is outside the span"""
    coords = sorted({k for vec in basis for k in vec} | set(target))
    index = {k: i for i, k in enumerate(coords)}
    rows: List[Vector] = [{} for _ in coords]
    for col, vec in enumerate(basis):
        for k, value in vec.items():
            if value:
                rows[index[k]][col] = value
    rhs = [target.get(k, QQ.zero) for k in coords]
    solution = solve_linear(rows, rhs, len(basis))
    if solution is None:
        return None
    return [solution.get(col, QQ.zero) for col in range(len(basis))]


# Dense square matrices, as lists of rows
def dense_rows(matrix: Sequence[Sequence[Rat]]) -> List[Vector]:
    return [{j: v for j, v in enumerate(row) if v} for row in matrix]


def dense_rank(matrix: Sequence[Sequence[Rat]]) -> int:
    if not matrix:
        return 0
    return rank(dense_rows(matrix), len(matrix[0]))


def inverse(matrix: Sequence[Sequence[Rat]]) -> List[List[Rat]]:
    """Exact inverse of a nonsingular square matrix"""
    size = len(matrix)
    if any(len(row) != size for row in matrix):
        raise DomainError("inverse needs a square matrix")
    if dense_rank(matrix) < size:
        raise DomainError("matrix is singular")
    inv = to_matrix(dense_rows(matrix), size).to_dense().inv()
    return [[QQ.convert(v) for v in row] for row in inv.to_list()]
