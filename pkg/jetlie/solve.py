"""
Polynomial solutions of determining systems.

- ansatz_solve: Q^l, R^j of total degree <= d with unknown rational coefficients; each
  determining equation yields one linear row per (x, u) monomial; the nullspace is the algebra
- stabilization_check: the dimension does not grow from degree d to d+1
- theorem1_bound: the dimension of the symmetry algebra of the homogeneous system
- match_solution_shape: exact span comparison with a tabulated generator family
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .algebra import Multiindex, binom, multiindex_enumerate, rat_str
from .errors import DomainError, UnsupportedShapeError
from .jet import JetSpace
from .linalg import Vector, nullspace, rank
from .prolong import VectorField
from .symfields import FieldIndexer, generator_family, span_rank
from .system import SystemSpec

logger = logging.getLogger(__name__)

SHAPES = ("scalar-ode", "projective", "weighted")


@dataclass
class BasisReport:
    """Polynomial part of the symmetry algebra at one ansatz degree"""

    space: JetSpace
    kappa: int
    dimension: int
    generators: List[VectorField] = field(default_factory=list)
    ansatz_degree: int = 0
    stabilized: Optional[bool] = None
    verified: Optional[bool] = None
    equation_count: int = 0
    unknown_count: int = 0
    row_count: int = 0
    independent: Optional[bool] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "n": self.space.n,
            "m": self.space.m,
            "kappa": self.kappa,
            "dimension": self.dimension,
            "ansatz_degree": self.ansatz_degree,
            "stabilized": self.stabilized,
            "verified": self.verified,
            "equations": self.equation_count,
            "unknowns": self.unknown_count,
            "rows": self.row_count,
            "independent": self.independent,
            "generators": [generator_coefficients(X) for X in self.generators],
        }


def generator_coefficients(X: VectorField) -> Dict[str, List[List[str]]]:
    """{component name: [[exponents, coefficient], ...]} in the ring's term order"""
    result: Dict[str, List[List[str]]] = {}
    for label, coeff in zip(
        [f"Q{l}" for l in range(1, X.space.n + 1)] + [f"R{j}" for j in range(1, X.space.m + 1)],
        X.components(),
    ):
        result[label] = [
            [",".join(str(e) for e in monom), rat_str(c)] for monom, c in coeff.terms()
        ]
    return result


def _unknown_layout(space: JetSpace, degree: int) -> Tuple[List[Multiindex], int]:
    basis = multiindex_enumerate(space.n + space.m, degree)
    return basis, len(basis) * (space.n + space.m)


def _falling(exps: Multiindex, orders: Multiindex) -> int:
    factor = 1
    for e, o in zip(exps, orders):
        for step in range(o):
            factor *= e - step
    return factor


def ansatz_solve(system, degree: int) -> BasisReport:
    """Exact nullspace of the determining system over polynomials of total degree <= degree"""
    if degree < 0:
        raise DomainError(f"ansatz degree must be >= 0, got {degree}")
    space = system.space
    basis, unknowns = _unknown_layout(space, degree)
    rows: Dict[Multiindex, Vector] = {}
    row_order: List[Multiindex] = []

    def add(key: Multiindex, column: int, value) -> None:
        if key not in rows:
            rows[key] = {}
            row_order.append(key)
        row = rows[key]
        total = row.get(column, 0) + value
        if total:
            row[column] = total
        else:
            row.pop(column, None)

    for eq_index, eq in enumerate(system.equations):
        if eq.constant:
            raise UnsupportedShapeError("determining equation with a nonzero constant part")
        for symbol, weight in eq.linear.items():
            slot = symbol.component - 1 if symbol.kind == "Q" else space.n + symbol.component - 1
            orders = symbol.orders
            for b, exps in enumerate(basis):
                if any(e < o for e, o in zip(exps, orders)):
                    continue
                factor = _falling(exps, orders)
                shifted = tuple(e - o for e, o in zip(exps, orders))
                column = slot * len(basis) + b
                for wmonom, wcoeff in weight.items():
                    key = (eq_index,) + tuple(a + s for a, s in zip(wmonom, shifted))
                    add(key, column, wcoeff * factor)

    matrix = [rows[key] for key in row_order if rows[key]]
    vectors = nullspace(matrix, unknowns)
    ring = space.ring
    generators = []
    for vec in vectors:
        comps = [ring.zero] * (space.n + space.m)
        for column, value in sorted(vec.items()):
            slot, b = divmod(column, len(basis))
            comps[slot] = comps[slot] + ring.term_new(basis[b], value)
        generators.append(VectorField(space, tuple(comps[: space.n]), tuple(comps[space.n :])))
    report = BasisReport(
        space=space,
        kappa=system.kappa,
        dimension=len(generators),
        generators=generators,
        ansatz_degree=degree,
        equation_count=len(system.equations),
        unknown_count=unknowns,
        row_count=len(matrix),
    )
    logger.debug(
        f"ansatz degree {degree}: {len(matrix)} rows x {unknowns} unknowns "
        f"-> dimension {report.dimension}"
    )
    return report


def stabilization_check(system, degree: int) -> bool:
    """Same dimension at degree and degree + 1"""
    return ansatz_solve(system, degree).dimension == ansatz_solve(system, degree + 1).dimension


def theorem1_bound(n: int, m: int, kappa: int) -> int:
    """Dimension of the symmetry algebra of the homogeneous order-kappa system"""
    if kappa < 2:
        raise DomainError(f"kappa must be >= 2, got {kappa}")
    if n < 1 or m < 1:
        raise DomainError(f"need n, m >= 1, got n={n}, m={m}")
    if kappa == 2:
        return (n + m + 2) * (n + m)
    return n * n + 2 * n + m * m + m * binom(n + kappa - 1, kappa - 1)


def family_vector_fields(name: str, n: int, m: int, kappa: int) -> List[VectorField]:
    return [gen.field() for gen in generator_family(name, n, m, kappa)]


@dataclass
class ShapeMatch:
    """Span comparison outcome; truthy when the spans coincide"""

    matches: bool
    detail: str = ""

    def __bool__(self) -> bool:
        return self.matches


def match_solution_shape(report: BasisReport, shape: str) -> ShapeMatch:
    """Exact equality of span(report.generators) and the span of the named family"""
    n, m, kappa = report.space.n, report.space.m, report.kappa
    if shape not in SHAPES:
        raise DomainError(f"unknown shape {shape!r}; choose from {', '.join(SHAPES)}")
    if shape == "scalar-ode" and ((n, m) != (1, 1) or kappa < 3):
        raise DomainError("scalar-ode needs n = m = 1 and kappa >= 3")
    if shape == "projective" and kappa != 2:
        raise DomainError("the projective shape describes order-2 systems")
    if shape == "weighted" and kappa < 3:
        raise DomainError("the weighted shape needs kappa >= 3")
    family = [X.transfer(report.space) for X in family_vector_fields(shape, n, m, kappa)]
    indexer = FieldIndexer()
    ours = [indexer.vector(X) for X in report.generators]
    theirs = [indexer.vector(X) for X in family]
    columns = len(indexer.columns)
    r_ours, r_theirs = rank(ours, columns), rank(theirs, columns)
    r_both = rank(ours + theirs, columns)
    if r_ours == r_theirs == r_both:
        return ShapeMatch(True, f"spans agree, dimension {r_ours}")
    for X, vec in zip(family, theirs):
        if rank(ours + [vec], columns) > r_ours:
            return ShapeMatch(False, f"family field {X.format()} is not in the solution span")
    for X, vec in zip(report.generators, ours):
        if rank(theirs + [vec], columns) > r_theirs:
            return ShapeMatch(False, f"solution field {X.format()} is not in the family span")
    return ShapeMatch(False, f"dimension mismatch: {r_ours} vs {r_theirs}")


def solve_system(
    spec: SystemSpec, degree: Optional[int] = None, check_stability: bool = True
) -> BasisReport:
    """Determining system, ansatz solve, optional stabilization and Lie-criterion cross-check"""
    from .determine import determining_system, verify_field

    degree = spec.kappa if degree is None else degree
    logger.info(
        f"🔄 Solving order-{spec.kappa} system (n={spec.n}, m={spec.m}) at degree {degree}"
    )
    system = determining_system(spec)
    report = ansatz_solve(system, degree)
    if check_stability:
        report.stabilized = ansatz_solve(system, degree + 1).dimension == report.dimension
    report.verified = all(verify_field(spec, X) for X in report.generators)
    status = "✅" if report.verified else "❌"
    logger.info(
        f"{status} dimension {report.dimension} at degree {degree}"
        + ("" if report.stabilized is None else f", stabilized: {report.stabilized}")
    )
    if not report.verified:
        logger.error("❌ some generators fail the Lie criterion")
    report.independent = span_rank(report.generators) == report.dimension
    if not report.independent:
        logger.error("❌ generators are linearly dependent")
    return report
