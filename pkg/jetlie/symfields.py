"""
Lie-algebra structure on concrete vector fields and finite symmetries.

- bracket / closure_check: commutators, span membership, structure constants
- prolong_bracket_identity: [X^(k), Y^(k)] == [X, Y]^(k) coefficient by coefficient
- Generator / generator_family: the tabulated symmetry generators and their exact flows
- RationalMap and finite_symmetry_check: does a point map send polynomial solutions of
  degree <= kappa-1 to polynomial solutions again
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ
from typing_extensions import Self

from .algebra import (
    Multiindex,
    Poly,
    Rat,
    evaluate_poly,
    format_poly,
    multiindex_enumerate,
    poly_compose,
    poly_ring,
    poly_total_degree,
    rat,
    rat_str,
    truncate,
)
from .config import Config
from .errors import DomainError, ResourceError, UnsupportedShapeError
from .jet import JetSpace
from .linalg import Vector, dense_rank, in_span, rank
from .prolong import VectorField, prolong_field
from .series import linear_part, reversion, series_compose, series_inverse

logger = logging.getLogger(__name__)

FAMILIES = ("projective", "weighted", "scalar-ode")


# Brackets and closure
def bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y] = X(Y) - Y(X) componentwise"""
    if not (X.is_concrete() and Y.is_concrete()):
        raise DomainError("bracket needs concrete vector fields")
    if X.space != Y.space:
        raise DomainError("bracket of fields on different spaces")
    parts = [X.apply(b) - Y.apply(a) for a, b in zip(X.components(), Y.components())]
    n = X.space.n
    return VectorField(X.space, tuple(parts[:n]), tuple(parts[n:]))


class FieldIndexer:
    """Coordinates of concrete fields in the monomial basis (component, exponent)"""

    def __init__(self):
        self.columns: Dict[Tuple[int, Multiindex], int] = {}

    def vector(self, X: VectorField) -> Vector:
        vec: Vector = {}
        for slot, coeff in enumerate(X.components()):
            for monom, value in coeff.items():
                key = (slot, monom)
                if key not in self.columns:
                    self.columns[key] = len(self.columns)
                vec[self.columns[key]] = value
        return vec


def span_rank(fields: Sequence[VectorField]) -> int:
    indexer = FieldIndexer()
    vectors = [indexer.vector(X) for X in fields]
    return rank(vectors, len(indexer.columns))


@dataclass
class ClosureReport:
    """Result of closure_check; structure constants refer to the independent basis"""

    closed: bool
    dimension: int
    size: int
    basis: List[int] = field(default_factory=list)
    structure_constants: Dict[Tuple[int, int], List[Rat]] = field(default_factory=dict)
    offending: Optional[Tuple[int, int]] = None
    offending_bracket: Optional[str] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "closed": self.closed,
            "dimension": self.dimension,
            "generators": self.size,
            "basis": self.basis,
            "structure_constants": {
                f"{a},{b}": [rat_str(c) for c in coeffs]
                for (a, b), coeffs in sorted(self.structure_constants.items())
            },
            "offending": list(self.offending) if self.offending else None,
            "offending_bracket": self.offending_bracket,
        }


def closure_check(gens: Sequence[VectorField]) -> ClosureReport:
    """Is the span of gens stable under brackets? Structure constants when it is"""
    indexer = FieldIndexer()
    vectors = [indexer.vector(X) for X in gens]
    basis: List[int] = []
    for index, vec in enumerate(vectors):
        candidate = [vectors[b] for b in basis] + [vec]
        if rank(candidate, len(indexer.columns)) == len(candidate):
            basis.append(index)
    report = ClosureReport(closed=True, dimension=len(basis), size=len(gens), basis=basis)
    basis_vectors = [vectors[b] for b in basis]
    for a, b in combinations(range(len(gens)), 2):
        product = bracket(gens[a], gens[b])
        coeffs = in_span(basis_vectors, indexer.vector(product))
        if coeffs is None:
            report.closed = False
            report.offending = (a, b)
            report.offending_bracket = product.format()
            report.structure_constants = {}
            logger.info(
                f"❌ bracket of generators {a} and {b} leaves the span: {product.format()}"
            )
            return report
        if a in basis and b in basis:
            report.structure_constants[(basis.index(a), basis.index(b))] = coeffs
    logger.info(f"✅ closed under brackets, dimension {report.dimension}")
    return report


def prolong_bracket_identity(X: VectorField, Y: VectorField, kappa: int) -> bool:
    """Jet-space commutator of the prolonged fields equals the prolonged commutator"""
    if kappa > Config.BRACKET_KAPPA_GUARD:
        raise ResourceError(
            f"bracket identity requested at order {kappa}",
            f"orders above {Config.BRACKET_KAPPA_GUARD} are not supported for this check",
        )
    PX, PY = prolong_field(X, kappa), prolong_field(Y, kappa)
    PZ = prolong_field(bracket(X, Y), kappa)
    for coord in PZ.coordinates():
        lhs = PX.apply(PY.coeffs[coord]) - PY.apply(PX.coeffs[coord])
        if lhs != PZ.coeffs[coord]:
            logger.debug(f"bracket identity fails at {coord.label(X.space)}")
            return False
    return True


# Rational point maps
@dataclass(frozen=True)
class RationalMap:
    """(x, u) -> (num_c / den_c) for the n + m target components; den_c(0) != 0"""

    space: JetSpace
    components: Tuple[Tuple[Poly, Poly], ...]

    def __post_init__(self):
        space = self.space
        if len(self.components) != space.n + space.m:
            raise DomainError(f"rational map needs {space.n + space.m} components")
        for index, (num, den) in enumerate(self.components):
            if num.ring != space.ring or den.ring != space.ring:
                raise DomainError("rational map component lives in another ring")
            if not den.coeff(1):
                raise DomainError(
                    f"denominator of {space.names[index]}' vanishes at the origin"
                )

    @classmethod
    def identity(cls, space: JetSpace) -> Self:
        ring = space.ring
        return cls(space, tuple((gen, ring.one) for gen in ring.gens))

    @classmethod
    def from_polys(
        cls,
        space: JetSpace,
        numerators: Sequence[Poly],
        denominators: Optional[Sequence[Poly]] = None,
    ) -> Self:
        ring = space.ring
        dens = list(denominators) if denominators is not None else [ring.one] * len(numerators)
        return cls(space, tuple((ring(a), ring(b)) for a, b in zip(numerators, dens)))

    @property
    def numerators(self) -> Tuple[Poly, ...]:
        return tuple(num for num, _ in self.components)

    @property
    def denominators(self) -> Tuple[Poly, ...]:
        return tuple(den for _, den in self.components)

    def compose(self, inner: "RationalMap") -> "RationalMap":
        """self after inner"""
        if inner.space != self.space:
            raise DomainError("cannot compose maps on different spaces")
        ring = self.space.ring
        powers: Dict[Tuple[int, int, int], Poly] = {}

        def power(which: int, slot: int, exp: int) -> Poly:
            key = (which, slot, exp)
            if key not in powers:
                base = inner.components[slot][which]
                powers[key] = ring.one if exp == 0 else power(which, slot, exp - 1) * base
            return powers[key]

        def cleared(p: Poly, bounds: Sequence[int]) -> Poly:
            total = ring.zero
            for monom, coeff in p.iterterms():
                term = ring.ground_new(coeff)
                for slot, (exp, bound) in enumerate(zip(monom, bounds)):
                    term = term * power(0, slot, exp) * power(1, slot, bound - exp)
                total = total + term
            return total

        components = []
        for num, den in self.components:
            bounds = [
                max([monom[slot] for monom in list(num.keys()) + list(den.keys())] or [0])
                for slot in range(ring.ngens)
            ]
            components.append((cleared(num, bounds), cleared(den, bounds)))
        return RationalMap(self.space, tuple(components)).normalized()

    def normalized(self) -> "RationalMap":
        """Denominators scaled to 1 at the origin; exact quotients replace fractions"""
        ring = self.space.ring
        components = []
        for num, den in self.components:
            scale = QQ.one / den.coeff(1)
            num, den = num * scale, den * scale
            if not den.is_ground:
                quotient, remainder = divmod(num, den)
                if not remainder:
                    num, den = quotient, ring.one
            components.append((num, den))
        return RationalMap(self.space, tuple(components))

    def equals(self, other: "RationalMap") -> bool:
        return self.space == other.space and all(
            a * d == b * c
            for (a, b), (c, d) in zip(self.components, other.components)
        )

    def is_identity(self) -> bool:
        return self.equals(RationalMap.identity(self.space))

    def jacobian_at_origin(self) -> List[List[Rat]]:
        ring = self.space.ring
        rows = []
        for num, den in self.components:
            n0, d0 = num.coeff(1), den.coeff(1)
            rows.append(
                [
                    (num.diff(gen).coeff(1) * d0 - n0 * den.diff(gen).coeff(1)) / (d0 * d0)
                    for gen in ring.gens
                ]
            )
        return rows

    def is_invertible_at_origin(self) -> bool:
        return dense_rank(self.jacobian_at_origin()) == self.space.n + self.space.m

    def evaluate(self, point: Sequence) -> List[Rat]:
        values = [rat(v) for v in point]
        return [
            evaluate_poly(num, values) / evaluate_poly(den, values)
            for num, den in self.components
        ]

    def format(self) -> List[str]:
        lines = []
        for name, (num, den) in zip(self.space.names, self.components):
            if den == 1:
                lines.append(f"{name}' = {format_poly(num)}")
            else:
                lines.append(f"{name}' = ({format_poly(num)}) / ({format_poly(den)})")
        return lines


def projective_map(space: JetSpace, numerators: Sequence[Poly], gamma: Sequence) -> RationalMap:
    """Affine numerators over the common denominator 1 + sum gamma_v * v"""
    ring = space.ring
    if len(gamma) != ring.ngens:
        raise DomainError(f"gamma needs {ring.ngens} entries")
    for num in numerators:
        if poly_total_degree(ring(num)) > 1:
            raise DomainError(f"projective numerator {format_poly(ring(num))} is not affine")
    den = ring.one + sum((gen * rat(g) for gen, g in zip(ring.gens, gamma) if rat(g)), ring.zero)
    return RationalMap(space, tuple((ring(num), den) for num in numerators))


def weighted_map(
    space: JetSpace,
    kappa: int,
    x_numerators: Sequence[Poly],
    u_numerators: Sequence[Poly],
    epsilon: Sequence,
) -> RationalMap:
    """x' = A(x)/(1 + eps.x), u' = (B u + gamma(x))/(1 + eps.x)^(kappa-1)"""
    ring = space.ring
    n = space.n
    if len(epsilon) != n:
        raise DomainError(f"epsilon needs {n} entries")
    for num in x_numerators:
        num = ring(num)
        if poly_total_degree(num) > 1 or any(any(monom[n:]) for monom in num.keys()):
            raise DomainError(f"x numerator {format_poly(num)} must be affine in x")
    for num in u_numerators:
        num = ring(num)
        for monom in num.keys():
            udeg, xdeg = sum(monom[n:]), sum(monom[:n])
            if (udeg and (udeg > 1 or xdeg)) or (not udeg and xdeg > kappa - 1):
                raise DomainError(
                    f"u numerator {format_poly(num)} must be linear in u plus x-terms "
                    f"of degree <= {kappa - 1}"
                )
    base = ring.one + sum(
        (ring.gens[k] * rat(e) for k, e in enumerate(epsilon) if rat(e)), ring.zero
    )
    return RationalMap(
        space,
        tuple((ring(num), base) for num in x_numerators)
        + tuple((ring(num), base ** (kappa - 1)) for num in u_numerators),
    )


# Tabulated generators and their flows
@dataclass(frozen=True)
class Generator:
    """A tabulated generator: kind plus indices, with its exact flow"""

    kind: str
    space: JetSpace
    indices: Tuple = ()
    kappa: int = 2

    KINDS = (
        "translate_x",
        "linear_x",
        "linear_u",
        "mixed_xu",
        "shear",
        "projective_x",
        "projective_u",
        "weighted_x",
    )

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise UnsupportedShapeError(f"no tabulated flow for generator kind {self.kind!r}")

    @property
    def multiplicative(self) -> bool:
        return self.kind in ("linear_x", "linear_u") and self.indices[0] == self.indices[1]

    def field(self) -> VectorField:
        space = self.space
        ring = space.ring
        Q = [ring.zero] * space.n
        R = [ring.zero] * space.m
        xs = [space.x(l) for l in range(1, space.n + 1)]
        us = [space.u(j) for j in range(1, space.m + 1)]
        kind, idx = self.kind, self.indices
        if kind == "translate_x":
            Q[idx[0] - 1] = ring.one
        elif kind == "linear_x":
            Q[idx[1] - 1] = xs[idx[0] - 1]
        elif kind == "linear_u":
            R[idx[1] - 1] = us[idx[0] - 1]
        elif kind == "mixed_xu":
            Q[idx[1] - 1] = us[idx[0] - 1]
        elif kind == "shear":
            R[idx[0] - 1] = ring.term_new(tuple(idx[1]) + (0,) * space.m, QQ.one)
        elif kind == "projective_x":
            Q = [xs[idx[0] - 1] * x for x in xs]
            R = [xs[idx[0] - 1] * u for u in us]
        elif kind == "projective_u":
            Q = [us[idx[0] - 1] * x for x in xs]
            R = [us[idx[0] - 1] * u for u in us]
        elif kind == "weighted_x":
            Q = [xs[idx[0] - 1] * x for x in xs]
            R = [xs[idx[0] - 1] * u * (self.kappa - 1) for u in us]
        return VectorField(space, tuple(Q), tuple(R))

    @property
    def label(self) -> str:
        return self.field().format()


def exp_flow(gen: Generator, param) -> RationalMap:
    """Exact one-parameter map of a tabulated generator; scalings take a multiplicative parameter"""
    s = rat(param)
    space = gen.space
    ring = space.ring
    images = [(g, ring.one) for g in ring.gens]
    n = space.n
    kind, idx = gen.kind, gen.indices
    if kind == "translate_x":
        slot = idx[0] - 1
        images[slot] = (ring.gens[slot] + s, ring.one)
    elif kind in ("linear_x", "linear_u"):
        offset = 0 if kind == "linear_x" else n
        src, dst = offset + idx[0] - 1, offset + idx[1] - 1
        if src == dst:
            if not s:
                raise DomainError("scaling parameter must be nonzero")
            images[dst] = (ring.gens[dst] * s, ring.one)
        else:
            images[dst] = (ring.gens[dst] + ring.gens[src] * s, ring.one)
    elif kind == "mixed_xu":
        src, dst = n + idx[0] - 1, idx[1] - 1
        images[dst] = (ring.gens[dst] + ring.gens[src] * s, ring.one)
    elif kind == "shear":
        slot = n + idx[0] - 1
        images[slot] = (ring.gens[slot] + gen.field().R[idx[0] - 1] * s, ring.one)
    elif kind in ("projective_x", "projective_u", "weighted_x"):
        pivot = ring.gens[idx[0] - 1 if kind != "projective_u" else n + idx[0] - 1]
        den = ring.one - pivot * s
        images = [(g, den) for g in ring.gens]
        if kind == "weighted_x":
            images[n:] = [(g, den ** (gen.kappa - 1)) for g in ring.gens[n:]]
    return RationalMap(space, tuple(images))


def compose_parameters(gen: Generator, s, t) -> Rat:
    """Parameter of exp_flow(gen, s) after exp_flow(gen, t)"""
    return rat(s) * rat(t) if gen.multiplicative else rat(s) + rat(t)


def inverse_parameter(gen: Generator, s) -> Rat:
    return QQ.one / rat(s) if gen.multiplicative else -rat(s)


def generator_family(name: str, n: int, m: int, kappa: int) -> List[Generator]:
    """Tabulated bases: projective (order-2 systems) and weighted (order >= 3)"""
    space = JetSpace(n, m)
    if name == "scalar-ode":
        if (n, m) != (1, 1):
            raise DomainError("scalar-ode needs n = m = 1")
        name = "weighted"
    if name == "projective":
        if kappa != 2:
            raise DomainError(
                f"the projective family describes order-2 systems, got kappa = {kappa}"
            )
        gens = [Generator("translate_x", space, (k,), kappa) for k in range(1, n + 1)]
        gens += [
            Generator("linear_x", space, (k, k2), kappa)
            for k in range(1, n + 1)
            for k2 in range(1, n + 1)
        ]
        gens += [
            Generator("mixed_xu", space, (i, k), kappa)
            for i in range(1, m + 1)
            for k in range(1, n + 1)
        ]
        gens += [Generator("projective_x", space, (k,), kappa) for k in range(1, n + 1)]
        gens += [Generator("projective_u", space, (i,), kappa) for i in range(1, m + 1)]
        gens += [
            Generator("shear", space, (i, beta), kappa)
            for i in range(1, m + 1)
            for beta in multiindex_enumerate(n, 1)
        ]
        gens += [
            Generator("linear_u", space, (i, i2), kappa)
            for i in range(1, m + 1)
            for i2 in range(1, m + 1)
        ]
        return gens
    if name == "weighted":
        if kappa < 3:
            raise DomainError(f"the weighted family needs kappa >= 3, got {kappa}")
        gens = [Generator("translate_x", space, (k,), kappa) for k in range(1, n + 1)]
        gens += [
            Generator("linear_x", space, (k, k2), kappa)
            for k in range(1, n + 1)
            for k2 in range(1, n + 1)
        ]
        gens += [Generator("weighted_x", space, (k,), kappa) for k in range(1, n + 1)]
        gens += [
            Generator("linear_u", space, (i, i2), kappa)
            for i in range(1, m + 1)
            for i2 in range(1, m + 1)
        ]
        gens += [
            Generator("shear", space, (i, beta), kappa)
            for i in range(1, m + 1)
            for beta in multiindex_enumerate(n, kappa - 1)
        ]
        return gens
    raise DomainError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")


# Finite symmetry verification
@dataclass
class FiniteCheckReport:
    """Per-solution outcome of finite_symmetry_check"""

    passed: bool
    kappa: int
    certified_degree: int
    results: List[Dict[str, object]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> Dict[str, object]:
        return {
            "passed": self.passed,
            "kappa": self.kappa,
            "certified_degree": self.certified_degree,
            "solutions": self.results,
        }


def _x_ring_poly(space: JetSpace, p: Poly) -> Poly:
    """A solution component as a polynomial in x only"""
    rx = poly_ring(space.x_names)
    if p.ring == rx:
        return p
    p = space.ring(p)
    if any(any(monom[space.n:]) for monom in p.keys()):
        raise DomainError(f"solution component {format_poly(p)} depends on u")
    return poly_compose(p, list(rx.gens) + [rx.zero] * space.m, rx)


def _transform(
    h: RationalMap, solution: Sequence[Poly], kappa: int
) -> Tuple[bool, str, Optional[Tuple[Poly, ...]]]:
    space = h.space
    n, m = space.n, space.m
    rx = poly_ring(space.x_names)
    order = 2 * kappa
    sol = [_x_ring_poly(space, p) for p in solution]
    if len(sol) != m:
        raise DomainError(f"a solution needs {m} components, got {len(sol)}")
    for p in sol:
        if poly_total_degree(p) > kappa - 1:
            raise DomainError(f"solution component {format_poly(p)} has degree above {kappa - 1}")
    graph = list(rx.gens) + sol
    nums = [poly_compose(num, graph, rx) for num in h.numerators]
    dens = [poly_compose(den, graph, rx) for den in h.denominators]
    if any(not den.coeff(1) for den in dens):
        return False, "the map is singular at the base point of the solution graph", None

    phi_n, phi_d = nums[:n], dens[:n]
    psi_n, psi_d = nums[n:], dens[n:]
    base = [phi_n[k].coeff(1) / phi_d[k].coeff(1) for k in range(n)]
    tau = [phi_n[k] - phi_d[k] * base[k] for k in range(n)]
    shifted = [truncate(tau[k] * series_inverse(phi_d[k], order), order) for k in range(n)]
    if dense_rank(linear_part(shifted)) < n:
        return False, "the transformed graph is not a graph over x' near the base point", None
    inverse = reversion(shifted, order)

    transformed = []
    for j in range(m):
        psi = truncate(psi_n[j] * series_inverse(psi_d[j], order), order)
        candidate = series_compose(psi, inverse, rx, order)
        high = [monom for monom in candidate.keys() if sum(monom) >= kappa]
        if high:
            degree = min(sum(monom) for monom in high)
            detail = f"component {space.u_names[j]}' has a nonzero term of degree {degree}"
            return False, detail, None
        lhs = psi_n[j]
        for k in range(n):
            lhs = lhs * phi_d[k] ** (kappa - 1)
        rhs = rx.zero
        for monom, coeff in candidate.iterterms():
            term = rx.ground_new(coeff)
            for k in range(n):
                term = term * tau[k] ** monom[k] * phi_d[k] ** (kappa - 1 - monom[k])
            rhs = rhs + term
        if lhs != rhs * psi_d[j]:
            return False, f"component {space.u_names[j]}' is not polynomial", None
        recentred = [rx.gens[k] - base[k] for k in range(n)]
        transformed.append(poly_compose(candidate, recentred, rx))
    return True, "polynomial of degree <= kappa-1", tuple(transformed)


def transformed_solution(
    h: RationalMap, solution: Sequence[Poly], kappa: int
) -> Optional[Tuple[Poly, ...]]:
    """u'(x') for the image of the graph of u(x), or None when it is not polynomial"""
    return _transform(h, solution, kappa)[2]


def finite_symmetry_check(
    h: RationalMap, kappa: int, solutions: Sequence[Sequence[Poly]]
) -> FiniteCheckReport:
    """Certify that h maps each polynomial solution of degree <= kappa-1 to another one"""
    if not h.is_invertible_at_origin():
        raise DomainError("map is not invertible at the origin (singular Jacobian)")
    report = FiniteCheckReport(passed=True, kappa=kappa, certified_degree=2 * kappa)
    for solution in solutions:
        ok, detail, image = _transform(h, solution, kappa)
        report.results.append(
            {
                "solution": [format_poly(_x_ring_poly(h.space, p)) for p in solution],
                "passed": ok,
                "detail": detail,
                "transformed": [format_poly(p) for p in image] if image else None,
            }
        )
        report.passed = report.passed and ok
    logger.debug(f"finite check over {len(solutions)} solutions: {report.passed}")
    return report


def sample_solutions(space: JetSpace, kappa: int) -> List[Tuple[Poly, ...]]:
    """Three fixed polynomial solutions of the homogeneous order-kappa system"""
    rx = poly_ring(space.x_names)
    xs = list(rx.gens)
    top = kappa - 1
    linear = sum((x * QQ(1, k + 2) for k, x in enumerate(xs)), rx.zero)
    samples = [
        tuple(rx.zero for _ in range(space.m)),
        tuple(rx.one * QQ(j, 5) + linear * QQ(1, j + 1) for j in range(1, space.m + 1)),
        tuple(
            rx.one * QQ(1, 3) + (xs[0] ** top) * QQ(1, 5 * j) - xs[-1] * QQ(j, 7)
            for j in range(1, space.m + 1)
        ),
    ]
    return samples
