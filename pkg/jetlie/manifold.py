"""
Submanifolds of solutions u = Omega(x, nu, chi) over truncated power series.

- ManifoldSpec: m defining series in (x, nu, chi), normalized so that Omega(0, nu, chi) = nu
- dual_equations: nu = Omega*(chi, x, u) by fixed-point iteration
- solvability_parameters / solvability_variables: rank of derivative maps at the origin
- degeneracy_check: vector fields in (x, u) tangent to M
- pde_from_manifold / pde_residuals: the completely integrable system whose general solution is M
- chain_map / covering_analysis: alternating flows along the two foliations of M
- jet_bound and lift_to_parameters
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ
from typing_extensions import Self

from .algebra import (
    Multiindex,
    Poly,
    binom,
    format_poly,
    indices_from_multiindex,
    multiindex_enumerate,
    poly_compose,
    poly_derivative,
    poly_ring,
    truncate,
)
from .config import Config
from .errors import DomainError, NotASymmetryError, SpecificationError, UnsupportedShapeError
from .jet import JetCoord, JetSpace
from .jetpoly import CoeffForm, JetPoly
from .linalg import Vector, dense_rank, inverse, nullspace, rank, solve_linear
from .prolong import VectorField
from .series import SeriesMap, rename
from .system import SystemSpec

logger = logging.getLogger(__name__)

Witness = List[Tuple[int, Multiindex]]


def manifold_names(n: int, m: int, p: int) -> Tuple[str, ...]:
    return (
        tuple(f"x{l}" for l in range(1, n + 1))
        + tuple(f"nu{j}" for j in range(1, m + 1))
        + tuple(f"chi{q}" for q in range(1, p + 1))
    )


def dual_names(n: int, m: int, p: int) -> Tuple[str, ...]:
    return (
        tuple(f"chi{q}" for q in range(1, p + 1))
        + tuple(f"x{l}" for l in range(1, n + 1))
        + tuple(f"u{j}" for j in range(1, m + 1))
    )


def _constant(p: Poly) -> object:
    return p.get((0,) * p.ring.ngens, QQ.zero)


@dataclass(frozen=True)
class ManifoldSpec:
    """u^j = Omega_j(x, nu, chi), j = 1..m, with n variables, m + p parameters"""

    n: int
    m: int
    p: int
    omega: SeriesMap

    def __post_init__(self):
        if min(self.n, self.m, self.p) < 1:
            raise SpecificationError(
                f"need n, m, p >= 1, got n={self.n}, m={self.m}, p={self.p}"
            )
        if self.omega.names != manifold_names(self.n, self.m, self.p):
            raise SpecificationError(
                f"defining series must use the variables {', '.join(self.names)}"
            )
        if len(self.omega) != self.m:
            raise SpecificationError(f"need {self.m} defining series, got {len(self.omega)}")
        ring = self.ring
        for j, omega in enumerate(self.omega.outputs, 1):
            at_zero = {mono: c for mono, c in omega.items() if not any(mono[: self.n])}
            if ring.from_dict(at_zero) != ring.gens[self.n + j - 1]:
                raise SpecificationError(
                    f"Omega_{j}(0, nu, chi) must equal nu{j}, "
                    f"got {format_poly(ring.from_dict(at_zero))}"
                )

    @classmethod
    def from_polys(
        cls, n: int, m: int, p: int, omega: Sequence[Poly], truncation: int
    ) -> Self:
        names = manifold_names(n, m, p)
        labels = tuple(f"u{j}" for j in range(1, m + 1))
        return cls(n, m, p, SeriesMap(names, tuple(omega), truncation, labels))

    @property
    def names(self) -> Tuple[str, ...]:
        return manifold_names(self.n, self.m, self.p)

    @property
    def ring(self):
        return poly_ring(self.names)

    @property
    def truncation(self) -> int:
        return self.omega.truncation

    @property
    def dimension(self) -> int:
        return self.n + self.m + self.p

    def x_gens(self) -> List[Poly]:
        return list(self.ring.gens[: self.n])

    def x_derivative(self, j: int, alpha: Multiindex) -> Poly:
        """d^alpha Omega_j with alpha over the x variables"""
        return poly_derivative(self.omega[j - 1], tuple(alpha) + (0,) * (self.m + self.p))

    def format(self) -> List[str]:
        return self.omega.format()

    def to_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "m": self.m,
            "p": self.p,
            "truncation": self.truncation,
            "omega": self.format(),
        }


# Example manifolds
def line_manifold(truncation: Optional[int] = None) -> ManifoldSpec:
    """u = nu + x*chi: the general solution of u_xx = 0"""
    N = truncation or Config.DEFAULT_TRUNCATION
    ring = poly_ring(manifold_names(1, 1, 1))
    x, nu, chi = ring.gens
    return ManifoldSpec.from_polys(1, 1, 1, [nu + x * chi], N)


def polynomial_ode_manifold(kappa: int, truncation: Optional[int] = None) -> ManifoldSpec:
    """u = nu + x*chi1 + ... + x^(kappa-1)*chi_(kappa-1): the general solution of u^(kappa) = 0"""
    if kappa < 2:
        raise DomainError(f"kappa must be >= 2, got {kappa}")
    N = truncation or 2 * kappa + 2
    if N < kappa:
        raise DomainError(f"truncation {N} drops the x^{kappa - 1}*chi term")
    ring = poly_ring(manifold_names(1, 1, kappa - 1))
    x, nu = ring.gens[0], ring.gens[1]
    omega = nu
    for q in range(1, kappa):
        omega = omega + x**q * ring.gens[1 + q]
    return ManifoldSpec.from_polys(1, 1, kappa - 1, [omega], N)


def degenerate_plane_manifold(truncation: Optional[int] = None) -> ManifoldSpec:
    """u = nu + x1*chi in two variables; x2 never appears"""
    N = truncation or Config.DEFAULT_TRUNCATION
    ring = poly_ring(manifold_names(2, 1, 1))
    x1, _, nu, chi = ring.gens
    return ManifoldSpec.from_polys(2, 1, 1, [nu + x1 * chi], N)


def split_manifold(truncation: Optional[int] = None) -> ManifoldSpec:
    """u1 = nu1, u2 = nu2 + x*chi"""
    N = truncation or Config.DEFAULT_TRUNCATION
    ring = poly_ring(manifold_names(1, 2, 1))
    x, nu1, nu2, chi = ring.gens
    return ManifoldSpec.from_polys(1, 2, 1, [nu1, nu2 + x * chi], N)


# Duality
def dual_equations(M: ManifoldSpec) -> SeriesMap:
    """Omega* with u = Omega(x, Omega*(chi, x, u), chi) up to the truncation"""
    n, m, p, N = M.n, M.m, M.p, M.truncation
    names = dual_names(n, m, p)
    ring = poly_ring(names)
    chi, xs, us = ring.gens[:p], ring.gens[p : p + n], ring.gens[p + n :]
    # Omega - nu vanishes at x = 0, so each pass fixes one more degree
    tails = [omega - M.ring.gens[n + j] for j, omega in enumerate(M.omega.outputs)]
    nu = list(us)
    for step in range(N + 1):
        images = list(xs) + nu + list(chi)
        updated = [
            truncate(us[j] - poly_compose(tails[j], images, ring, N), N) for j in range(m)
        ]
        if updated == nu:
            logger.debug(f"dual equations stabilized after {step + 1} passes")
            break
        nu = updated
    labels = tuple(f"nu{j}" for j in range(1, m + 1))
    return SeriesMap(names, tuple(nu), N, labels)


def functional_residual(M: ManifoldSpec, dual: Optional[SeriesMap] = None) -> List[Poly]:
    """u - Omega(x, Omega*(chi, x, u), chi), truncated; zero for a correct dual"""
    dual = dual if dual is not None else dual_equations(M)
    ring = dual.ring
    n, p, N = M.n, M.p, M.truncation
    chi, xs, us = ring.gens[:p], ring.gens[p : p + n], ring.gens[p + n :]
    images = list(xs) + list(dual.outputs) + list(chi)
    return [
        truncate(us[j] - poly_compose(omega, images, ring, N), N)
        for j, omega in enumerate(M.omega.outputs)
    ]


def swap_roles(M: ManifoldSpec) -> ManifoldSpec:
    """The dual manifold: variables chi, unknowns nu, parameters (u, x)"""
    dual = dual_equations(M)
    target = poly_ring(manifold_names(M.p, M.m, M.n))
    mapping = (
        [f"x{q}" for q in range(1, M.p + 1)]
        + [f"chi{l}" for l in range(1, M.n + 1)]
        + [f"nu{j}" for j in range(1, M.m + 1)]
    )
    outputs = [rename(poly, target, mapping) for poly in dual.outputs]
    try:
        return ManifoldSpec.from_polys(M.p, M.m, M.n, outputs, M.truncation)
    except SpecificationError as exc:
        raise SpecificationError(
            f"the dual defining equations are not normalized: {exc}; "
            "swapping roles needs Omega(x, nu, 0) = nu"
        ) from exc


# Solvability
@dataclass
class SolvabilityReport:
    """Rank of a derivative map at the origin, grown order by order"""

    kind: str
    solvable: bool
    order: Optional[int]
    rank: int
    target: int
    order_cap: int
    witness: Witness = field(default_factory=list)
    profile: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            "kind": self.kind,
            "solvable": self.solvable,
            "order": self.order,
            "rank": self.rank,
            "target": self.target,
            "order_cap": self.order_cap,
            "witness": [[j, list(beta)] for j, beta in self.witness],
            "rank_profile": self.profile,
        }


def _derivative_rows(
    outputs: Sequence[Poly],
    diff_slots: Sequence[int],
    var_slots: Sequence[int],
    order: int,
) -> List[Tuple[Tuple[int, Multiindex], Vector]]:
    """Rows d_v (d^beta f_j)(0) for |beta| == order, in graded order"""
    rows = []
    ngens = outputs[0].ring.ngens
    for beta in multiindex_enumerate(len(diff_slots), order):
        if sum(beta) != order:
            continue
        factor = math.prod(math.factorial(b) for b in beta)
        for j, poly in enumerate(outputs, 1):
            row: Vector = {}
            for column, v in enumerate(var_slots):
                exps = [0] * ngens
                for slot, b in zip(diff_slots, beta):
                    exps[slot] = b
                exps[v] += 1
                value = poly.get(tuple(exps), QQ.zero)
                if value:
                    row[column] = value * factor
            rows.append(((j, beta), row))
    return rows


def _greedy_rank(
    kind: str,
    outputs: Sequence[Poly],
    diff_slots: Sequence[int],
    var_slots: Sequence[int],
    order_cap: int,
    target: int,
) -> SolvabilityReport:
    chosen: List[Vector] = []
    witness: Witness = []
    profile: List[int] = []
    ncols = len(var_slots)
    for order in range(order_cap + 1):
        for key, row in _derivative_rows(outputs, diff_slots, var_slots, order):
            if len(chosen) == target or not row:
                continue
            if rank(chosen + [row], ncols) > len(chosen):
                chosen.append(row)
                witness.append(key)
        profile.append(len(chosen))
        if len(chosen) == target:
            return SolvabilityReport(kind, True, order, target, target, order_cap, witness, profile)
    return SolvabilityReport(kind, False, None, len(chosen), target, order_cap, witness, profile)


def solvability_parameters(M: ManifoldSpec, order_cap: Optional[int] = None) -> SolvabilityReport:
    """Smallest l0 with rank m + p for (nu, chi) -> (d^beta Omega_j(0, nu, chi))_{|beta| <= l0}"""
    order_cap = M.truncation - 1 if order_cap is None else order_cap
    if not 0 <= order_cap <= M.truncation:
        raise DomainError(f"order cap must lie in 0..{M.truncation}, got {order_cap}")
    n, m, p = M.n, M.m, M.p
    report = _greedy_rank(
        "parameters",
        M.omega.outputs,
        list(range(n)),
        list(range(n, n + m + p)),
        order_cap,
        m + p,
    )
    logger.debug(f"solvability in the parameters: {report.to_dict()}")
    return report


def solvability_variables(
    M: ManifoldSpec, order_cap: Optional[int] = None, dual: Optional[SeriesMap] = None
) -> SolvabilityReport:
    """Smallest l0* with rank n + m for (x, u) -> (d^gamma Omega*_j(0, x, u))_{|gamma| <= l0*}"""
    order_cap = M.truncation - 1 if order_cap is None else order_cap
    if not 0 <= order_cap <= M.truncation:
        raise DomainError(f"order cap must lie in 0..{M.truncation}, got {order_cap}")
    dual = dual if dual is not None else dual_equations(M)
    n, m, p = M.n, M.m, M.p
    report = _greedy_rank(
        "variables",
        dual.outputs,
        list(range(p)),
        list(range(p, p + n + m)),
        order_cap,
        n + m,
    )
    logger.debug(f"solvability in the variables: {report.to_dict()}")
    return report


# Tangency of fields in (x, u)
def _on_manifold(M: ManifoldSpec, poly: Poly, order: int) -> Poly:
    """f(x, Omega(x, nu, chi)) for f in (x, u)"""
    return poly_compose(poly, M.x_gens() + list(M.omega.outputs), M.ring, order)


def _field_columns(M: ManifoldSpec, degree: int) -> Tuple[List[Multiindex], List[List[Poly]]]:
    """Per unknown coefficient column, its contribution to each defining equation"""
    N = M.truncation - 1
    n, m = M.n, M.m
    ring = M.ring
    basis = multiindex_enumerate(n + m, degree)
    base_ring = JetSpace(n, m).ring
    slopes = [
        [
            poly_derivative(omega, tuple(1 if s == l else 0 for s in range(ring.ngens)))
            for l in range(n)
        ]
        for omega in M.omega.outputs
    ]
    columns: List[List[Poly]] = []
    for slot in range(n + m):
        for exps in basis:
            value = _on_manifold(M, base_ring.term_new(exps, QQ.one), N)
            contribution = []
            for j in range(m):
                if slot < n:
                    contribution.append(truncate(-value * slopes[j][slot], N))
                else:
                    contribution.append(value if slot - n == j else ring.zero)
            columns.append(contribution)
    return basis, columns


def _rows_from_columns(columns: Sequence[Sequence[Poly]]) -> List[Vector]:
    rows: Dict[Tuple[int, Multiindex], Vector] = {}
    order: List[Tuple[int, Multiindex]] = []
    for column, contribution in enumerate(columns):
        for j, poly in enumerate(contribution):
            for mono, value in poly.items():
                key = (j, mono)
                if key not in rows:
                    rows[key] = {}
                    order.append(key)
                rows[key][column] = value
    return [rows[key] for key in order]


def degeneracy_check(M: ManifoldSpec, degree: int) -> Optional[VectorField]:
    """A nonzero polynomial field sum Q^l d/dx_l + R^j d/du^j tangent to M, or None"""
    if not 0 <= degree <= M.truncation - 1:
        raise DomainError(f"degree must lie in 0..{M.truncation - 1}, got {degree}")
    basis, columns = _field_columns(M, degree)
    rows = _rows_from_columns(columns)
    vectors = nullspace(rows, len(columns))
    if not vectors:
        logger.debug(f"no tangent field of degree <= {degree} at truncation {M.truncation}")
        return None
    space = JetSpace(M.n, M.m)
    comps = [space.ring.zero] * (M.n + M.m)
    for column, value in sorted(vectors[0].items()):
        slot, b = divmod(column, len(basis))
        comps[slot] = comps[slot] + space.ring.term_new(basis[b], value)
    witness = VectorField(space, tuple(comps[: M.n]), tuple(comps[M.n :]))
    logger.debug(f"degenerate: {len(vectors)} tangent fields, first {witness.format()}")
    return witness


# The associated system
def _witness_coord(j: int, beta: Multiindex) -> JetCoord:
    return JetCoord(j, indices_from_multiindex(beta))


def pde_from_manifold(M: ManifoldSpec, order_cap: Optional[int] = None) -> SystemSpec:
    """Eliminate (nu, chi) through the solvability witness; declare every other jet up to l0 + 1"""
    solv = solvability_parameters(M, order_cap)
    if not solv.solvable:
        raise UnsupportedShapeError(
            f"not solvable with respect to the parameters up to order {solv.order_cap} "
            f"(rank {solv.rank} of {solv.target})"
        )
    n, m, p, N = M.n, M.m, M.p, M.truncation
    kappa = solv.order + 1
    if kappa < 2:
        raise UnsupportedShapeError("the associated system would have order < 2")
    size = m + p
    G = [M.x_derivative(j, beta) for j, beta in solv.witness]
    if any(_constant(g) for g in G):
        raise UnsupportedShapeError("witness derivatives do not vanish at the origin")
    ring = M.ring
    units = [tuple(1 if s == n + c else 0 for s in range(ring.ngens)) for c in range(size)]
    matrix = [[g.get(unit, QQ.zero) for unit in units] for g in G]
    inv = inverse(matrix)
    tails = [
        g - sum((ring.gens[n + c] * matrix[q][c] for c in range(size) if matrix[q][c]), ring.zero)
        for q, g in enumerate(G)
    ]

    work = poly_ring(
        tuple(f"x{l}" for l in range(1, n + 1)) + tuple(f"w{q}" for q in range(1, size + 1))
    )
    xs, ws = list(work.gens[:n]), list(work.gens[n:])

    def apply_inverse(values: Sequence[Poly]) -> List[Poly]:
        return [
            sum((values[c] * inv[row][c] for c in range(size) if inv[row][c]), work.zero)
            for row in range(size)
        ]

    params = apply_inverse(ws)
    for _ in range(N + 1):
        shifted = [ws[q] - poly_compose(tail, xs + params, work, N) for q, tail in enumerate(tails)]
        updated = [truncate(poly, N) for poly in apply_inverse(shifted)]
        if updated == params:
            break
        params = updated

    space = JetSpace(n, m)
    witness_set = set(solv.witness)
    parametric = tuple(
        sorted(_witness_coord(j, beta) for j, beta in solv.witness if sum(beta))
    )
    equations: Dict[JetCoord, JetPoly] = {}
    for j in range(1, m + 1):
        for alpha in multiindex_enumerate(n, kappa):
            if not sum(alpha) or (j, alpha) in witness_set:
                continue
            value = poly_compose(M.x_derivative(j, alpha), xs + params, work, N)
            equations[_witness_coord(j, alpha)] = _to_jet_poly(space, value, solv.witness)
    logger.info(
        f"🔄 associated system of order {kappa}: {len(equations)} equations, "
        f"{len(parametric)} parametric jets"
    )
    return SystemSpec(space, kappa, equations, parametric=parametric)


def _to_jet_poly(space: JetSpace, value: Poly, witness: Witness) -> JetPoly:
    """Poly in (x, w) to a jet polynomial, w_q being the q-th witness jet"""
    n = space.n
    grouped: Dict[Tuple, Dict[Multiindex, object]] = {}
    for exps, coeff in value.items():
        base = list(exps[:n]) + [0] * space.m
        powers: Dict[JetCoord, int] = {}
        for (j, beta), e in zip(witness, exps[n:]):
            if not e:
                continue
            if sum(beta):
                coord = _witness_coord(j, beta)
                powers[coord] = powers.get(coord, 0) + e
            else:
                base[n + j - 1] += e
        mono = tuple(sorted(powers.items()))
        bucket = grouped.setdefault(mono, {})
        key = tuple(base)
        bucket[key] = bucket.get(key, QQ.zero) + coeff
    terms = {
        mono: CoeffForm.from_poly(space, space.ring.from_dict(bucket))
        for mono, bucket in grouped.items()
    }
    return JetPoly(space, terms)


def _jet_on_manifold(M: ManifoldSpec, coord: JetCoord) -> Poly:
    if coord.order == 0:
        return M.omega[coord.component - 1]
    return M.x_derivative(coord.component, coord.multiindex(M.n))


def pde_residuals(M: ManifoldSpec, system: SystemSpec) -> Dict[JetCoord, Poly]:
    """U_c - F_c with u = Omega substituted, truncated at degree N - kappa"""
    if (system.n, system.m) != (M.n, M.m):
        raise DomainError("system and manifold have different (n, m)")
    order = max(M.truncation - system.kappa, 0)
    images = M.x_gens() + list(M.omega.outputs)
    residuals: Dict[JetCoord, Poly] = {}
    for coord, rhs in system.equations.items():
        total = _jet_on_manifold(M, coord)
        for mono, cf in rhs.items():
            if not cf.is_constant():
                raise DomainError("pde_residuals needs concrete right-hand sides")
            term = poly_compose(cf.constant, images, M.ring, order)
            for jet, power in mono:
                term = truncate(term * _jet_on_manifold(M, jet) ** power, order)
            total = total - term
        residuals[coord] = truncate(total, order)
    return residuals


# Chains
@dataclass(frozen=True)
class ChainMap:
    """Alternating flows along the two foliations, composed into one series map"""

    n: int
    m: int
    p: int
    steps: Tuple[str, ...]
    composed: SeriesMap

    @property
    def dual_first(self) -> bool:
        return self.steps[0] == "chi"

    @property
    def parameters(self) -> Tuple[str, ...]:
        return self.composed.names

    def restrict_first_block(self) -> "ChainMap":
        """Set the first block of parameters to 0 and renumber the remaining blocks"""
        if len(self.steps) < 2:
            raise DomainError("restricting needs a chain with at least two blocks")
        steps = self.steps[1:]
        names = _chain_names(self.n, self.p, steps)
        ring = poly_ring(names)
        first = self.n if self.steps[0] == "x" else self.p
        mapping = [None] * first + list(names)
        outputs = tuple(rename(poly, ring, mapping) for poly in self.composed.outputs)
        return ChainMap(
            self.n,
            self.m,
            self.p,
            steps,
            SeriesMap(names, outputs, self.composed.truncation, self.composed.labels),
        )


def _chain_names(n: int, p: int, steps: Sequence[str]) -> Tuple[str, ...]:
    names: List[str] = []
    for b, kind in enumerate(steps, 1):
        width = n if kind == "x" else p
        names.extend(f"{kind}{b}_{i}" for i in range(1, width + 1))
    return tuple(names)


def point_labels(n: int, m: int, p: int) -> Tuple[str, ...]:
    return (
        tuple(f"x{l}" for l in range(1, n + 1))
        + tuple(f"u{j}" for j in range(1, m + 1))
        + tuple(f"nu{j}" for j in range(1, m + 1))
        + tuple(f"chi{q}" for q in range(1, p + 1))
    )


def chain_map(
    M: ManifoldSpec, k: int, dual_first: bool = False, dual: Optional[SeriesMap] = None
) -> ChainMap:
    """Gamma_k (or Gamma*_k): k alternating flows started at the origin of M"""
    if k < 1:
        raise DomainError(f"chain length must be >= 1, got {k}")
    dual = dual if dual is not None else dual_equations(M)
    n, m, p, N = M.n, M.m, M.p, M.truncation
    kinds = ("chi", "x") if dual_first else ("x", "chi")
    steps = tuple(kinds[b % 2] for b in range(k))
    names = _chain_names(n, p, steps)
    ring = poly_ring(names)
    x = [ring.zero] * n
    u = [ring.zero] * m
    nu = [ring.zero] * m
    chi = [ring.zero] * p
    offset = 0
    for kind in steps:
        if kind == "x":
            x = [x[l] + ring.gens[offset + l] for l in range(n)]
            offset += n
            u = [poly_compose(omega, x + nu + chi, ring, N) for omega in M.omega.outputs]
        else:
            chi = [chi[q] + ring.gens[offset + q] for q in range(p)]
            offset += p
            nu = [poly_compose(star, chi + x + u, ring, N) for star in dual.outputs]
    composed = SeriesMap(names, tuple(x + u + nu + chi), N, point_labels(n, m, p))
    return ChainMap(n, m, p, steps, composed)


@dataclass
class CoveringReport:
    """Generic ranks of the chains Gamma_1 .. Gamma_k"""

    covering: bool
    k_min: Optional[int]
    rank_profile: List[int]
    target: int
    k_max: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "covering": self.covering,
            "k_min": self.k_min,
            "rank_profile": self.rank_profile,
            "target": self.target,
            "k_max": self.k_max,
        }


def sample_points(count: int, size: int, seed: Optional[int] = None) -> List[List[object]]:
    """Deterministic pseudorandom small rational points"""
    rng = random.Random(Config.RANK_SEED if seed is None else seed)
    return [
        [QQ(rng.randint(-9, 9), rng.randint(1, 7)) for _ in range(size)] for _ in range(count)
    ]


def generic_rank(series: SeriesMap, samples: Optional[int] = None) -> int:
    """Max exact Jacobian rank over seeded sample points; a lower bound on the generic rank"""
    points = sample_points(samples or Config.RANK_SAMPLES, len(series.names))
    return max(dense_rank(series.jacobian_at(point)) for point in points)


def covering_analysis(M: ManifoldSpec, k_max: Optional[int] = None) -> CoveringReport:
    """First k for which Gamma_k reaches rank dim M = n + m + p"""
    k_max = 2 * (M.m + 2) if k_max is None else k_max
    if k_max < 1:
        raise DomainError(f"k_max must be >= 1, got {k_max}")
    dual = dual_equations(M)
    target = M.dimension
    profile: List[int] = []
    for k in range(1, k_max + 1):
        value = generic_rank(chain_map(M, k, dual=dual).composed)
        profile.append(value)
        logger.debug(f"chain {k}: rank {value} of {target}")
        if value == target:
            return CoveringReport(True, k, profile, target, k_max)
    return CoveringReport(False, None, profile, target, k_max)


def jet_bound(n: int, m: int, p: int, l0: int, l0_star: int, mu0: int) -> Tuple[int, int]:
    """Jet order kappa0 = mu0 (l0 + l0*) determining a symmetry, and the dimension bound"""
    values = {"n": n, "m": m, "p": p, "l0": l0, "l0*": l0_star, "mu0": mu0}
    for name, value in values.items():
        if value < 1:
            raise DomainError(f"{name} must be >= 1, got {value}")
    kappa0 = mu0 * (l0 + l0_star)
    bound = (n + m) * binom(n + m + kappa0, kappa0) + (m + p) * binom(m + p + kappa0, kappa0)
    return kappa0, bound


# Lifting a field to the parameters
@dataclass
class Lift:
    """Parameter part sum Pi^j d/dnu^j + Lambda^q d/dchi_q of a tangent field"""

    vector_field: VectorField
    pi: Tuple[Poly, ...]
    lam: Tuple[Poly, ...]
    unique: bool

    def format(self) -> List[str]:
        return [f"Pi{j} = {format_poly(poly)}" for j, poly in enumerate(self.pi, 1)] + [
            f"Lambda{q} = {format_poly(poly)}" for q, poly in enumerate(self.lam, 1)
        ]

    def to_dict(self) -> Dict[str, object]:
        return {
            "field": self.vector_field.format(),
            "pi": [format_poly(poly) for poly in self.pi],
            "lambda": [format_poly(poly) for poly in self.lam],
            "unique": self.unique,
        }


def _parameter_ring(M: ManifoldSpec):
    return poly_ring(M.names[M.n :])


def lift_residual(M: ManifoldSpec, lift: Lift) -> List[Poly]:
    """(X + parameter part) applied to u - Omega on M, truncated at N - 1"""
    N = M.truncation - 1
    ring = M.ring
    n, m = M.n, M.m
    to_manifold = [ring.gens[n + s] for s in range(M.m + M.p)]
    result = []
    for j, omega in enumerate(M.omega.outputs):
        value = _on_manifold(M, lift.vector_field.R[j], N)
        for l in range(n):
            slope = poly_derivative(omega, tuple(1 if s == l else 0 for s in range(ring.ngens)))
            value = value - _on_manifold(M, lift.vector_field.Q[l], N) * slope
        for s, part in enumerate(lift.pi + lift.lam):
            if not part:
                continue
            slope = poly_derivative(omega, tuple(1 if t == n + s else 0 for t in range(ring.ngens)))
            value = value - poly_compose(part, to_manifold, ring, N) * slope
        result.append(truncate(value, N))
    return result


def lift_to_parameters(M: ManifoldSpec, X: VectorField, degree: int) -> Lift:
    """The unique (Pi, Lambda) in (nu, chi) making X + parameter part tangent to M"""
    if not X.is_concrete():
        raise DomainError("lift_to_parameters needs a concrete vector field")
    if (X.space.n, X.space.m) != (M.n, M.m):
        raise DomainError("vector field and manifold have different (n, m)")
    if degree < 0:
        raise DomainError(f"degree must be >= 0, got {degree}")
    X = X.transfer(JetSpace(M.n, M.m))
    N = M.truncation - 1
    ring = M.ring
    n, m, p = M.n, M.m, M.p
    target = _parameter_ring(M)
    basis = multiindex_enumerate(m + p, degree)
    to_manifold = [ring.gens[n + s] for s in range(m + p)]

    known = []
    for j, omega in enumerate(M.omega.outputs):
        value = _on_manifold(M, X.R[j], N)
        for l in range(n):
            slope = poly_derivative(omega, tuple(1 if s == l else 0 for s in range(ring.ngens)))
            value = value - _on_manifold(M, X.Q[l], N) * slope
        known.append(truncate(value, N))

    columns: List[List[Poly]] = []
    for s in range(m + p):
        slopes = [
            poly_derivative(omega, tuple(1 if t == n + s else 0 for t in range(ring.ngens)))
            for omega in M.omega.outputs
        ]
        for exps in basis:
            image = poly_compose(target.term_new(exps, QQ.one), to_manifold, ring, N)
            columns.append([truncate(image * slope, N) for slope in slopes])

    # known - sum c_col * column = 0
    rows: Dict[Tuple[int, Multiindex], Vector] = {}
    rhs: Dict[Tuple[int, Multiindex], object] = {}
    for column, contribution in enumerate(columns):
        for j, poly in enumerate(contribution):
            for mono, value in poly.items():
                rows.setdefault((j, mono), {})[column] = value
    for j, poly in enumerate(known):
        for mono, value in poly.items():
            rows.setdefault((j, mono), {})
            rhs[(j, mono)] = value
    keys = sorted(rows)
    matrix = [rows[key] for key in keys]
    solution = solve_linear(matrix, [rhs.get(key, QQ.zero) for key in keys], len(columns))
    if solution is None:
        raise NotASymmetryError(
            f"{X.format()} is not a symmetry of the manifold to order {N} "
            f"with parameter part of degree <= {degree}"
        )
    unique = not nullspace(matrix, len(columns))
    if not unique:
        logger.warning(
            "⚠️ the lift is not unique: the manifold is degenerate; free coefficients set to 0"
        )
    parts = [target.zero] * (m + p)
    for column, value in sorted(solution.items()):
        slot, b = divmod(column, len(basis))
        parts[slot] = parts[slot] + target.term_new(basis[b], value)
    lift = Lift(X, tuple(parts[:m]), tuple(parts[m:]), unique)
    logger.debug(f"lift of {X.format()}: {'; '.join(lift.format())}")
    return lift


# Full analysis
@dataclass
class ManifoldReport:
    """Everything the manifold calculus reports about one manifold"""

    manifold: ManifoldSpec
    dual: SeriesMap
    dual_residual_zero: bool
    parameters: SolvabilityReport
    variables: SolvabilityReport
    degeneracy_degree: int
    degenerate_witness: Optional[VectorField]
    covering: CoveringReport
    system: Optional[SystemSpec] = None
    system_residual_zero: Optional[bool] = None
    bound: Optional[Tuple[int, int]] = None

    @property
    def passed(self) -> bool:
        return self.dual_residual_zero and self.system_residual_zero is not False

    def verdicts(self) -> List[str]:
        lines = []
        if self.parameters.solvable:
            lines.append(f"solvable with respect to the parameters, l0 = {self.parameters.order}")
        else:
            lines.append(
                "not solvable with respect to the parameters "
                f"(rank {self.parameters.rank} of {self.parameters.target})"
            )
        if self.variables.solvable:
            lines.append(f"solvable with respect to the variables, l0* = {self.variables.order}")
        else:
            lines.append(
                "not solvable with respect to the variables "
                f"(rank {self.variables.rank} of {self.variables.target})"
            )
        if self.degenerate_witness is not None:
            lines.append(f"degenerate: witness {self.degenerate_witness.format()}")
        else:
            lines.append(
                f"no tangent field of degree <= {self.degeneracy_degree} "
                f"at truncation {self.manifold.truncation}"
            )
        if self.covering.covering:
            lines.append(f"covering, k_min = {self.covering.k_min}")
        else:
            lines.append(
                f"not covering up to k = {self.covering.k_max} "
                f"(rank stalls at {max(self.covering.rank_profile)} of {self.covering.target})"
            )
        return lines

    def to_dict(self) -> Dict[str, object]:
        data: Dict[str, object] = {
            "manifold": self.manifold.to_dict(),
            "dual": self.dual.format(),
            "dual_residual_zero": self.dual_residual_zero,
            "parameters": self.parameters.to_dict(),
            "variables": self.variables.to_dict(),
            "degenerate_witness": (
                self.degenerate_witness.format() if self.degenerate_witness is not None else None
            ),
            "degeneracy_degree": self.degeneracy_degree,
            "covering": self.covering.to_dict(),
            "verdicts": self.verdicts(),
        }
        if self.system is not None:
            data["system"] = {
                "kappa": self.system.kappa,
                "equations": {
                    coord.label(self.system.space): rhs.format()
                    for coord, rhs in sorted(self.system.equations.items())
                },
                "residual_zero": self.system_residual_zero,
            }
        if self.bound is not None:
            data["jet_bound"] = {"kappa0": self.bound[0], "bound": self.bound[1]}
        return data


def analyze_manifold(
    M: ManifoldSpec,
    k_max: Optional[int] = None,
    degree: int = 2,
    mu0: Optional[int] = None,
) -> ManifoldReport:
    """Duality, solvability, degeneracy, covering and, when possible, the associated system"""
    logger.info(f"🔍 Analyzing manifold n={M.n}, m={M.m}, p={M.p}, truncation {M.truncation}")
    dual = dual_equations(M)
    residual_zero = not any(functional_residual(M, dual))
    params = solvability_parameters(M)
    variables = solvability_variables(M, dual=dual)
    degree = min(degree, M.truncation - 1)
    witness = degeneracy_check(M, degree)
    covering = covering_analysis(M, k_max)
    report = ManifoldReport(
        M, dual, residual_zero, params, variables, degree, witness, covering
    )
    if params.solvable:
        try:
            system = pde_from_manifold(M)
        except UnsupportedShapeError as exc:
            logger.warning(f"⚠️ no associated system: {exc}")
        else:
            report.system = system
            report.system_residual_zero = not any(pde_residuals(M, system).values())
    if mu0 is not None and params.solvable and variables.solvable:
        report.bound = jet_bound(M.n, M.m, M.p, params.order, variables.order, mu0)
    status = "✅" if report.passed else "❌"
    for line in report.verdicts():
        logger.info(f"{status} {line}")
    return report
