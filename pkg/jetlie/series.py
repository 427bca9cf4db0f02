"""
Truncated multivariate power series over QQ.

- A series is a Poly whose terms of total degree > N are always dropped
- SeriesMap bundles several outputs over one variable tuple with a shared truncation
- reversion inverts a map with invertible linear part by fixed-point iteration
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ
from sympy.polys.rings import PolyRing

from .algebra import (
    Poly,
    Rat,
    evaluate_poly,
    format_poly,
    poly_compose,
    poly_derivative,
    poly_ring,
    rat,
    truncate,
    unit_multiindex,
    variable_index,
)
from .errors import DomainError
from .linalg import dense_rank, inverse

logger = logging.getLogger(__name__)


def series_truncate(p: Poly, order: int) -> Poly:
    return truncate(p, order)


def series_mul(a: Poly, b: Poly, order: int) -> Poly:
    return truncate(a * b, order)


def series_inverse(p: Poly, order: int) -> Poly:
    """1/p as a series; needs p(0) != 0"""
    constant = p.coeff(1) if p else QQ.zero
    if not constant:
        raise DomainError("series inverse needs a nonzero constant term")
    ring = p.ring
    unit = p * (QQ.one / constant)
    tail = truncate(ring.one - unit, order)
    result = ring.one
    power = ring.one
    for _ in range(order):
        power = truncate(power * tail, order)
        if not power:
            break
        result = result + power
    return truncate(result * (QQ.one / constant), order)


def series_compose(p: Poly, images: Sequence[Poly], ring: PolyRing, order: int) -> Poly:
    """p(images) in ``ring``, truncated; images should have no constant term for exactness"""
    return poly_compose(p, list(images), ring, order)


def linear_part(outputs: Sequence[Poly]) -> List[List[Rat]]:
    """Jacobian at 0, row per output"""
    if not outputs:
        return []
    ring = outputs[0].ring
    return [
        [p.coeff(ring.gens[v]) for v in range(ring.ngens)]
        for p in outputs
    ]


def jacobian_at(outputs: Sequence[Poly], point: Sequence) -> List[List[Rat]]:
    """Exact Jacobian of the outputs at a rational point"""
    if not outputs:
        return []
    ring = outputs[0].ring
    return [
        [
            evaluate_poly(poly_derivative(p, unit_multiindex(ring.ngens, v + 1)), point)
            for v in range(ring.ngens)
        ]
        for p in outputs
    ]


def reversion(outputs: Sequence[Poly], order: int) -> Tuple[Poly, ...]:
    """Local inverse G of F: F(G(t)) = t to the given order; F(0) = 0 with invertible linear part"""
    if not outputs:
        return ()
    ring = outputs[0].ring
    if len(outputs) != ring.ngens:
        raise DomainError("reversion needs as many outputs as variables")
    if any(p.coeff(1) for p in outputs if p):
        raise DomainError("reversion needs F(0) = 0")
    matrix = linear_part(outputs)
    if dense_rank(matrix) < len(outputs):
        raise DomainError("reversion needs an invertible linear part")
    inv = inverse(matrix)
    linear = [
        sum((ring.gens[v] * matrix[row][v] for v in range(ring.ngens) if matrix[row][v]), ring.zero)
        for row in range(len(outputs))
    ]
    higher = [p - lin for p, lin in zip(outputs, linear)]

    def solve_linear_part(values: Sequence[Poly]) -> List[Poly]:
        return [
            sum(
                (values[col] * inv[row][col] for col in range(len(values)) if inv[row][col]),
                ring.zero,
            )
            for row in range(len(values))
        ]

    current = solve_linear_part(list(ring.gens))
    for _ in range(order):
        images = [truncate(h, order) for h in higher]
        residual = [
            ring.gens[row] - poly_compose(images[row], current, ring, order)
            for row in range(len(outputs))
        ]
        current = [truncate(p, order) for p in solve_linear_part(residual)]
    return tuple(current)


def rename(p: Poly, ring: PolyRing, mapping: Sequence[Optional[str]]) -> Poly:
    """Move p into ``ring``, sending its i-th variable to ``mapping[i]`` (None sends it to 0)"""
    images = [
        ring.zero if name is None else ring.gens[variable_index(ring, name)] for name in mapping
    ]
    return poly_compose(p, images, ring)


@dataclass(frozen=True)
class SeriesMap:
    """Outputs truncated at total degree ``truncation`` in the variables ``names``"""

    names: Tuple[str, ...]
    outputs: Tuple[Poly, ...]
    truncation: int
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.truncation < 0:
            raise DomainError(f"truncation must be >= 0, got {self.truncation}")
        ring = self.ring
        outputs = []
        for p in self.outputs:
            if p.ring != ring:
                raise DomainError("series output lives in another polynomial ring")
            outputs.append(truncate(p, self.truncation))
        object.__setattr__(self, "outputs", tuple(outputs))
        if self.labels and len(self.labels) != len(self.outputs):
            raise DomainError("one label per series output")

    @property
    def ring(self) -> PolyRing:
        return poly_ring(self.names)

    def __len__(self) -> int:
        return len(self.outputs)

    def __getitem__(self, index: int) -> Poly:
        return self.outputs[index]

    def compose(self, inner: "SeriesMap") -> "SeriesMap":
        """self(inner(z)), in inner's variables"""
        if len(inner) != len(self.names):
            raise DomainError(f"need {len(self.names)} inner outputs, got {len(inner)}")
        order = min(self.truncation, inner.truncation)
        return SeriesMap(
            inner.names,
            tuple(series_compose(p, inner.outputs, inner.ring, order) for p in self.outputs),
            order,
            self.labels,
        )

    def evaluate(self, point: Sequence) -> List[Rat]:
        return [evaluate_poly(p, [rat(v) for v in point]) for p in self.outputs]

    def jacobian_at(self, point: Sequence) -> List[List[Rat]]:
        return jacobian_at(self.outputs, [rat(v) for v in point])

    def is_zero(self) -> bool:
        return not any(self.outputs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SeriesMap):
            return NotImplemented
        return (
            self.names == other.names
            and self.truncation == other.truncation
            and self.outputs == other.outputs
        )

    __hash__ = None

    def format(self) -> List[str]:
        labels = self.labels or tuple(f"f{i}" for i in range(1, len(self.outputs) + 1))
        return [f"{label} = {format_poly(p)}" for label, p in zip(labels, self.outputs)]
