"""
Vector fields and their prolongations to jet space.

- VectorField is either symbolic (generic Q^l, R^j) or concrete (Poly coefficients)
- Prolongator caches the recursion R_{ks} = D_k(R_{ks'}) - sum_l D_k(Q^l) U_{ks',l}
- ProlongedField collects every coefficient up to order kappa and acts on jet polynomials
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .algebra import Poly, format_poly, poly_compose, poly_derivative, rat
from .config import Config
from .errors import DomainError, ResourceError
from .jet import JetCoord, JetSpace, canonical_jet
from .jetpoly import DerivSymbol, JetPoly

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VectorField:
    """X = sum Q^l d/dx_l + sum R^j d/du^j; None entries stand for the generic symbol"""

    space: JetSpace
    Q: Tuple[Optional[Poly], ...]
    R: Tuple[Optional[Poly], ...]

    def __post_init__(self):
        if len(self.Q) != self.space.n or len(self.R) != self.space.m:
            raise DomainError(
                f"vector field needs {self.space.n} x- and {self.space.m} u-coefficients"
            )
        entries = self.Q + self.R
        if any(e is None for e in entries) and not all(e is None for e in entries):
            raise DomainError("vector field mixes symbolic and concrete coefficients")
        ring = self.space.ring
        if any(e is not None and e.ring != ring for e in entries):
            raise DomainError("vector field coefficients live in another polynomial ring")

    @classmethod
    def symbolic(cls, space: JetSpace) -> "VectorField":
        return cls(space, (None,) * space.n, (None,) * space.m)

    @classmethod
    def concrete(cls, space: JetSpace, Q: Sequence, R: Sequence) -> "VectorField":
        ring = space.ring
        return cls(
            space,
            tuple(q if isinstance(q, Poly) else ring(q) for q in Q),
            tuple(r if isinstance(r, Poly) else ring(r) for r in R),
        )

    @classmethod
    def parse(cls, space: JetSpace, Q: Sequence[str], R: Sequence[str]) -> "VectorField":
        """Concrete field from coefficient expressions such as ``"x1^2"``"""
        from .dsl import parse_poly

        return cls.concrete(
            space, [parse_poly(space, q) for q in Q], [parse_poly(space, r) for r in R]
        )

    @property
    def mode(self) -> str:
        return "symbolic" if self.Q[0] is None else "concrete"

    def is_concrete(self) -> bool:
        return self.mode == "concrete"

    def components(self) -> Tuple[Poly, ...]:
        self._require_concrete("components")
        return self.Q + self.R

    def is_zero(self) -> bool:
        return self.is_concrete() and not any(self.components())

    def coefficient(self, kind: str, index: int) -> JetPoly:
        """Q^index or R^index as a jet polynomial"""
        value = self.Q[index - 1] if kind == "Q" else self.R[index - 1]
        if value is None:
            return JetPoly.symbol(self.space, DerivSymbol.base(kind, index, self.space))
        return JetPoly.constant(self.space, value)

    def combine(self, c, other: "VectorField", d) -> "VectorField":
        """c*self + d*other for rationals c, d"""
        self._require_concrete("combine")
        other._require_concrete("combine")
        if other.space != self.space:
            raise DomainError("cannot combine fields on different spaces")
        c, d = rat(c), rat(d)
        return VectorField(
            self.space,
            tuple(a * c + b * d for a, b in zip(self.Q, other.Q)),
            tuple(a * c + b * d for a, b in zip(self.R, other.R)),
        )

    def transfer(self, space: JetSpace) -> "VectorField":
        """The same field on a space with other variable names"""
        if (space.n, space.m) != (self.space.n, self.space.m):
            raise DomainError("transfer needs a space of the same dimensions")
        if not self.is_concrete():
            return VectorField.symbolic(space)
        if space == self.space:
            return self
        ring = space.ring
        images = list(ring.gens)
        return VectorField.concrete(
            space,
            [poly_compose(q, images, ring) for q in self.Q],
            [poly_compose(r, images, ring) for r in self.R],
        )

    def apply(self, f: Poly) -> Poly:
        """Derivation X(f) on Poly(x, u)"""
        self._require_concrete("apply")
        total = self.space.ring.zero
        for gen, coeff in zip(self.space.ring.gens, self.components()):
            if coeff:
                total = total + coeff * f.diff(gen)
        return total

    def derivative_value(self, symbol: DerivSymbol) -> Poly:
        """Concrete value of a derivative symbol Q^l_{x^a u^b} or R^j_{x^a u^b}"""
        self._require_concrete("derivative_value")
        base = self.Q if symbol.kind == "Q" else self.R
        return poly_derivative(base[symbol.component - 1], symbol.orders)

    def degree(self) -> int:
        return max((max((sum(m) for m in c.keys()), default=0) for c in self.components()))

    def format(self) -> str:
        if not self.is_concrete():
            return " + ".join(
                [f"Q{l}*d/d{name}" for l, name in enumerate(self.space.x_names, 1)]
                + [f"R{j}*d/d{name}" for j, name in enumerate(self.space.u_names, 1)]
            )
        parts = []
        for name, coeff in zip(self.space.names, self.components()):
            if not coeff:
                continue
            if coeff == 1:
                parts.append(f"d/d{name}")
            elif len(coeff) == 1:
                parts.append(f"{format_poly(coeff)}*d/d{name}")
            else:
                parts.append(f"({format_poly(coeff)})*d/d{name}")
        return " + ".join(parts) if parts else "0"

    def _require_concrete(self, what: str) -> None:
        if not self.is_concrete():
            raise DomainError(f"{what} needs a concrete vector field")


class Prolongator:
    """Memoized prolongation coefficients of one vector field"""

    def __init__(self, X: VectorField, kappa_max: Optional[int] = None):
        self.field = X
        self.space = X.space
        self.kappa_max = kappa_max if kappa_max is not None else Config.KAPPA_MAX
        self._coeffs: Dict[Tuple[int, Tuple[int, ...]], JetPoly] = {}
        self._dq: Dict[Tuple[int, int], JetPoly] = {}
        self._checked: Set[Tuple[int, Tuple[int, ...]]] = set()

    def coeff(self, j: int, ks: Sequence[int]) -> JetPoly:
        ks = tuple(ks)
        if not ks:
            raise DomainError("prolongation coefficient needs at least one derivative index")
        if len(ks) > self.kappa_max:
            raise ResourceError(
                f"prolongation order {len(ks)} exceeds the cap {self.kappa_max}",
                "raise JETLIE_KAPPA_MAX",
            )
        self.space.check_u(j)
        for k in ks:
            self.space.check_x(k)
        canonical = tuple(sorted(ks))
        value = self._coeff(j, canonical)
        if ks[-1] != canonical[-1] and (j, ks) not in self._checked:
            # last derivative differs from the canonical recursion
            other = self._step(j, tuple(sorted(ks[:-1])), ks[-1])
            assert other == value, f"prolongation of u{j} depends on the order of {ks}"
            self._checked.add((j, ks))
        return value

    def _coeff(self, j: int, ks: Tuple[int, ...]) -> JetPoly:
        """Coefficient for sorted ks; prefixes of sorted tuples stay sorted"""
        key = (j, ks)
        if key in self._coeffs:
            return self._coeffs[key]
        if not ks:
            value = self.field.coefficient("R", j)
        else:
            value = self._step(j, ks[:-1], ks[-1])
        self._coeffs[key] = value
        return value

    def _step(self, j: int, prefix: Tuple[int, ...], k: int) -> JetPoly:
        value = self._coeff(j, prefix).total_derivative(k)
        for l in range(1, self.space.n + 1):
            jet = JetPoly.coord(self.space, canonical_jet(j, prefix + (l,)))
            value = value - self._dq_coeff(l, k) * jet
        return value

    def _dq_coeff(self, l: int, k: int) -> JetPoly:
        key = (l, k)
        if key not in self._dq:
            self._dq[key] = self.field.coefficient("Q", l).total_derivative(k)
        return self._dq[key]


def prolong_coeff(X: VectorField, j: int, ks: Sequence[int]) -> JetPoly:
    """Coefficient R^j_{k1..kl} of the prolonged field"""
    return Prolongator(X).coeff(j, ks)


@dataclass
class ProlongedField:
    """X^(kappa): the base field plus coefficients on every d/dU_c, order 1..kappa"""

    base: VectorField
    kappa: int
    coeffs: Dict[JetCoord, JetPoly] = field(default_factory=dict)

    @property
    def space(self) -> JetSpace:
        return self.base.space

    def coefficient(self, coord: JetCoord) -> JetPoly:
        return self.coeffs[canonical_jet(coord.component, coord.indices, self.space)]

    def apply(self, f: JetPoly) -> JetPoly:
        """X^(kappa)(f) for a concrete jet polynomial f"""
        if f.max_order() > self.kappa:
            raise DomainError(
                f"function depends on jets above the prolongation order {self.kappa}"
            )
        space = self.space
        result = JetPoly.zero(space)
        for l in range(1, space.n + 1):
            partial = f.diff_base(space.x_slot(l))
            if partial:
                result = result + self.base.coefficient("Q", l) * partial
        for j in range(1, space.m + 1):
            partial = f.diff_base(space.u_slot(j))
            if partial:
                result = result + self.base.coefficient("R", j) * partial
        for coord in f.coords():
            result = result + self.coeffs[coord] * f.diff_coord(coord)
        return result

    def coordinates(self) -> List[JetCoord]:
        return sorted(self.coeffs)


def prolong_field(X: VectorField, kappa: int) -> ProlongedField:
    """All prolongation coefficients of X up to order kappa"""
    if kappa < 1:
        raise DomainError(f"prolongation order must be >= 1, got {kappa}")
    prolongator = Prolongator(X)
    prolonged = ProlongedField(X, kappa)
    for coord in X.space.coordinates_up_to(kappa):
        prolonged.coeffs[coord] = prolongator.coeff(coord.component, coord.indices)
    logger.debug(f"prolonged {X.format()} to order {kappa}: {len(prolonged.coeffs)} coefficients")
    return prolonged

