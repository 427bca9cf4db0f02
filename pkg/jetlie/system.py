"""
Completely integrable systems and their skeletons.

- SystemSpec holds the declared equations U^j_a = F^j_a over a JetSpace
- principal coordinates are declared ones and all their derivatives; the rest are parametric
- Skeleton resolves every principal coordinate to a polynomial in parametric jets
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple, Union

from .errors import SpecificationError
from .jet import JetCoord, JetSpace
from .jetpoly import JetPoly

logger = logging.getLogger(__name__)


@dataclass
class SystemSpec:
    """Declared equations U_c = rhs[c]; rhs are concrete jet polynomials"""

    space: JetSpace
    kappa: int
    equations: Dict[JetCoord, JetPoly] = field(default_factory=dict)
    parametric: Optional[Tuple[JetCoord, ...]] = None
    integrable: bool = True

    def __post_init__(self):
        if self.kappa < 2:
            raise SpecificationError(f"system order must be >= 2, got {self.kappa}")
        if not self.equations:
            raise SpecificationError("a system needs at least one equation")
        for coord, rhs in self.equations.items():
            if not 1 <= coord.order <= self.kappa:
                raise SpecificationError(
                    f"{coord.label(self.space)} has order {coord.order}, "
                    f"expected 1..{self.kappa}"
                )
            if not 1 <= coord.component <= self.space.m or any(
                not 1 <= l <= self.space.n for l in coord.indices
            ):
                raise SpecificationError(f"{coord} is outside the declared variables")
            if rhs.space != self.space:
                raise SpecificationError(f"rhs of {coord.label(self.space)} uses other variables")
            if not rhs.is_concrete():
                raise SpecificationError(f"rhs of {coord.label(self.space)} is not concrete")
            for used in rhs.coords():
                if used.order > self.kappa:
                    raise SpecificationError(
                        f"rhs of {coord.label(self.space)} uses {used.label(self.space)} "
                        f"above order {self.kappa}"
                    )
                if used in self.equations:
                    raise SpecificationError(
                        f"rhs of {coord.label(self.space)} references the determined "
                        f"coordinate {used.label(self.space)}"
                    )
        if self.parametric is not None:
            overlap = set(self.parametric) & set(self.equations)
            if overlap:
                raise SpecificationError(
                    "coordinates both determined and parametric: "
                    + ", ".join(c.label(self.space) for c in sorted(overlap))
                )
            self.parametric = tuple(sorted(self.parametric))

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def m(self) -> int:
        return self.space.m

    @property
    def declared(self) -> List[JetCoord]:
        return sorted(self.equations)

    def rhs(self, coord: JetCoord) -> JetPoly:
        return self.equations[coord]

    def is_principal(self, coord: JetCoord) -> bool:
        if coord.order == 0:
            return False
        if self.parametric is not None and coord.order <= self.kappa:
            return coord not in self.parametric
        return any(coord.contains(d) for d in self.equations)

    def principal_coordinates(self) -> List[JetCoord]:
        return [c for c in self.space.coordinates_up_to(self.kappa) if self.is_principal(c)]

    def parametric_coordinates(self) -> List[JetCoord]:
        return [c for c in self.space.coordinates_up_to(self.kappa) if not self.is_principal(c)]

    def is_full_form(self) -> bool:
        """All top-order coordinates declared, right-hand sides below the top order"""
        top = set(self.space.coordinates(self.kappa))
        if set(self.equations) != top:
            return False
        return all(rhs.max_order() < self.kappa for rhs in self.equations.values())

    def is_homogeneous(self) -> bool:
        return self.is_full_form() and all(rhs.is_zero() for rhs in self.equations.values())


def homogeneous_system(n: int, m: int, kappa: int, space: Optional[JetSpace] = None) -> SystemSpec:
    """u^j_{x_k1..x_kappa} = 0 for every top-order coordinate"""
    space = space or JetSpace(n, m)
    return SystemSpec(
        space,
        kappa,
        {coord: JetPoly.zero(space) for coord in space.coordinates(kappa)},
    )


class Skeleton:
    """Principal jet coordinates expressed through x, u and the parametric jets"""

    def __init__(self, spec: SystemSpec):
        self.spec = spec
        self._values: Dict[JetCoord, JetPoly] = {}
        self._active: Set[JetCoord] = set()
        self._lock = threading.RLock()

    @property
    def free_coords(self) -> List[Union[str, JetCoord]]:
        return list(self.spec.space.names) + self.spec.parametric_coordinates()

    @property
    def determined(self) -> Dict[JetCoord, JetPoly]:
        return {c: self.resolve(c) for c in self.spec.principal_coordinates()}

    def resolve(self, coord: JetCoord) -> JetPoly:
        """Value of a jet coordinate on the skeleton"""
        spec = self.spec
        if not spec.is_principal(coord):
            return JetPoly.coord(spec.space, coord)
        with self._lock:
            if coord in self._values:
                return self._values[coord]
            if coord in self._active:
                raise SpecificationError(
                    f"cyclic dependence while resolving {coord.label(spec.space)}"
                )
            self._active.add(coord)
            try:
                if coord in spec.equations:
                    value = self.reduce(spec.equations[coord])
                else:
                    parent, k = self._parent(coord)
                    value = self.reduce(self.resolve(parent).total_derivative(k))
            finally:
                self._active.discard(coord)
            self._values[coord] = value
            logger.debug(f"resolved {coord.label(spec.space)} = {value.format()}")
            return value

    def reduce(self, expr: JetPoly) -> JetPoly:
        """Substitute every principal coordinate occurring in expr"""
        images = {c: self.resolve(c) for c in expr.coords() if self.spec.is_principal(c)}
        return expr.substitute(images) if images else expr

    def _parent(self, coord: JetCoord) -> Tuple[JetCoord, int]:
        sources = [d for d in self.spec.declared if coord.contains(d) and d != coord]
        if not sources:
            raise SpecificationError(
                f"no equation determines {coord.label(self.spec.space)}"
            )
        source = max(sources, key=lambda d: (d.order, d.key))
        k = coord.difference(source)[-1]
        indices = list(coord.indices)
        indices.remove(k)
        return JetCoord(coord.component, tuple(indices)), k


def skeleton_build(spec: SystemSpec) -> Skeleton:
    """Skeleton with every principal coordinate up to the system order resolved"""
    skeleton = Skeleton(spec)
    determined = skeleton.determined
    logger.debug(
        f"skeleton: {len(determined)} principal, "
        f"{len(spec.parametric_coordinates())} parametric coordinates"
    )
    return skeleton
