"""
Lie criterion and determining equations.

- tangency_polynomials: X^(kappa) applied to U_c - F_c on the skeleton,
  one per principal coordinate
- determining_system: every jet-monomial coefficient of those polynomials,
  normalized and deduplicated
- verify_field: the criterion for a concrete field
- integrability_residues: compatibility of pairs of declared equations
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from .config import Config
from .errors import DomainError, UnsupportedShapeError
from .jet import JetCoord, JetSpace
from .jetpoly import CoeffForm, DerivSymbol, JetPoly, mono_label
from .prolong import ProlongedField, VectorField, prolong_field
from .system import Skeleton, SystemSpec, skeleton_build

logger = logging.getLogger(__name__)


def _tangency(
    spec: SystemSpec, skeleton: Skeleton, prolonged: ProlongedField, coord: JetCoord
) -> JetPoly:
    target = skeleton.resolve(coord)
    if target.max_order() > spec.kappa:
        raise UnsupportedShapeError(
            f"{coord.label(spec.space)} resolves through jets above order {spec.kappa}"
        )
    value = prolonged.coefficient(coord) - prolonged.apply(target)
    return skeleton.reduce(value)


def tangency_polynomials(
    spec: SystemSpec, X: Optional[VectorField] = None
) -> Dict[JetCoord, JetPoly]:
    """Lie criterion polynomials for every principal coordinate of order <= kappa"""
    X = X or VectorField.symbolic(spec.space)
    if X.space != spec.space:
        raise DomainError("vector field and system live on different spaces")
    skeleton = skeleton_build(spec)
    prolonged = prolong_field(X, spec.kappa)
    coords = spec.principal_coordinates()
    if len(coords) == 1 or Config.MAX_WORKERS <= 1:
        values = [_tangency(spec, skeleton, prolonged, c) for c in coords]
    else:
        with ThreadPoolExecutor(max_workers=Config.MAX_WORKERS) as executor:
            values = list(
                executor.map(lambda c: _tangency(spec, skeleton, prolonged, c), coords)
            )
    return dict(zip(coords, values))


def tangency_polynomial(
    spec: SystemSpec, X: Optional[VectorField] = None, coord: Optional[JetCoord] = None
) -> JetPoly:
    """Tangency polynomial of one principal coordinate (the only one when coord is omitted)"""
    if coord is None:
        principal = spec.principal_coordinates()
        if len(principal) != 1:
            raise DomainError(
                "system has several principal coordinates; pass one of "
                + ", ".join(c.label(spec.space) for c in principal)
            )
        coord = principal[0]
    if not spec.is_principal(coord) or coord.order > spec.kappa:
        raise DomainError(f"{coord.label(spec.space)} is not a principal coordinate")
    X = X or VectorField.symbolic(spec.space)
    skeleton = skeleton_build(spec)
    return _tangency(spec, skeleton, prolong_field(X, spec.kappa), coord)


@dataclass
class DeterminingSystem:
    """Linear equations on (Q, R), one per distinct normalized coefficient"""

    space: JetSpace
    kappa: int
    equations: List[CoeffForm] = field(default_factory=list)
    provenance: List[List[Tuple[str, str]]] = field(default_factory=list)
    _index: Dict[Tuple, int] = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def m(self) -> int:
        return self.space.m

    def __len__(self) -> int:
        return len(self.equations)

    def add(self, form: CoeffForm, source: Tuple[str, str]) -> None:
        if form.is_zero():
            return
        key, normal = form.normalized()
        if key in self._index:
            self.provenance[self._index[key]].append(source)
            return
        self._index[key] = len(self.equations)
        self.equations.append(normal)
        self.provenance.append([source])

    def contains(self, form: CoeffForm) -> bool:
        """True if some equation is a nonzero rational multiple of form"""
        if form.is_zero():
            return False
        return form.normalized()[0] in self._index

    def symbols(self) -> List[DerivSymbol]:
        return sorted({s for eq in self.equations for s in eq.linear})

    def is_linear(self) -> bool:
        return all(not eq.constant for eq in self.equations)

    def format(self) -> List[str]:
        return [f"{eq.format()} = 0" for eq in self.equations]


def determining_system(spec: SystemSpec) -> DeterminingSystem:
    """Collect the coefficient of each jet monomial in each tangency polynomial"""
    polys = tangency_polynomials(spec)
    system = DeterminingSystem(spec.space, spec.kappa)
    for coord, poly in polys.items():
        label = coord.label(spec.space)
        for mono, cf in poly.items():
            system.add(cf, (label, mono_label(mono, spec.space)))
    logger.info(
        f"📊 determining system: {len(system)} equations in {len(system.symbols())} symbols "
        f"from {len(polys)} tangency polynomials"
    )
    return system


def verify_field(spec: SystemSpec, X: VectorField) -> bool:
    """Lie criterion for a concrete field: every tangency polynomial vanishes"""
    if not X.is_concrete():
        raise DomainError("verify_field needs a concrete vector field")
    return all(poly.is_zero() for poly in tangency_polynomials(spec, X).values())


@dataclass
class Residue:
    """D-extension of two declared equations to their common derivative"""

    parent: JetCoord
    first: JetCoord
    second: JetCoord
    value: JetPoly

    def is_zero(self) -> bool:
        return self.value.is_zero()


def _extend(skeleton: Skeleton, start: JetCoord, target: JetCoord) -> JetPoly:
    value = skeleton.reduce(skeleton.spec.equations[start])
    for k in target.difference(start):
        value = skeleton.reduce(value.total_derivative(k))
    return value


def _common_parent(a: JetCoord, b: JetCoord) -> JetCoord:
    indices = list(a.indices)
    remaining = list(a.indices)
    for index in b.indices:
        if index in remaining:
            remaining.remove(index)
        else:
            indices.append(index)
    return JetCoord(a.component, tuple(sorted(indices)))


def integrability_residues(spec: SystemSpec) -> List[Residue]:
    """Residues D_A F_a - D_B F_b for declared pairs of one component; all zero is necessary"""
    skeleton = skeleton_build(spec)
    residues: List[Residue] = []
    for a, b in combinations(spec.declared, 2):
        if a.component != b.component:
            continue
        parent = _common_parent(a, b)
        value = _extend(skeleton, a, parent) - _extend(skeleton, b, parent)
        residues.append(Residue(parent, a, b, value))
        if value:
            logger.debug(
                f"residue at {parent.label(spec.space)} from {a.label(spec.space)}, "
                f"{b.label(spec.space)}: {value.format()}"
            )
    return residues
