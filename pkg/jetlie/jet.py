"""
Jet-space coordinates.

- JetSpace fixes (n, m) and the names of the base variables x and u
- JetCoord is the canonical representative U^i_{l1..lk} with sorted indices
- jet_dim counts the coordinates of the order-kappa jet space
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Iterable, List, Optional, Tuple

from sympy.polys.rings import PolyRing

from .algebra import Poly, binom, multiindex_from_indices, poly_ring
from .errors import DomainError


@dataclass(frozen=True)
class JetSpace:
    """Base variables x_1..x_n and u^1..u^m with their printed names"""

    n: int
    m: int
    x_names: Tuple[str, ...] = field(default=())
    u_names: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise DomainError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        if not self.x_names:
            object.__setattr__(self, "x_names", tuple(f"x{l}" for l in range(1, self.n + 1)))
        if not self.u_names:
            object.__setattr__(self, "u_names", tuple(f"u{j}" for j in range(1, self.m + 1)))
        if len(self.x_names) != self.n or len(self.u_names) != self.m:
            raise DomainError("number of variable names does not match (n, m)")
        names = self.x_names + self.u_names
        if len(set(names)) != len(names):
            raise DomainError(f"duplicate variable names in {names}")

    @classmethod
    def standard(cls, n: int, m: int) -> "JetSpace":
        return cls(n, m)

    @property
    def names(self) -> Tuple[str, ...]:
        return self.x_names + self.u_names

    @property
    def ring(self) -> PolyRing:
        return poly_ring(self.names)

    def x(self, l: int) -> Poly:
        self.check_x(l)
        return self.ring.gens[l - 1]

    def u(self, j: int) -> Poly:
        self.check_u(j)
        return self.ring.gens[self.n + j - 1]

    def x_slot(self, l: int) -> int:
        """0-based ring slot of x_l"""
        return l - 1

    def u_slot(self, j: int) -> int:
        return self.n + j - 1

    def check_x(self, l: int) -> None:
        if not 1 <= l <= self.n:
            raise DomainError(f"x index {l} out of range 1..{self.n}")

    def check_u(self, j: int) -> None:
        if not 1 <= j <= self.m:
            raise DomainError(f"u index {j} out of range 1..{self.m}")

    def coordinates(self, order: int) -> List["JetCoord"]:
        """All canonical jet coordinates of exactly the given order"""
        return [
            JetCoord(j, combo)
            for j in range(1, self.m + 1)
            for combo in combinations_with_replacement(range(1, self.n + 1), order)
        ]

    def coordinates_up_to(self, kappa: int, start: int = 1) -> List["JetCoord"]:
        coords: List[JetCoord] = []
        for order in range(start, kappa + 1):
            coords.extend(self.coordinates(order))
        return coords


@dataclass(frozen=True)
class JetCoord:
    """Jet coordinate U^component_{indices}; order 0 stands for u^component itself"""

    component: int
    indices: Tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.indices)

    @property
    def key(self) -> Tuple[int, int, Tuple[int, ...]]:
        return (len(self.indices), self.component, self.indices)

    def __lt__(self, other: "JetCoord") -> bool:
        return self.key < other.key

    def extend(self, k: int) -> "JetCoord":
        """The coordinate one derivative higher, U_{indices + k}"""
        return JetCoord(self.component, tuple(sorted(self.indices + (k,))))

    def multiindex(self, n: int) -> Tuple[int, ...]:
        return multiindex_from_indices(self.indices, n)

    def contains(self, other: "JetCoord") -> bool:
        """True if self is a (possibly trivial) derivative of other"""
        if self.component != other.component:
            return False
        remaining = list(self.indices)
        for index in other.indices:
            if index not in remaining:
                return False
            remaining.remove(index)
        return True

    def difference(self, other: "JetCoord") -> Tuple[int, ...]:
        """Indices of self left after removing those of other (other must be contained)"""
        remaining = list(self.indices)
        for index in other.indices:
            remaining.remove(index)
        return tuple(remaining)

    def label(self, space: Optional[JetSpace] = None) -> str:
        if space is None:
            return f"u{self.component}[{','.join(f'x{l}' for l in self.indices)}]"
        inner = ",".join(space.x_names[l - 1] for l in self.indices)
        return f"{space.u_names[self.component - 1]}[{inner}]"

    def __str__(self) -> str:
        return self.label()


def canonical_jet(
    component: int, indices: Iterable[int], space: Optional[JetSpace] = None
) -> JetCoord:
    """Canonical coordinate for U^component_{indices}, validating ranges when a space is given"""
    indices = tuple(indices)
    if component < 1 or any(l < 1 for l in indices):
        raise DomainError(f"jet indices must be positive, got {component}, {list(indices)}")
    if space is not None:
        space.check_u(component)
        for l in indices:
            space.check_x(l)
    return JetCoord(component, tuple(sorted(indices)))


def jet_dim(n: int, m: int, kappa: int) -> int:
    """Dimension n + m*C(kappa+n, kappa) of the order-kappa jet space"""
    if kappa < 0:
        raise DomainError(f"jet order must be >= 0, got {kappa}")
    return n + m * binom(kappa + n, kappa)

