"""
Polynomials in jet coordinates with symbolic derivative coefficients.

- DerivSymbol names a partial derivative Q^l_{x^a u^b} or R^j_{x^a u^b}
- CoeffForm is an affine combination of DerivSymbols with Poly(x, u) weights
- JetPoly maps monomials in jet coordinates of order >= 1 to CoeffForms
- total derivatives D_k act on all three, with the chain rule on symbols
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .algebra import (
    Multiindex,
    Poly,
    Rat,
    check_size,
    evaluate_poly,
    format_poly,
    join_signed,
    rat,
)
from .errors import DomainError
from .jet import JetCoord, JetSpace

Monomial = Tuple[Tuple[JetCoord, int], ...]
Scalar = Union[int, Rat, Poly]


@dataclass(frozen=True)
class DerivSymbol:
    """Partial derivative of the Q^l or R^j coefficient of a generic vector field"""

    kind: str
    component: int
    xorder: Multiindex
    uorder: Multiindex

    @classmethod
    def base(cls, kind: str, component: int, space: JetSpace) -> "DerivSymbol":
        if kind not in ("Q", "R"):
            raise DomainError(f"symbol kind must be Q or R, got {kind!r}")
        if kind == "Q":
            space.check_x(component)
        else:
            space.check_u(component)
        return cls(kind, component, (0,) * space.n, (0,) * space.m)

    @property
    def order(self) -> int:
        return sum(self.xorder) + sum(self.uorder)

    @property
    def orders(self) -> Multiindex:
        """Exponent vector over the ring variables (x..., u...)"""
        return self.xorder + self.uorder

    @property
    def key(self) -> Tuple:
        return (self.kind, self.component, self.order, self.xorder, self.uorder)

    def __lt__(self, other: "DerivSymbol") -> bool:
        return self.key < other.key

    def shift_x(self, k: int) -> "DerivSymbol":
        xorder = tuple(e + 1 if slot == k - 1 else e for slot, e in enumerate(self.xorder))
        return DerivSymbol(self.kind, self.component, xorder, self.uorder)

    def shift_u(self, i: int) -> "DerivSymbol":
        uorder = tuple(e + 1 if slot == i - 1 else e for slot, e in enumerate(self.uorder))
        return DerivSymbol(self.kind, self.component, self.xorder, uorder)

    def label(self, space: JetSpace) -> str:
        parts = [name for name, e in zip(space.names, self.orders) for _ in range(e)]
        head = f"{self.kind}{self.component}"
        return f"{head}_{''.join(parts)}" if parts else head


def _accumulate(target: Dict, key, value) -> None:
    if key in target:
        total = target[key] + value
        if total:
            target[key] = total
        else:
            del target[key]
    elif value:
        target[key] = value


class CoeffForm:
    """constant + sum of weight * symbol, linear in the DerivSymbols"""

    __slots__ = ("space", "constant", "linear")

    def __init__(
        self,
        space: JetSpace,
        constant: Optional[Poly] = None,
        linear: Optional[Mapping[DerivSymbol, Poly]] = None,
    ):
        self.space = space
        self.constant = constant if constant is not None else space.ring.zero
        self.linear: Dict[DerivSymbol, Poly] = {s: w for s, w in (linear or {}).items() if w}

    @classmethod
    def zero(cls, space: JetSpace) -> "CoeffForm":
        return cls(space)

    @classmethod
    def from_poly(cls, space: JetSpace, value: Scalar) -> "CoeffForm":
        return cls(space, space.ring(value) if not isinstance(value, Poly) else value)

    @classmethod
    def from_symbol(
        cls, space: JetSpace, symbol: DerivSymbol, weight: Optional[Poly] = None
    ) -> "CoeffForm":
        return cls(space, None, {symbol: weight if weight is not None else space.ring.one})

    def is_zero(self) -> bool:
        return not self.constant and not self.linear

    def is_constant(self) -> bool:
        return not self.linear

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoeffForm):
            return NotImplemented
        return self.constant == other.constant and self.linear == other.linear

    __hash__ = None

    def __add__(self, other: "CoeffForm") -> "CoeffForm":
        linear = dict(self.linear)
        for symbol, weight in other.linear.items():
            _accumulate(linear, symbol, weight)
        return CoeffForm(self.space, self.constant + other.constant, linear)

    def __sub__(self, other: "CoeffForm") -> "CoeffForm":
        return self + (-other)

    def __neg__(self) -> "CoeffForm":
        return CoeffForm(self.space, -self.constant, {s: -w for s, w in self.linear.items()})

    def scale(self, factor: Scalar) -> "CoeffForm":
        """Multiply every weight by a rational or a Poly(x, u)"""
        if not factor:
            return CoeffForm(self.space)
        return CoeffForm(
            self.space,
            self.constant * factor,
            {s: w * factor for s, w in self.linear.items()},
        )

    def __mul__(self, other: "CoeffForm") -> "CoeffForm":
        if other.is_constant():
            return self.scale(other.constant)
        if self.is_constant():
            return other.scale(self.constant)
        raise DomainError("product of two symbolic coefficient forms is not linear")

    def dx(self, k: int) -> "CoeffForm":
        """d/dx_k, sending each symbol S to S_{x_k}"""
        return self._derive(self.space.ring.gens[k - 1], lambda s: s.shift_x(k))

    def du(self, i: int) -> "CoeffForm":
        """d/du^i, sending each symbol S to S_{u^i}"""
        return self._derive(
            self.space.ring.gens[self.space.n + i - 1], lambda s: s.shift_u(i)
        )

    def _derive(self, gen: Poly, shift: Callable[[DerivSymbol], DerivSymbol]) -> "CoeffForm":
        linear: Dict[DerivSymbol, Poly] = {}
        for symbol, weight in self.linear.items():
            _accumulate(linear, symbol, weight.diff(gen))
            _accumulate(linear, shift(symbol), weight)
        return CoeffForm(self.space, self.constant.diff(gen), linear)

    def symbols(self) -> List[DerivSymbol]:
        return sorted(self.linear)

    def weight(self, symbol: DerivSymbol) -> Poly:
        return self.linear.get(symbol, self.space.ring.zero)

    def specialize(self, values: Callable[[DerivSymbol], Poly]) -> Poly:
        """Replace every symbol by a concrete Poly"""
        total = self.constant
        for symbol, weight in self.linear.items():
            total = total + weight * values(symbol)
        return total

    def normalized(self) -> Tuple[Tuple, "CoeffForm"]:
        """Primitive integer multiple with a positive leading weight, plus its hash key"""
        coeffs = list(self.constant.values())
        for weight in self.linear.values():
            coeffs.extend(weight.values())
        if not coeffs:
            return ((), self)
        denominator = math.lcm(*(int(c.denominator) for c in coeffs))
        numerator = math.gcd(*(int(c.numerator) for c in coeffs))
        factor = rat(denominator) / rat(numerator)
        symbols = self.symbols()
        lead = self.linear[symbols[0]].LC if symbols else self.constant.LC
        if lead < 0:
            factor = -factor
        form = self.scale(factor)
        key = (
            tuple((s.key, tuple(sorted(form.linear[s].items()))) for s in symbols),
            tuple(sorted(form.constant.items())),
        )
        return key, form

    def format(self) -> str:
        rows = []
        for symbol in self.symbols():
            weight = self.linear[symbol]
            label = symbol.label(self.space)
            if weight.is_ground:
                rows.append((weight.LC, [label]))
            else:
                rows.append((rat(1), [f"({format_poly(weight)})", label]))
        if self.constant:
            if self.constant.is_ground:
                rows.append((self.constant.LC, []))
            else:
                rows.append((rat(1), [f"({format_poly(self.constant)})"]))
        return join_signed(rows)

    def __repr__(self) -> str:
        return f"CoeffForm({self.format()})"


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    powers = dict(a)
    for coord, power in b:
        powers[coord] = powers.get(coord, 0) + power
    return tuple(sorted(powers.items()))


def mono_without(mono: Monomial, coord: JetCoord) -> Monomial:
    """Monomial divided once by coord (which must occur in it)"""
    return tuple(
        (c, p - 1 if c == coord else p) for c, p in mono if c != coord or p > 1
    )


def mono_shape(mono: Monomial) -> Tuple[int, ...]:
    """Sorted jet orders of a monomial, with multiplicity"""
    return tuple(sorted(c.order for c, p in mono for _ in range(p)))


def mono_key(mono: Monomial) -> Tuple:
    return (sum(p for _, p in mono), tuple((c.key, p) for c, p in mono))


def mono_label(mono: Monomial, space: Optional[JetSpace] = None) -> str:
    if not mono:
        return "1"
    return "*".join(
        c.label(space) if p == 1 else f"{c.label(space)}^{p}" for c, p in mono
    )


class JetPoly:
    """Finite sum of CoeffForm * (monomial in jet coordinates)"""

    __slots__ = ("space", "terms")

    def __init__(self, space: JetSpace, terms: Optional[Mapping[Monomial, CoeffForm]] = None):
        self.space = space
        self.terms: Dict[Monomial, CoeffForm] = {
            mono: cf for mono, cf in (terms or {}).items() if not cf.is_zero()
        }
        check_size(len(self.terms))

    # Construction
    @classmethod
    def zero(cls, space: JetSpace) -> "JetPoly":
        return cls(space)

    @classmethod
    def constant(cls, space: JetSpace, value: Scalar) -> "JetPoly":
        return cls(space, {(): CoeffForm.from_poly(space, value)})

    @classmethod
    def from_coeff(cls, cf: CoeffForm) -> "JetPoly":
        return cls(cf.space, {(): cf})

    @classmethod
    def symbol(cls, space: JetSpace, symbol: DerivSymbol) -> "JetPoly":
        return cls.from_coeff(CoeffForm.from_symbol(space, symbol))

    @classmethod
    def coord(cls, space: JetSpace, coord: JetCoord) -> "JetPoly":
        """The jet coordinate as a polynomial; order 0 gives the base variable u"""
        if coord.order == 0:
            return cls.constant(space, space.u(coord.component))
        return cls(space, {((coord, 1),): CoeffForm.from_poly(space, 1)})

    # Arithmetic
    def __add__(self, other: "JetPoly") -> "JetPoly":
        terms = dict(self.terms)
        for mono, cf in other.terms.items():
            _accumulate_form(terms, mono, cf)
        return JetPoly(self.space, terms)

    def __sub__(self, other: "JetPoly") -> "JetPoly":
        return self + (-other)

    def __neg__(self) -> "JetPoly":
        return JetPoly(self.space, {mono: -cf for mono, cf in self.terms.items()})

    def __mul__(self, other: Union["JetPoly", Scalar]) -> "JetPoly":
        if not isinstance(other, JetPoly):
            return self.scale(other)
        terms: Dict[Monomial, CoeffForm] = {}
        for mono_a, cf_a in self.terms.items():
            for mono_b, cf_b in other.terms.items():
                _accumulate_form(terms, mono_mul(mono_a, mono_b), cf_a * cf_b)
        return JetPoly(self.space, terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "JetPoly":
        if exponent < 0:
            raise DomainError("negative powers of jet polynomials are not polynomial")
        result = JetPoly.constant(self.space, 1)
        for _ in range(exponent):
            result = result * self
        return result

    def scale(self, factor: Union[Scalar, CoeffForm]) -> "JetPoly":
        if isinstance(factor, CoeffForm):
            return JetPoly(self.space, {mono: cf * factor for mono, cf in self.terms.items()})
        return JetPoly(self.space, {mono: cf.scale(factor) for mono, cf in self.terms.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, JetPoly):
            return NotImplemented
        return self.space == other.space and self.terms == other.terms

    __hash__ = None

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_concrete(self) -> bool:
        return all(cf.is_constant() for cf in self.terms.values())

    # Inspection
    def items(self) -> List[Tuple[Monomial, CoeffForm]]:
        """Terms in deterministic order (degree, then coordinate keys)"""
        return sorted(self.terms.items(), key=lambda item: mono_key(item[0]))

    def coefficient(self, mono: Monomial) -> CoeffForm:
        return self.terms.get(mono, CoeffForm(self.space))

    def coords(self) -> List[JetCoord]:
        return sorted({c for mono in self.terms for c, _ in mono})

    def max_order(self) -> int:
        return max((c.order for c in self.coords()), default=0)

    def restrict(self, keep: Callable[[Monomial], bool]) -> "JetPoly":
        return JetPoly(self.space, {m: cf for m, cf in self.terms.items() if keep(m)})

    # Calculus
    def total_derivative(self, k: int) -> "JetPoly":
        """D_k = d/dx_k + sum_i U^i_k d/du^i + sum U_{J,k} d/dU_J"""
        self.space.check_x(k)
        terms: Dict[Monomial, CoeffForm] = {}
        for mono, cf in self.terms.items():
            _accumulate_form(terms, mono, cf.dx(k))
            for i in range(1, self.space.m + 1):
                derived = cf.du(i)
                if not derived.is_zero():
                    _accumulate_form(
                        terms, mono_mul(mono, ((JetCoord(i, (k,)), 1),)), derived
                    )
            for coord, power in mono:
                lifted = mono_mul(mono_without(mono, coord), ((coord.extend(k), 1),))
                _accumulate_form(terms, lifted, cf.scale(power) if power != 1 else cf)
        return JetPoly(self.space, terms)

    def diff_coord(self, coord: JetCoord) -> "JetPoly":
        """Partial derivative with respect to a jet coordinate of order >= 1"""
        terms: Dict[Monomial, CoeffForm] = {}
        for mono, cf in self.terms.items():
            for c, power in mono:
                if c == coord:
                    _accumulate_form(terms, mono_without(mono, c), cf.scale(power))
        return JetPoly(self.space, terms)

    def diff_base(self, slot: int) -> "JetPoly":
        """Partial derivative in the ring variable at 0-based slot (x's, then u's)"""
        gen = self.space.ring.gens[slot]
        terms: Dict[Monomial, CoeffForm] = {}
        for mono, cf in self.terms.items():
            if not cf.is_constant():
                raise DomainError("partial derivative in x or u needs concrete coefficients")
            derived = cf.constant.diff(gen)
            if derived:
                terms[mono] = CoeffForm(self.space, derived)
        return JetPoly(self.space, terms)

    def substitute(self, images: Mapping[JetCoord, "JetPoly"]) -> "JetPoly":
        """Replace jet coordinates by jet polynomials"""
        if not any(c in images for mono in self.terms for c, _ in mono):
            return self
        powers: Dict[Tuple[JetCoord, int], JetPoly] = {}

        def power_of(coord: JetCoord, exp: int) -> JetPoly:
            key = (coord, exp)
            if key not in powers:
                base = images[coord]
                powers[key] = base if exp == 1 else power_of(coord, exp - 1) * base
            return powers[key]

        result: Dict[Monomial, CoeffForm] = {}
        for mono, cf in self.terms.items():
            kept = tuple((c, p) for c, p in mono if c not in images)
            term = JetPoly(self.space, {kept: cf})
            for c, p in mono:
                if c in images:
                    term = term * power_of(c, p)
            for m2, cf2 in term.terms.items():
                _accumulate_form(result, m2, cf2)
        return JetPoly(self.space, result)

    def specialize(self, values: Callable[[DerivSymbol], Poly]) -> "JetPoly":
        """Replace every derivative symbol by a concrete Poly"""
        return JetPoly(
            self.space,
            {mono: CoeffForm(self.space, cf.specialize(values)) for mono, cf in self.terms.items()},
        )

    def evaluate(self, base: Sequence, jets: Mapping[JetCoord, Rat]) -> Rat:
        """Numeric value of a concrete jet polynomial at a point"""
        total = rat(0)
        for mono, cf in self.terms.items():
            if not cf.is_constant():
                raise DomainError("cannot evaluate symbolic coefficients")
            value = evaluate_poly(cf.constant, base)
            for coord, power in mono:
                value *= rat(jets[coord]) ** power
            total += value
        return total

    # Printing
    def format(self) -> str:
        """Plain-text rendering; concrete polynomials print in input syntax"""
        if not self.terms:
            return "0"
        rows = []
        for mono, cf in self.items():
            jet_factors = [
                c.label(self.space) if p == 1 else f"{c.label(self.space)}^{p}" for c, p in mono
            ]
            if cf.is_constant():
                for exps, coeff in cf.constant.terms():
                    factors = [
                        name if e == 1 else f"{name}^{e}"
                        for name, e in zip(self.space.names, exps)
                        if e
                    ]
                    rows.append((coeff, factors + jet_factors))
            else:
                rows.append((rat(1), [f"({cf.format()})"] + jet_factors))
        return join_signed(rows)

    def __repr__(self) -> str:
        return f"JetPoly({self.format()})"


def _accumulate_form(terms: Dict[Monomial, CoeffForm], mono: Monomial, cf: CoeffForm) -> None:
    if cf.is_zero():
        return
    if mono in terms:
        total = terms[mono] + cf
        if total.is_zero():
            del terms[mono]
        else:
            terms[mono] = total
    else:
        terms[mono] = cf


def total_derivative(k: int, expr: JetPoly) -> JetPoly:
    """D_k applied to a jet polynomial"""
    return expr.total_derivative(k)


def jet_sum(space: JetSpace, parts: Iterable[JetPoly]) -> JetPoly:
    terms: Dict[Monomial, CoeffForm] = {}
    for part in parts:
        for mono, cf in part.terms.items():
            _accumulate_form(terms, mono, cf)
    return JetPoly(space, terms)
