"""
Exact arithmetic foundation.

- Rationals are sympy ``QQ`` elements (always in lowest terms, positive denominator)
- Poly is a ``PolyElement`` of a cached ``PolyRing`` over QQ in graded-lex order
- Multiindices are plain tuples of naturals, one slot per variable
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

from .config import Config
from .errors import DomainError, ExpressionSizeError

Rat = QQ.dtype
Poly = PolyElement
Multiindex = Tuple[int, ...]

RatLike = Union[int, str, Fraction, "Rat"]

_POLY_OPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
}


# Rationals
def rat(value: RatLike) -> Rat:
    """Convert an int, ``"p/q"`` string, Fraction or QQ element to an exact rational"""
    if isinstance(value, Rat):
        return value
    if isinstance(value, bool):
        raise DomainError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        if any(ch in text for ch in ".eE"):
            raise DomainError(f"decimal literal {value!r}; write it as a fraction p/q")
        try:
            frac = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a rational: {value!r}") from exc
        return QQ(frac.numerator, frac.denominator)
    raise DomainError(f"not a rational: {value!r}")


def rat_str(value: Rat) -> str:
    num, den = int(value.numerator), int(value.denominator)
    return str(num) if den == 1 else f"{num}/{den}"


def binom(p: int, q: int) -> int:
    """Binomial coefficient p! / (q! (p-q)!)"""
    if p < 0 or q < 0 or q > p:
        raise DomainError(f"binom({p}, {q}) needs 0 <= q <= p")
    return math.comb(p, q)


def check_size(count: int) -> None:
    if count > Config.MAX_TERMS:
        raise ExpressionSizeError(count, Config.MAX_TERMS)


# Multiindices
def multiindex_enumerate(slots: int, max_order: int) -> List[Multiindex]:
    """All multiindices with |alpha| <= max_order, graded, then in combination order"""
    if slots == 0:
        return [()]
    result: List[Multiindex] = []
    for order in range(max_order + 1):
        for combo in combinations_with_replacement(range(slots), order):
            exps = [0] * slots
            for slot in combo:
                exps[slot] += 1
            result.append(tuple(exps))
    return result


def multiindex_from_indices(indices: Iterable[int], slots: int) -> Multiindex:
    """Count 1-based indices into an exponent vector"""
    exps = [0] * slots
    for index in indices:
        exps[index - 1] += 1
    return tuple(exps)


def indices_from_multiindex(alpha: Multiindex) -> Tuple[int, ...]:
    """Inverse of multiindex_from_indices: sorted 1-based indices"""
    return tuple(slot + 1 for slot, exp in enumerate(alpha) for _ in range(exp))


def multiindex_add(a: Multiindex, b: Multiindex) -> Multiindex:
    return tuple(x + y for x, y in zip(a, b))


def unit_multiindex(slots: int, index: int) -> Multiindex:
    """e_index with a 1-based index"""
    return tuple(1 if slot == index - 1 else 0 for slot in range(slots))


# Polynomials
@lru_cache(maxsize=None)
def poly_ring(names: Tuple[str, ...]) -> PolyRing:
    """Polynomial ring over QQ in the given variables; one ring object per name tuple"""
    if not names:
        raise DomainError("a polynomial ring needs at least one variable")
    return PolyRing(list(names), QQ, grlex)


def ring_names(ring: PolyRing) -> Tuple[str, ...]:
    return tuple(str(sym) for sym in ring.symbols)


def variable_index(ring: PolyRing, var: Union[str, int]) -> int:
    names = ring_names(ring)
    if isinstance(var, int):
        if 0 <= var < len(names):
            return var
        raise DomainError(f"variable index {var} out of range for {names}")
    if var not in names:
        raise DomainError(f"unknown variable {var!r}; ring has {', '.join(names)}")
    return names.index(var)


def poly_arith(a: Poly, b: Poly, op: str) -> Poly:
    """Exact add/sub/mul of two polynomials over the same variable set"""
    if a.ring != b.ring:
        raise DomainError(
            f"variable sets differ: {ring_names(a.ring)} vs {ring_names(b.ring)}"
        )
    if op not in _POLY_OPS:
        raise DomainError(f"unknown polynomial operation {op!r}")
    return _POLY_OPS[op](a, b)


def poly_diff(p: Poly, var: Union[str, int]) -> Poly:
    """Partial derivative with respect to a named (or 0-based indexed) variable"""
    index = variable_index(p.ring, var)
    return p.diff(p.ring.gens[index])


def poly_derivative(p: Poly, orders: Multiindex) -> Poly:
    """Iterated partial derivative d^orders p"""
    if not any(orders):
        return p
    ring = p.ring
    result: Dict[Multiindex, Rat] = {}
    for monom, coeff in p.items():
        if any(e < o for e, o in zip(monom, orders)):
            continue
        factor = 1
        for e, o in zip(monom, orders):
            for step in range(o):
                factor *= e - step
        result[tuple(e - o for e, o in zip(monom, orders))] = coeff * factor
    return ring.from_dict(result)


def poly_monomial(ring: PolyRing, exps: Multiindex, coeff: RatLike = 1) -> Poly:
    return ring.term_new(tuple(exps), rat(coeff))


def poly_total_degree(p: Poly) -> int:
    return max((sum(monom) for monom in p.keys()), default=0)


def truncate(p: Poly, max_degree: Optional[int]) -> Poly:
    """Drop terms of total degree above max_degree"""
    if max_degree is None or poly_total_degree(p) <= max_degree:
        return p
    return p.ring.from_dict({m: c for m, c in p.items() if sum(m) <= max_degree})


def poly_compose(
    p: Poly,
    images: Sequence[Poly],
    ring: PolyRing,
    max_degree: Optional[int] = None,
) -> Poly:
    """Substitute images[i] (in ``ring``) for the i-th variable of p, optionally truncating"""
    if len(images) != p.ring.ngens:
        raise DomainError(f"need {p.ring.ngens} images, got {len(images)}")
    powers: Dict[Tuple[int, int], Poly] = {}

    def power(index: int, exp: int) -> Poly:
        key = (index, exp)
        if key not in powers:
            if exp == 1:
                powers[key] = truncate(images[index], max_degree)
            else:
                powers[key] = truncate(power(index, exp - 1) * images[index], max_degree)
        return powers[key]

    result = ring.zero
    for monom, coeff in p.iterterms():
        term = ring.ground_new(coeff)
        for index, exp in enumerate(monom):
            if exp:
                term = truncate(term * power(index, exp), max_degree)
                if not term:
                    break
        if term:
            result = result + term
    check_size(len(result))
    return result


def evaluate_poly(p: Poly, values: Sequence[RatLike]) -> Rat:
    """Value of p at a rational point"""
    point = [rat(v) for v in values]
    total = QQ.zero
    for monom, coeff in p.iterterms():
        term = coeff
        for value, exp in zip(point, monom):
            if exp:
                term *= value**exp
        total += term
    return total


# Printing
def join_signed(terms: Iterable[Tuple[Rat, List[str]]]) -> str:
    """Render coefficient/factor pairs as ``a*x^2 - 3/2*y + 1``"""
    text = ""
    for coeff, factors in terms:
        negative = coeff < 0
        magnitude = -coeff if negative else coeff
        pieces = list(factors)
        if magnitude != 1 or not pieces:
            pieces.insert(0, rat_str(magnitude))
        body = "*".join(pieces)
        if not text:
            text = f"-{body}" if negative else body
        else:
            text += f" - {body}" if negative else f" + {body}"
    return text or "0"


def format_poly(p: Poly, names: Optional[Sequence[str]] = None) -> str:
    """DSL-compatible rendering with ``^`` powers, in the ring's term order"""
    labels = list(names) if names is not None else list(ring_names(p.ring))
    rows = []
    for monom, coeff in p.terms():
        factors = [
            label if exp == 1 else f"{label}^{exp}"
            for label, exp in zip(labels, monom)
            if exp
        ]
        rows.append((coeff, factors))
    return join_signed(rows)
