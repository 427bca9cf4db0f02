"""
Closed-form prolongation coefficients, checked against the recursion.

- Scalar tables (n = m = 1) for the first four orders and the partial order-kappa formula
- Index-notation groups for general (n, m): each term carries Kronecker deltas between
  derivative positions k_t and jet indices l, and between jet components i and j
- closed_form_check compares every coefficient R^j_{k1..kl} monomial by monomial;
  partial formulas only pin the monomial shapes they list
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement, product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .algebra import binom, multiindex_from_indices
from .config import Config
from .errors import DomainError
from .jet import JetCoord, JetSpace
from .jetpoly import (
    CoeffForm,
    DerivSymbol,
    JetPoly,
    Monomial,
    mono_key,
    mono_label,
    mono_mul,
    mono_shape,
)
from .prolong import Prolongator, VectorField

logger = logging.getLogger(__name__)

SCALAR_FORMULAS = ("R1", "R2", "R3", "R4", "partial")
GENERAL_FORMULAS = ("general_R1", "general_R2", "general_R3", "general_partial")
FORMULAS = SCALAR_FORMULAS + GENERAL_FORMULAS
MODES = ("corrected", "literal")

CORRECTIONS = {
    "u1u1u2_delta_i1": (
        "U1*U1*U2 family of the third-order coefficient: the third term carrying "
        "delta(i1, j) differentiates Q in u^{i2}, u^{i3} (printed u^{i1}, u^{i2})"
    ),
    "u1_top_rotations": (
        "U1*U_(kappa-1) family, delta(i2, j) sum: the omitted circular permutation is "
        "the one sending l1 to the upper index of Q (printed prose omits the identity)"
    ),
    "u1_top_last_term": (
        "U1*U_(kappa-1) family, delta(i2, j) sum: its last term differentiates Q in "
        "u^{i1} (printed u^{i2})"
    ),
}


# Scalar tables: monomial shape -> [(coefficient, kind, x-order, u-order)]
ScalarTable = Dict[Tuple[int, ...], List[Tuple[int, str, int, int]]]

SCALAR_TABLES: Dict[str, ScalarTable] = {
    "R1": {
        (): [(1, "R", 1, 0)],
        (1,): [(1, "R", 0, 1), (-1, "Q", 1, 0)],
        (1, 1): [(-1, "Q", 0, 1)],
    },
    "R2": {
        (): [(1, "R", 2, 0)],
        (1,): [(2, "R", 1, 1), (-1, "Q", 2, 0)],
        (1, 1): [(1, "R", 0, 2), (-2, "Q", 1, 1)],
        (1, 1, 1): [(-1, "Q", 0, 2)],
        (2,): [(1, "R", 0, 1), (-2, "Q", 1, 0)],
        (1, 2): [(-3, "Q", 0, 1)],
    },
    "R3": {
        (): [(1, "R", 3, 0)],
        (1,): [(3, "R", 2, 1), (-1, "Q", 3, 0)],
        (1, 1): [(3, "R", 1, 2), (-3, "Q", 2, 1)],
        (1, 1, 1): [(1, "R", 0, 3), (-3, "Q", 1, 2)],
        (1, 1, 1, 1): [(-1, "Q", 0, 3)],
        (2,): [(3, "R", 1, 1), (-3, "Q", 2, 0)],
        (1, 2): [(3, "R", 0, 2), (-9, "Q", 1, 1)],
        (1, 1, 2): [(-6, "Q", 0, 2)],
        (2, 2): [(-3, "Q", 0, 1)],
        (3,): [(1, "R", 0, 1), (-3, "Q", 1, 0)],
        (1, 3): [(-4, "Q", 0, 1)],
    },
    "R4": {
        (): [(1, "R", 4, 0)],
        (1,): [(4, "R", 3, 1), (-1, "Q", 4, 0)],
        (1, 1): [(6, "R", 2, 2), (-4, "Q", 3, 1)],
        (1, 1, 1): [(4, "R", 1, 3), (-6, "Q", 2, 2)],
        (1, 1, 1, 1): [(1, "R", 0, 4), (-4, "Q", 1, 3)],
        (1, 1, 1, 1, 1): [(-1, "Q", 0, 4)],
        (2,): [(6, "R", 2, 1), (-4, "Q", 3, 0)],
        (1, 2): [(12, "R", 1, 2), (-18, "Q", 2, 1)],
        (1, 1, 2): [(6, "R", 0, 3), (-24, "Q", 1, 2)],
        (1, 1, 1, 2): [(-10, "Q", 0, 3)],
        (2, 2): [(3, "R", 0, 2), (-12, "Q", 1, 1)],
        (1, 2, 2): [(-15, "Q", 0, 2)],
        (3,): [(4, "R", 1, 1), (-6, "Q", 2, 0)],
        (1, 3): [(4, "R", 0, 2), (-16, "Q", 1, 1)],
        (1, 1, 3): [(-10, "Q", 0, 2)],
        (2, 3): [(-10, "Q", 0, 1)],
        (4,): [(1, "R", 0, 1), (-4, "Q", 1, 0)],
        (1, 4): [(-5, "Q", 0, 1)],
    },
}


def scalar_partial_table(kappa: int) -> Tuple[ScalarTable, List[str]]:
    """Pinned monomials of R^kappa for n = m = 1, with coincident shapes merged"""
    if kappa < 3:
        raise DomainError(f"the partial formula needs kappa >= 3, got {kappa}")
    entries: List[Tuple[Tuple[int, ...], List[Tuple[int, str, int, int]]]] = [
        ((), [(1, "R", kappa, 0)])
    ]
    orders = [1, 2] if kappa == 3 else [1, 2, kappa - 2, kappa - 1]
    for p in orders + [kappa]:
        entries.append(
            (
                (p,),
                [
                    (binom(kappa, p), "R", kappa - p, 1),
                    (-binom(kappa, p - 1), "Q", kappa - p + 1, 0),
                ],
            )
        )
    entries.append(((1, kappa - 1), [(kappa, "R", 0, 2), (-kappa * kappa, "Q", 1, 1)]))
    top = 3 if kappa == 3 else binom(kappa + 1, 2)
    entries.append(((2, kappa - 1), [(-top, "Q", 0, 1)]))
    entries.append(((1, kappa), [(-(kappa + 1), "Q", 0, 1)]))

    table: ScalarTable = {}
    conflicts: List[str] = []
    for shape, terms in entries:
        shape = tuple(sorted(shape))
        if shape in table and sorted(table[shape]) != sorted(terms):
            conflicts.append(f"shape {shape}: {table[shape]} vs {terms}")
            continue
        table[shape] = terms
    return table, conflicts


def expand_scalar(space: JetSpace, table: ScalarTable) -> JetPoly:
    terms: Dict[Monomial, CoeffForm] = {}
    for shape, entries in table.items():
        mono: Monomial = ()
        for order in shape:
            mono = mono_mul(mono, ((JetCoord(1, (1,) * order), 1),))
        cf = CoeffForm(space)
        for coef, kind, xo, uo in entries:
            cf = cf + CoeffForm.from_symbol(space, DerivSymbol(kind, 1, (xo,), (uo,))).scale(coef)
        terms[mono] = cf
    return JetPoly(space, terms)


# Index-notation groups
@dataclass(frozen=True)
class Term:
    """One summand: coef * S * prod U^{i_s}_{l..}, with the deltas fixing some indices.

    kdelta pairs (t, L) set l_L = k_t; xpos lists the positions t differentiated in x;
    uslots lists the slots s whose component i_s is differentiated in u; idelta is the
    slot whose component equals j; upper is the l-number carrying the Q index.
    """

    coef: int
    kind: str
    xpos: Tuple[int, ...] = ()
    uslots: Tuple[int, ...] = ()
    upper: Optional[int] = None
    idelta: Optional[int] = None
    kdelta: Tuple[Tuple[int, int], ...] = ()


@dataclass(frozen=True)
class Group:
    """All terms sharing one monomial pattern; slots hold l-numbers per jet factor"""

    name: str
    slots: Tuple[Tuple[int, ...], ...]
    terms: Tuple[Term, ...]

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(sorted(len(slot) for slot in self.slots))


def _r(x=(), u=(), k=None, c=1) -> Term:
    return Term(c, "R", tuple(x), tuple(u), None, None, tuple(sorted((k or {}).items())))


def _q(upper, x=(), u=(), i=None, k=None, c=-1) -> Term:
    return Term(c, "Q", tuple(x), tuple(u), upper, i, tuple(sorted((k or {}).items())))


def validate_group(group: Group, order: int) -> None:
    """Deltas and x-positions must partition the derivative positions 1..order"""
    lnumbers = {l for slot in group.slots for l in slot}
    for term in group.terms:
        positions = sorted(list(term.xpos) + [t for t, _ in term.kdelta])
        if positions != list(range(1, order + 1)):
            raise DomainError(f"{group.name}: positions {positions} do not cover 1..{order}")
        bound = {l for _, l in term.kdelta}
        free = lnumbers - bound
        expected = set() if term.kind == "R" else {term.upper}
        if free != expected:
            raise DomainError(f"{group.name}: free l-numbers {sorted(free)} for a {term.kind} term")


def general_groups(order: int, literal: bool = False) -> List[Group]:
    """Complete coefficient tables for orders 1..3 in index notation"""
    if order == 1:
        return [
            Group("ct", (), (_r(x=(1,)),)),
            Group("U1", ((1,),), (_r(u=(1,), k={1: 1}), _q(1, x=(1,), i=1))),
            Group("U1U1", ((1,), (2,)), (_q(2, u=(1,), i=2, k={1: 1}),)),
        ]
    if order == 2:
        return [
            Group("ct", (), (_r(x=(1, 2)),)),
            Group(
                "U1",
                ((1,),),
                (
                    _r(x=(1,), u=(1,), k={2: 1}),
                    _r(x=(2,), u=(1,), k={1: 1}),
                    _q(1, x=(1, 2), i=1),
                ),
            ),
            Group(
                "U1U1",
                ((1,), (2,)),
                (
                    _r(u=(1, 2), k={1: 1, 2: 2}),
                    _q(2, x=(2,), u=(1,), i=2, k={1: 1}),
                    _q(2, x=(1,), u=(1,), i=2, k={2: 1}),
                ),
            ),
            Group("U1U1U1", ((1,), (2,), (3,)), (_q(3, u=(1, 2), i=3, k={1: 1, 2: 2}),)),
            Group(
                "U2",
                ((1, 2),),
                (
                    _r(u=(1,), k={1: 1, 2: 2}),
                    _q(2, x=(1,), i=1, k={2: 1}),
                    _q(2, x=(2,), i=1, k={1: 1}),
                ),
            ),
            Group(
                "U1U2",
                ((1,), (2, 3)),
                (
                    _q(3, u=(1,), i=2, k={1: 1, 2: 2}),
                    _q(2, u=(1,), i=2, k={1: 3, 2: 1}),
                    _q(1, u=(2,), i=1, k={1: 2, 2: 3}),
                ),
            ),
        ]
    if order == 3:
        return [
            Group("ct", (), (_r(x=(1, 2, 3)),)),
            Group(
                "U1",
                ((1,),),
                (
                    _r(x=(2, 3), u=(1,), k={1: 1}),
                    _r(x=(1, 3), u=(1,), k={2: 1}),
                    _r(x=(1, 2), u=(1,), k={3: 1}),
                    _q(1, x=(1, 2, 3), i=1),
                ),
            ),
            Group(
                "U1U1",
                ((1,), (2,)),
                (
                    _r(x=(3,), u=(1, 2), k={1: 1, 2: 2}),
                    _r(x=(2,), u=(1, 2), k={3: 1, 1: 2}),
                    _r(x=(1,), u=(1, 2), k={2: 1, 3: 2}),
                    _q(2, x=(2, 3), u=(1,), i=2, k={1: 1}),
                    _q(2, x=(1, 3), u=(1,), i=2, k={2: 1}),
                    _q(2, x=(1, 2), u=(1,), i=2, k={3: 1}),
                ),
            ),
            Group(
                "U1U1U1",
                ((1,), (2,), (3,)),
                (
                    _r(u=(1, 2, 3), k={1: 1, 2: 2, 3: 3}),
                    _q(3, x=(3,), u=(1, 2), i=3, k={1: 1, 2: 2}),
                    _q(3, x=(1,), u=(1, 2), i=3, k={2: 1, 3: 2}),
                    _q(3, x=(2,), u=(1, 2), i=3, k={1: 1, 3: 2}),
                ),
            ),
            Group(
                "U1U1U1U1",
                ((1,), (2,), (3,), (4,)),
                (_q(4, u=(1, 2, 3), i=4, k={1: 1, 2: 2, 3: 3}),),
            ),
            Group(
                "U2",
                ((1, 2),),
                (
                    _r(x=(3,), u=(1,), k={1: 1, 2: 2}),
                    _r(x=(2,), u=(1,), k={3: 1, 1: 2}),
                    _r(x=(1,), u=(1,), k={2: 1, 3: 2}),
                    _q(2, x=(2, 3), i=1, k={1: 1}),
                    _q(2, x=(1, 3), i=1, k={2: 1}),
                    _q(2, x=(1, 2), i=1, k={3: 1}),
                ),
            ),
            Group(
                "U1U2",
                ((1,), (2, 3)),
                (
                    _r(u=(1, 2), k={1: 1, 2: 2, 3: 3}),
                    _r(u=(1, 2), k={1: 3, 2: 1, 3: 2}),
                    _r(u=(1, 2), k={1: 2, 2: 3, 3: 1}),
                    _q(1, x=(3,), u=(2,), i=1, k={1: 2, 2: 3}),
                    _q(1, x=(2,), u=(2,), i=1, k={3: 2, 1: 3}),
                    _q(1, x=(1,), u=(2,), i=1, k={2: 2, 3: 3}),
                    _q(3, x=(3,), u=(1,), i=2, k={1: 1, 2: 2}),
                    _q(3, x=(2,), u=(1,), i=2, k={3: 1, 1: 2}),
                    _q(3, x=(1,), u=(1,), i=2, k={2: 1, 3: 2}),
                    _q(2, x=(3,), u=(1,), i=2, k={1: 3, 2: 1}),
                    _q(2, x=(2,), u=(1,), i=2, k={3: 3, 1: 1}),
                    _q(2, x=(1,), u=(1,), i=2, k={2: 3, 3: 1}),
                ),
            ),
            Group(
                "U1U1U2",
                ((1,), (2,), (3, 4)),
                (
                    _q(4, u=(1, 2), i=3, k={1: 1, 2: 2, 3: 3}),
                    _q(3, u=(1, 2), i=3, k={1: 1, 2: 4, 3: 2}),
                    _q(4, u=(1, 2), i=3, k={1: 3, 2: 1, 3: 2}),
                    _q(1, u=(2, 3), i=1, k={1: 3, 2: 2, 3: 4}),
                    _q(1, u=(2, 3), i=1, k={1: 4, 2: 3, 3: 2}),
                    _q(1, u=(1, 2) if literal else (2, 3), i=1, k={1: 2, 2: 3, 3: 4}),
                ),
            ),
            Group(
                "U2U2",
                ((1, 2), (3, 4)),
                (
                    _q(4, u=(1,), i=2, k={1: 1, 2: 2, 3: 3}),
                    _q(4, u=(1,), i=2, k={1: 3, 2: 1, 3: 2}),
                    _q(4, u=(1,), i=2, k={1: 2, 2: 3, 3: 1}),
                ),
            ),
            Group(
                "U3",
                ((1, 2, 3),),
                (
                    _r(u=(1,), k={1: 1, 2: 2, 3: 3}),
                    _q(3, x=(1,), i=1, k={2: 1, 3: 2}),
                    _q(3, x=(2,), i=1, k={3: 1, 1: 2}),
                    _q(3, x=(3,), i=1, k={1: 1, 2: 2}),
                ),
            ),
            Group(
                "U1U3",
                ((1,), (2, 3, 4)),
                (
                    _q(1, u=(2,), i=1, k={1: 2, 2: 3, 3: 4}),
                    _q(4, u=(1,), i=2, k={1: 1, 2: 2, 3: 3}),
                    _q(3, u=(1,), i=2, k={1: 4, 2: 1, 3: 2}),
                    _q(2, u=(1,), i=2, k={1: 3, 2: 4, 3: 1}),
                ),
            ),
        ]
    raise DomainError(f"general tables exist for orders 1..3, got {order}")


def _rotation(start: int, length: int) -> List[int]:
    return [(start - 1 + t) % length + 1 for t in range(length)]


def single_family(name: str, kappa: int, p: int) -> Group:
    """Coefficient of one jet U^i_{l1..lp}: R-terms over p-subsets, Q-terms over (p-1)-subsets"""
    positions = list(range(1, kappa + 1))
    slots = (tuple(range(1, p + 1)),) if p else ()
    terms: List[Term] = []
    for chosen in combinations(positions, p):
        rest = [t for t in positions if t not in chosen]
        terms.append(
            _r(x=rest, u=(1,) if p else (), k={t: idx + 1 for idx, t in enumerate(chosen)})
        )
    if p:
        for chosen in combinations(positions, p - 1):
            rest = [t for t in positions if t not in chosen]
            terms.append(_q(p, x=rest, i=1, k={t: idx + 1 for idx, t in enumerate(chosen)}))
    return Group(name, slots, tuple(terms))


def u1_top_family(kappa: int, literal: bool = False) -> Group:
    """Coefficient family of U^{i1}_{l1} U^{i2}_{l2..l_kappa}"""
    positions = list(range(1, kappa + 1))
    slots = ((1,), tuple(range(2, kappa + 1)))
    terms: List[Term] = []
    for s in positions:
        seq = _rotation(s, kappa)
        terms.append(_r(u=(1, 2), k={t + 1: seq[t] for t in range(kappa)}))
    for chosen in combinations(positions, kappa - 1):
        (b,) = [t for t in positions if t not in chosen]
        terms.append(_q(1, x=(b,), u=(2,), i=1, k={t: idx + 2 for idx, t in enumerate(chosen)}))
    starts = list(range(2, kappa + 1)) if literal else [1] + list(range(3, kappa + 1))
    for chosen in combinations(positions, kappa - 1):
        (b,) = [t for t in positions if t not in chosen]
        for s in starts:
            seq = _rotation(s, kappa)
            uslots = (2,) if literal and s == 3 else (1,)
            terms.append(
                _q(
                    seq[kappa - 1],
                    x=(b,),
                    u=uslots,
                    i=2,
                    k={t: seq[idx] for idx, t in enumerate(chosen)},
                )
            )
    return Group("U1U(k-1)", slots, tuple(terms))


def u2_top_family(kappa: int) -> Group:
    """Coefficient family of U^{i1}_{l1 l2} U^{i2}_{l3..l_(kappa+1)}"""
    positions = list(range(1, kappa + 1))
    slots = ((1, 2), tuple(range(3, kappa + 2)))
    terms: List[Term] = []
    if kappa > 3:
        for s in positions:
            seq = _rotation(s, kappa)
            terms.append(_q(1, u=(2,), i=1, k={t + 1: seq[t] + 1 for t in range(kappa)}))
    for pair in combinations(positions, 2):
        rest = [t for t in positions if t not in pair]
        deltas = {pair[0]: 1, pair[1]: 2}
        deltas.update({t: idx + 3 for idx, t in enumerate(rest)})
        terms.append(_q(kappa + 1, u=(1,), i=2, k=deltas))
    return Group("U2U(k-1)", slots, tuple(terms))


def u1_full_family(kappa: int) -> Group:
    """Coefficient family of U^{i1}_{l1} U^{i2}_{l2..l_(kappa+1)}"""
    slots = ((1,), tuple(range(2, kappa + 2)))
    terms: List[Term] = [_q(1, u=(2,), i=1, k={t: t + 1 for t in range(1, kappa + 1)})]
    for s in [1] + list(range(3, kappa + 2)):
        seq = _rotation(s, kappa + 1)
        terms.append(_q(seq[kappa], u=(1,), i=2, k={t + 1: seq[t] for t in range(kappa)}))
    return Group("U1U(k)", slots, tuple(terms))


def partial_families(kappa: int, literal: bool = False) -> List[Group]:
    """Pinned families of R^j_{k1..k_kappa}, kappa >= 3; coincident shapes kept once each"""
    if kappa < 3:
        raise DomainError(f"the partial formula needs kappa >= 3, got {kappa}")
    families = [
        single_family("ct", kappa, 0),
        single_family("U1", kappa, 1),
        single_family("U2", kappa, 2),
    ]
    if kappa > 3:
        families.append(single_family("U(k-2)", kappa, kappa - 2))
        families.append(single_family("U(k-1)", kappa, kappa - 1))
    families.append(u1_top_family(kappa, literal))
    families.append(u2_top_family(kappa))
    families.append(single_family("U(k)", kappa, kappa))
    families.append(u1_full_family(kappa))
    return families


def expand_group(space: JetSpace, group: Group, j: int, ks: Sequence[int]) -> JetPoly:
    """Sum the group's terms over all free l- and i-indices for the coefficient (j, ks)"""
    n, m = space.n, space.m
    nslots = len(group.slots)
    terms: Dict[Monomial, CoeffForm] = {}
    for term in group.terms:
        bound = {l: ks[t - 1] for t, l in term.kdelta}
        free_ls = [term.upper] if term.kind == "Q" and term.upper not in bound else []
        free_slots = [s for s in range(1, nslots + 1) if s != term.idelta]
        xorder = multiindex_from_indices((ks[t - 1] for t in term.xpos), n)
        for lvals in product(range(1, n + 1), repeat=len(free_ls)):
            lmap = dict(bound)
            lmap.update(zip(free_ls, lvals))
            for ivals in product(range(1, m + 1), repeat=len(free_slots)):
                imap = dict(zip(free_slots, ivals))
                if term.idelta is not None:
                    imap[term.idelta] = j
                mono: Monomial = ()
                for s, slot in enumerate(group.slots, 1):
                    coord = JetCoord(imap[s], tuple(sorted(lmap[l] for l in slot)))
                    mono = mono_mul(mono, ((coord, 1),))
                uorder = multiindex_from_indices((imap[s] for s in term.uslots), m)
                component = j if term.kind == "R" else lmap[term.upper]
                symbol = DerivSymbol(term.kind, component, xorder, uorder)
                cf = CoeffForm.from_symbol(space, symbol).scale(term.coef)
                terms[mono] = terms[mono] + cf if mono in terms else cf
    return JetPoly(space, terms)


def expand_groups(space: JetSpace, groups: Iterable[Group], j: int, ks: Sequence[int]) -> JetPoly:
    result = JetPoly.zero(space)
    for group in groups:
        result = result + expand_group(space, group, j, ks)
    return result


@dataclass
class ClosedFormReport:
    """Outcome of one closed-form comparison"""

    formula: str
    n: int
    m: int
    kappa: int
    mode: str
    checked: int = 0
    differences: List[Dict[str, str]] = field(default_factory=list)
    conflicts: List[str] = field(default_factory=list)
    corrections: List[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "match" if not self.differences and not self.conflicts else "mismatch"

    @property
    def matches(self) -> bool:
        return self.status == "match"

    def to_dict(self) -> Dict[str, object]:
        return {
            "formula": self.formula,
            "n": self.n,
            "m": self.m,
            "kappa": self.kappa,
            "mode": self.mode,
            "status": self.status,
            "checked_coefficients": self.checked,
            "differences": self.differences,
            "conflicts": self.conflicts,
            "corrections": self.corrections,
        }


def formula_order(formula: str, kappa: Optional[int]) -> int:
    if formula in ("partial", "general_partial"):
        if kappa is None:
            raise DomainError(f"{formula} needs kappa")
        if kappa < 3:
            raise DomainError(f"{formula} needs kappa >= 3, got {kappa}")
        return kappa
    return int(formula[-1])


def _compare(
    report: ClosedFormReport,
    space: JetSpace,
    label: str,
    actual: JetPoly,
    expected: JetPoly,
) -> None:
    for mono in sorted(set(actual.terms) | set(expected.terms), key=mono_key):
        have, want = actual.coefficient(mono), expected.coefficient(mono)
        if have != want:
            report.differences.append(
                {
                    "coefficient": label,
                    "monomial": mono_label(mono, space),
                    "expected": want.format(),
                    "actual": have.format(),
                }
            )


def closed_form_check(
    n: int,
    m: int,
    formula: str,
    kappa: Optional[int] = None,
    mode: str = "corrected",
    exhaustive: bool = False,
) -> ClosedFormReport:
    """Compare recursive prolongation coefficients with a hard-coded closed form"""
    if formula not in FORMULAS:
        raise DomainError(f"unknown formula {formula!r}; choose from {', '.join(FORMULAS)}")
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    if formula in SCALAR_FORMULAS and (n, m) != (1, 1):
        raise DomainError(f"{formula} is a scalar formula and needs n = m = 1")
    order = formula_order(formula, kappa)
    if order > Config.KAPPA_MAX:
        raise DomainError(f"order {order} exceeds JETLIE_KAPPA_MAX={Config.KAPPA_MAX}")
    literal = mode == "literal"
    space = JetSpace(n, m)
    report = ClosedFormReport(formula, n, m, order, mode)

    shapes: Optional[set] = None
    if formula in SCALAR_TABLES:
        expected_scalar = expand_scalar(space, SCALAR_TABLES[formula])
    elif formula == "partial":
        table, report.conflicts = scalar_partial_table(order)
        expected_scalar = expand_scalar(space, table)
        shapes = set(table)
    else:
        if formula == "general_partial":
            groups = partial_families(order, literal)
            shapes = {g.shape for g in groups}
            if not literal:
                report.corrections = [
                    CORRECTIONS["u1_top_rotations"],
                    CORRECTIONS["u1_top_last_term"],
                ]
        else:
            groups = general_groups(order, literal)
            if order == 3 and not literal:
                report.corrections = [CORRECTIONS["u1u1u2_delta_i1"]]
        for group in groups:
            validate_group(group, order)

    prolongator = Prolongator(VectorField.symbolic(space))
    index_sets = (
        product(range(1, n + 1), repeat=order)
        if exhaustive
        else combinations_with_replacement(range(1, n + 1), order)
    )
    logger.info(f"🔍 Checking {formula} (n={n}, m={m}, order {order}, {mode})")
    for ks in index_sets:
        for j in range(1, m + 1):
            actual = prolongator.coeff(j, ks)
            if formula in SCALAR_FORMULAS:
                expected = expected_scalar
            elif formula == "general_partial":
                expected = _merge_families(report, space, groups, j, ks)
            else:
                expected = expand_groups(space, groups, j, ks)
            if shapes is not None:
                actual = actual.restrict(lambda mono: mono_shape(mono) in shapes)
            label = f"R{j}_{''.join(str(k) for k in ks)}"
            _compare(report, space, label, actual, expected)
            report.checked += 1
    logger.info(
        f"{'✅' if report.matches else '❌'} {formula}: {report.status} "
        f"({report.checked} coefficients, {len(report.differences)} differences)"
    )
    return report


def _merge_families(
    report: ClosedFormReport, space: JetSpace, groups: List[Group], j: int, ks: Sequence[int]
) -> JetPoly:
    """Sum families of distinct shapes; families sharing a shape must agree"""
    by_shape: Dict[Tuple[int, ...], Tuple[str, JetPoly]] = {}
    for group in groups:
        value = expand_group(space, group, j, ks)
        if group.shape in by_shape:
            name, previous = by_shape[group.shape]
            if previous != value:
                report.conflicts.append(
                    f"{group.name} and {name} disagree on shape {group.shape} for R{j}_{ks}"
                )
            continue
        by_shape[group.shape] = (group.name, value)
    result = JetPoly.zero(space)
    for _, value in by_shape.values():
        result = result + value
    return result
