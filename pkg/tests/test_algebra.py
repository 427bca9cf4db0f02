"""Exact rationals, multiindices, polynomial helpers and linear algebra."""

import random
from fractions import Fraction

import pytest
from sympy.polys.domains import QQ

from jetlie.algebra import (
    binom,
    evaluate_poly,
    format_poly,
    indices_from_multiindex,
    multiindex_enumerate,
    multiindex_from_indices,
    poly_arith,
    poly_compose,
    poly_derivative,
    poly_diff,
    poly_ring,
    rat,
    rat_str,
    truncate,
)
from jetlie.errors import DomainError
from jetlie.jet import JetSpace
from jetlie.jetpoly import JetPoly
from jetlie.linalg import in_span, inverse, nullspace, rank, solve_linear

RANDOM_SEED = 11
RANDOM_CASES = 20


# ============================================================================
# Rationals
# ============================================================================


def test_rat_accepts_ints_strings_and_fractions():
    assert rat(3) == QQ(3)
    assert rat("-3/4") == QQ(-3, 4)
    assert rat(Fraction(5, 10)) == QQ(1, 2)
    assert rat_str(QQ(-3, 4)) == "-3/4"
    assert rat_str(QQ(6, 3)) == "2"


@pytest.mark.parametrize("bad", ["0.5", "1e3", "abc", True, 1.5])
def test_rat_rejects_inexact_input(bad):
    with pytest.raises(DomainError):
        rat(bad)


def test_binom_domain():
    assert binom(12, 9) == 220
    assert binom(4, 0) == 1
    with pytest.raises(DomainError):
        binom(2, 3)


def test_binom_pascal_rule():
    for p in range(2, 31):
        for q in range(1, p):
            assert binom(p, q) == binom(p - 1, q - 1) + binom(p - 1, q), (p, q)
        assert binom(p, 0) == binom(p, p) == 1


# ============================================================================
# Multiindices
# ============================================================================


def test_multiindex_enumerate_is_graded():
    alphas = multiindex_enumerate(2, 2)
    assert alphas == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert multiindex_enumerate(0, 5) == [()]


def test_multiindex_index_conversion():
    assert multiindex_from_indices((2, 1, 2), 3) == (1, 2, 0)
    assert indices_from_multiindex((1, 2, 0)) == (1, 2, 2)


# ============================================================================
# Polynomials
# ============================================================================


def test_poly_ring_is_cached():
    assert poly_ring(("x", "y")) is poly_ring(("x", "y"))
    with pytest.raises(DomainError):
        poly_ring(())


def test_poly_arith_needs_one_variable_set():
    R = poly_ring(("x", "y"))
    S = poly_ring(("x", "z"))
    x, y = R.gens
    assert poly_arith(x, y, "mul") == x * y
    with pytest.raises(DomainError):
        poly_arith(x, S.gens[0], "add")


def test_derivatives_and_evaluation():
    R = poly_ring(("x", "y"))
    x, y = R.gens
    p = x**3 * y + QQ(1, 2) * y**2
    assert poly_diff(p, "x") == 3 * x**2 * y
    assert poly_derivative(p, (2, 1)) == 6 * x
    assert evaluate_poly(p, [2, "1/2"]) == QQ(4) + QQ(1, 8)


def test_compose_and_truncate():
    R = poly_ring(("x", "y"))
    x, y = R.gens
    p = x**2 + y
    composed = poly_compose(p, [x + y, x * y], R)
    assert composed == x**2 + 2 * x * y + y**2 + x * y
    assert truncate(x**3 + x * y + 1, 2) == x * y + 1
    assert poly_compose(p, [x + y, x * y], R, max_degree=1) == R.zero


def test_format_poly_uses_caret_powers():
    R = poly_ring(("x", "u"))
    x, u = R.gens
    assert format_poly(x**2 * u - QQ(3, 2) * x + 1) == "x^2*u - 3/2*x + 1"
    assert format_poly(R.zero) == "0"


def random_poly(ring, rng: random.Random, degree: int = 3):
    monomials = multiindex_enumerate(ring.ngens, degree)
    chosen = rng.sample(monomials, k=min(4, len(monomials)))
    return ring.from_dict({m: QQ(rng.randint(-5, 5), rng.randint(1, 3)) for m in chosen})


def random_jet_poly(space: JetSpace, rng: random.Random) -> JetPoly:
    coords = space.coordinates_up_to(2)
    total = JetPoly.constant(space, random_poly(space.ring, rng, 2))
    for coord in rng.sample(coords, k=2):
        total = total + JetPoly.coord(space, coord) * JetPoly.constant(
            space, random_poly(space.ring, rng, 1)
        )
    return total


def test_ring_axioms_on_random_polynomials():
    rng = random.Random(RANDOM_SEED)
    R = poly_ring(("x", "y", "u"))
    for _ in range(RANDOM_CASES):
        a, b, c = (random_poly(R, rng) for _ in range(3))
        assert poly_arith(poly_arith(a, b, "mul"), c, "mul") == poly_arith(
            a, poly_arith(b, c, "mul"), "mul"
        )
        assert poly_arith(a, poly_arith(b, c, "add"), "mul") == poly_arith(
            poly_arith(a, b, "mul"), poly_arith(a, c, "mul"), "add"
        )
        assert poly_arith(poly_arith(a, b, "add"), c, "add") == poly_arith(
            a, poly_arith(b, c, "add"), "add"
        )


def test_ring_axioms_on_random_jet_polynomials(plane_space):
    rng = random.Random(RANDOM_SEED + 1)
    for _ in range(RANDOM_CASES):
        a, b, c = (random_jet_poly(plane_space, rng) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert (a + b) - b == a


def test_partial_derivatives_commute():
    rng = random.Random(RANDOM_SEED + 2)
    R = poly_ring(("x", "y", "u"))
    for _ in range(RANDOM_CASES):
        p = random_poly(R, rng, 4)
        a, b = rng.randrange(3), rng.randrange(3)
        assert poly_diff(poly_diff(p, a), b) == poly_diff(poly_diff(p, b), a), (p, a, b)


def test_total_derivatives_commute(plane_space):
    rng = random.Random(RANDOM_SEED + 3)
    for _ in range(RANDOM_CASES):
        f = random_jet_poly(plane_space, rng)
        d12 = f.total_derivative(1).total_derivative(2)
        assert d12 == f.total_derivative(2).total_derivative(1)


# ============================================================================
# Linear algebra
# ============================================================================


def test_rank_and_nullspace():
    rows = [{0: QQ(1), 1: QQ(2)}, {0: QQ(2), 1: QQ(4)}, {2: QQ(1)}]
    assert rank(rows, 3) == 2
    basis = nullspace(rows, 3)
    assert basis == [{1: QQ(1), 0: QQ(-2)}]


def test_solve_linear_reports_inconsistency():
    rows = [{0: QQ(1)}, {0: QQ(1)}]
    assert solve_linear(rows, [QQ(1), QQ(2)], 1) is None
    assert solve_linear(rows, [QQ(3), QQ(3)], 1) == {0: QQ(3)}


def test_in_span_and_inverse():
    basis = [{0: QQ(1)}, {1: QQ(1)}]
    assert in_span(basis, {0: QQ(2), 1: QQ(-1)}) == [QQ(2), QQ(-1)]
    assert in_span(basis, {2: QQ(1)}) is None
    assert inverse([[QQ(2), QQ(0)], [QQ(0), QQ(4)]]) == [[QQ(1, 2), QQ(0)], [QQ(0), QQ(1, 4)]]
    with pytest.raises(DomainError):
        inverse([[QQ(1), QQ(1)], [QQ(1), QQ(1)]])
