"""Jet coordinates, total derivatives and prolongation of vector fields."""

import random

import pytest
import sympy as sp
from sympy.polys.domains import QQ

from jetlie.algebra import multiindex_enumerate
from jetlie.errors import DomainError, ResourceError
from jetlie.jet import JetCoord, JetSpace, canonical_jet, jet_dim
from jetlie.jetpoly import CoeffForm, DerivSymbol, JetPoly
from jetlie.prolong import Prolongator, VectorField, prolong_coeff, prolong_field
from jetlie.symfields import bracket, prolong_bracket_identity

RANDOM_SEED = 7
RANDOM_CASES = 25


def random_field(space: JetSpace, rng: random.Random, degree: int = 2) -> VectorField:
    """Concrete field with small integer coefficients of total degree <= degree"""
    ring = space.ring
    monomials = multiindex_enumerate(ring.ngens, degree)

    def coefficient():
        chosen = rng.sample(monomials, k=min(3, len(monomials)))
        return ring.from_dict({m: QQ(rng.randint(-3, 3)) for m in chosen})

    return VectorField(
        space,
        tuple(coefficient() for _ in range(space.n)),
        tuple(coefficient() for _ in range(space.m)),
    )


def random_space(rng: random.Random) -> JetSpace:
    return JetSpace(rng.randint(1, 2), rng.randint(1, 2))


# ============================================================================
# Jet coordinates
# ============================================================================


def test_canonical_jet_sorts_indices(plane_space):
    assert canonical_jet(1, (2, 1, 2), plane_space) == JetCoord(1, (1, 2, 2))
    with pytest.raises(DomainError):
        canonical_jet(1, (3,), plane_space)
    with pytest.raises(DomainError):
        canonical_jet(0, (1,))


def test_jet_dim():
    assert jet_dim(1, 1, 2) == 4
    assert jet_dim(2, 1, 2) == 8
    assert jet_dim(2, 2, 3) == 2 + 2 * 10
    with pytest.raises(DomainError):
        jet_dim(1, 1, -1)


def test_coordinates_count_matches_jet_dim(plane_space):
    coords = plane_space.coordinates_up_to(3)
    assert len(coords) + plane_space.n + plane_space.m == jet_dim(2, 1, 3)
    assert coords == sorted(coords)


def test_space_rejects_duplicate_names():
    with pytest.raises(DomainError):
        JetSpace(1, 1, ("x",), ("x",))


def test_total_derivative_of_u(scalar_space):
    u = JetPoly.coord(scalar_space, JetCoord(1, ()))
    assert u.total_derivative(1) == JetPoly.coord(scalar_space, JetCoord(1, (1,)))
    ux = JetPoly.coord(scalar_space, JetCoord(1, (1,)))
    square = (ux * ux).total_derivative(1)
    uxx = JetPoly.coord(scalar_space, JetCoord(1, (1, 1)))
    assert square == ux * uxx * 2


# ============================================================================
# Prolongation
# ============================================================================


def test_translation_prolongs_to_zero(scalar_space):
    X = VectorField.concrete(scalar_space, [1], [0])
    prolonged = prolong_field(X, 3)
    assert all(prolonged.coefficient(c).is_zero() for c in prolonged.coordinates())


def test_scaling_prolongation(scalar_space):
    x = scalar_space.x(1)
    X = VectorField.concrete(scalar_space, [x], [0])
    ux = JetPoly.coord(scalar_space, JetCoord(1, (1,)))
    uxx = JetPoly.coord(scalar_space, JetCoord(1, (1, 1)))
    assert prolong_coeff(X, 1, (1,)) == ux * -1
    assert prolong_coeff(X, 1, (1, 1)) == uxx * -2


def test_first_order_symbolic_coefficient(scalar_space):
    X = VectorField.symbolic(scalar_space)
    R1 = prolong_coeff(X, 1, (1,))
    ux = JetCoord(1, (1,))
    assert R1.coefficient(()) == CoeffForm.from_symbol(
        scalar_space, DerivSymbol("R", 1, (1,), (0,))
    )
    expected_linear = CoeffForm.from_symbol(
        scalar_space, DerivSymbol("R", 1, (0,), (1,))
    ) - CoeffForm.from_symbol(scalar_space, DerivSymbol("Q", 1, (1,), (0,)))
    assert R1.coefficient(((ux, 1),)) == expected_linear
    assert R1.coefficient(((ux, 2),)) == -CoeffForm.from_symbol(
        scalar_space, DerivSymbol("Q", 1, (0,), (1,))
    )


def test_coefficients_are_symmetric_in_indices(plane_space):
    prolongator = Prolongator(VectorField.symbolic(plane_space))
    assert prolongator.coeff(1, (1, 2)) == prolongator.coeff(1, (2, 1))

def test_permuted_indices_share_one_cache_entry(plane_space):
    prolongator = Prolongator(VectorField.symbolic(plane_space))
    first = prolongator.coeff(1, (2, 1, 2))
    assert first is prolongator.coeff(1, (1, 2, 2))
    assert (1, (1, 2, 2)) in prolongator._coeffs
    assert (1, (2, 1, 2)) not in prolongator._coeffs
    assert prolongator.coeff(1, (2, 2, 1)) is first
    assert (1, (2, 2, 1)) in prolongator._checked


def test_coefficients_do_not_depend_on_index_order():
    rng = random.Random(RANDOM_SEED + 2)
    for _ in range(RANDOM_CASES):
        space = JetSpace(rng.randint(1, 3), rng.randint(1, 2))
        X = random_field(space, rng)
        j = rng.randint(1, space.m)
        ks = [rng.randint(1, space.n) for _ in range(rng.randint(2, 4))]
        shuffled = list(ks)
        rng.shuffle(shuffled)
        assert prolong_coeff(X, j, shuffled) == Prolongator(X).coeff(j, sorted(ks)), (X, ks)


def sympy_rational(value) -> QQ.dtype:
    value = sp.Rational(value)
    return QQ(int(value.p), int(value.q))


def flow_jet_velocity(X: VectorField, solution, order: int, point) -> QQ.dtype:
    """d/ds at s = 0 of the order-th derivative of the graph moved by the flow of X

    The graph t -> (t, f(t)) is pushed to first order in s and differentiated
    by the chain rule, independently of the prolongation recursion.
    """
    t, s = sp.symbols("t s")
    x1, u1 = sp.symbols("x1 u1")
    on_graph = {x1: t, u1: solution(t)}
    Xt = t + s * X.Q[0].as_expr().subs(on_graph, simultaneous=True)
    Ut = solution(t) + s * X.R[0].as_expr().subs(on_graph, simultaneous=True)
    derivative = Ut
    for _ in range(order):
        derivative = sp.diff(derivative, t) / sp.diff(Xt, t)
    velocity = sp.diff(derivative, s).subs(s, 0)
    return sympy_rational(velocity.subs(t, point))


@pytest.mark.parametrize("order", [1, 2, 3])
def test_prolongation_matches_the_flow_on_a_graph(scalar_space, order):
    rng = random.Random(RANDOM_SEED + order)
    for _ in range(5):
        X = random_field(scalar_space, rng)
        coeffs = [rng.randint(-3, 3) for _ in range(4)]

        def solution(t, coeffs=coeffs):
            return sum(c * t**i for i, c in enumerate(coeffs))

        t = sp.Symbol("t")
        for point in (sp.Rational(0), sp.Rational(1, 2), sp.Rational(-2)):
            jets = {
                JetCoord(1, (1,) * i): sympy_rational(sp.diff(solution(t), t, i).subs(t, point))
                for i in range(1, order + 1)
            }
            base = [sympy_rational(point), sympy_rational(solution(point))]
            expected = prolong_coeff(X, 1, (1,) * order).evaluate(base, jets)
            assert flow_jet_velocity(X, solution, order, point) == expected, (X, coeffs, point)


def test_prolongation_order_guards(scalar_space):
    X = VectorField.symbolic(scalar_space)
    with pytest.raises(DomainError):
        prolong_field(X, 0)
    with pytest.raises(ResourceError):
        Prolongator(X, kappa_max=2).coeff(1, (1, 1, 1))


def test_vector_field_rejects_mixed_modes(scalar_space):
    with pytest.raises(DomainError):
        VectorField(scalar_space, (None,), (scalar_space.ring.one,))


def test_parse_field(scalar_space):
    X = VectorField.parse(scalar_space, ["x1^2"], ["x1*u1"])
    assert X.format() == "x1^2*d/dx1 + x1*u1*d/du1"
    assert X.degree() == 2


def test_prolongation_is_linear():
    rng = random.Random(RANDOM_SEED)
    for _ in range(RANDOM_CASES):
        space = random_space(rng)
        X, Y = random_field(space, rng), random_field(space, rng)
        a, b = QQ(rng.randint(-3, 3)), QQ(rng.randint(1, 4), rng.randint(1, 3))
        combined = prolong_field(X.combine(a, Y, b), 2)
        PX, PY = prolong_field(X, 2), prolong_field(Y, 2)
        for coord in combined.coordinates():
            assert combined.coefficient(coord) == PX.coefficient(coord) * a + PY.coefficient(
                coord
            ) * b


@pytest.mark.slow
def test_prolongation_commutes_with_brackets():
    rng = random.Random(RANDOM_SEED + 1)
    for _ in range(RANDOM_CASES):
        space = random_space(rng)
        X, Y = random_field(space, rng), random_field(space, rng)
        assert prolong_bracket_identity(X, Y, 2)


def test_bracket_of_translation_and_scaling(scalar_space):
    x = scalar_space.x(1)
    d_x = VectorField.concrete(scalar_space, [1], [0])
    scaling = VectorField.concrete(scalar_space, [x], [0])
    assert bracket(d_x, scaling) == d_x
    with pytest.raises(ResourceError):
        prolong_bracket_identity(d_x, scaling, 4)
