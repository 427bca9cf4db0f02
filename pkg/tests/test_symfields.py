"""Brackets, closure of the tabulated families and finite transformations."""

import random

import pytest
from sympy.polys.domains import QQ

from jetlie.algebra import multiindex_enumerate, poly_ring
from jetlie.errors import DomainError, UnsupportedShapeError
from jetlie.jet import JetSpace
from jetlie.prolong import VectorField
from jetlie.solve import theorem1_bound
from jetlie.symfields import (
    Generator,
    RationalMap,
    bracket,
    closure_check,
    compose_parameters,
    exp_flow,
    finite_symmetry_check,
    generator_family,
    inverse_parameter,
    projective_map,
    sample_solutions,
    transformed_solution,
    weighted_map,
)

PARAMETERS = (QQ(1), QQ(-1), QQ(1, 2))
RANDOM_SEED = 5
RANDOM_CASES = 15


def random_field(space: JetSpace, rng: random.Random) -> VectorField:
    ring = space.ring
    monomials = multiindex_enumerate(ring.ngens, 2)

    def coefficient():
        chosen = rng.sample(monomials, k=3)
        return ring.from_dict({m: QQ(rng.randint(-3, 3)) for m in chosen})

    return VectorField(
        space,
        tuple(coefficient() for _ in range(space.n)),
        tuple(coefficient() for _ in range(space.m)),
    )


# ============================================================================
# Brackets and closure
# ============================================================================


def test_bracket_is_antisymmetric(plane_space):
    x1, x2, u = plane_space.ring.gens
    X = VectorField.concrete(plane_space, [x1 * x2, 0], [u])
    Y = VectorField.concrete(plane_space, [u, x1], [x2 * x2])
    XY, YX = bracket(X, Y), bracket(Y, X)
    assert XY.combine(1, YX, 1).is_zero()


@pytest.mark.parametrize("n, m", [(1, 1), (2, 1), (1, 2)])
def test_bracket_identities_on_random_fields(n, m):
    rng = random.Random(RANDOM_SEED + n + 2 * m)
    space = JetSpace(n, m)
    for _ in range(RANDOM_CASES):
        X, Y, Z = (random_field(space, rng) for _ in range(3))
        assert bracket(X, Y).combine(1, bracket(Y, X), 1).is_zero()
        cyclic = bracket(X, bracket(Y, Z)).combine(1, bracket(Y, bracket(Z, X)), 1)
        assert cyclic.combine(1, bracket(Z, bracket(X, Y)), 1).is_zero(), (X, Y, Z)


@pytest.mark.parametrize("n, m", [(1, 1), (2, 1), (1, 2)])
def test_projective_family_closes(n, m):
    gens = generator_family("projective", n, m, 2)
    report = closure_check([g.field() for g in gens])
    assert report.closed
    assert report.dimension == (n + m) * (n + m + 2)
    assert report.dimension == theorem1_bound(n, m, 2)


@pytest.mark.parametrize("n, m", [(1, 1), (2, 1), (1, 2)])
def test_weighted_family_closes(n, m):
    gens = generator_family("weighted", n, m, 3)
    report = closure_check([g.field() for g in gens])
    assert report.closed
    assert report.dimension == theorem1_bound(n, m, 3)


def test_closure_reports_the_offending_bracket(scalar_space):
    x, u = scalar_space.ring.gens
    d_x = VectorField.concrete(scalar_space, [1], [0])
    cubic = VectorField.concrete(scalar_space, [x**3], [0])
    report = closure_check([d_x, cubic])
    assert not report.closed
    assert report.offending == (0, 1)
    assert report.offending_bracket == "3*x1^2*d/dx1"


def test_structure_constants(scalar_space):
    x = scalar_space.x(1)
    d_x = VectorField.concrete(scalar_space, [1], [0])
    scaling = VectorField.concrete(scalar_space, [x], [0])
    report = closure_check([d_x, scaling])
    assert report.closed
    assert report.structure_constants[(0, 1)] == [QQ(1), QQ(0)]
    assert report.to_dict()["structure_constants"] == {"0,1": ["1", "0"]}


def test_family_domain_errors():
    with pytest.raises(DomainError):
        generator_family("weighted", 1, 1, 2)
    with pytest.raises(DomainError):
        generator_family("scalar-ode", 2, 1, 3)
    with pytest.raises(DomainError):
        generator_family("conformal", 1, 1, 3)
    with pytest.raises(DomainError):
        generator_family("projective", 1, 1, 3)
    with pytest.raises(DomainError):
        generator_family("scalar-ode", 1, 1, 2)
    with pytest.raises(UnsupportedShapeError):
        Generator("rotation", JetSpace(1, 1))


# ============================================================================
# Flows
# ============================================================================


@pytest.mark.parametrize("n, m", [(1, 1), (2, 1)])
@pytest.mark.parametrize("family, kappa", [("projective", 2), ("weighted", 3)])
def test_flow_group_law(n, m, family, kappa):
    for gen in generator_family(family, n, m, kappa):
        s, t = QQ(1, 2), QQ(-1, 3)
        combined = exp_flow(gen, s).compose(exp_flow(gen, t))
        assert combined.equals(exp_flow(gen, compose_parameters(gen, s, t))), gen.label
        inverse = exp_flow(gen, inverse_parameter(gen, s))
        assert exp_flow(gen, s).compose(inverse).is_identity(), gen.label


def test_projective_flow(scalar_space):
    gen = Generator("projective_x", scalar_space, (1,), 2)
    h = exp_flow(gen, QQ(1))
    assert h.format() == ["x1' = (x1) / (-x1 + 1)", "u1' = (u1) / (-x1 + 1)"]
    assert h.is_invertible_at_origin()


def test_rational_map_rejects_vanishing_denominator(scalar_space):
    x, u = scalar_space.ring.gens
    with pytest.raises(DomainError):
        RationalMap.from_polys(scalar_space, [x, u], [x, scalar_space.ring.one])


# ============================================================================
# Finite symmetries
# ============================================================================


@pytest.mark.parametrize("n, m", [(1, 1), (2, 1)])
@pytest.mark.parametrize("family, kappa", [("projective", 2), ("weighted", 3)])
def test_family_flows_are_finite_symmetries(n, m, family, kappa):
    space = JetSpace(n, m)
    solutions = sample_solutions(space, kappa)
    for gen in generator_family(family, n, m, kappa):
        for s in PARAMETERS:
            report = finite_symmetry_check(exp_flow(gen, s), kappa, solutions)
            assert report, (gen.label, s, report.results)


def test_weighted_map_squares(scalar_space):
    x, u = scalar_space.ring.gens
    h = weighted_map(scalar_space, 3, [x], [u], [1])
    rx = poly_ring(("x1",))
    image = transformed_solution(h, [rx.gens[0] ** 2], 3)
    assert image == (rx.gens[0] ** 2,)


def test_non_symmetry_is_rejected(scalar_space):
    x, u = scalar_space.ring.gens
    h = RationalMap.from_polys(scalar_space, [x, u + x**3])
    report = finite_symmetry_check(h, 3, sample_solutions(scalar_space, 3))
    assert not report
    assert all(not r["passed"] for r in report.results)
    assert "degree 3" in report.results[0]["detail"]


def test_projective_map_needs_affine_numerators(scalar_space):
    x, u = scalar_space.ring.gens
    with pytest.raises(DomainError):
        projective_map(scalar_space, [x * x, u], [1, 0])


def test_singular_map_is_refused(scalar_space):
    x, u = scalar_space.ring.gens
    h = RationalMap.from_polys(scalar_space, [x, x])
    with pytest.raises(DomainError):
        finite_symmetry_check(h, 3, sample_solutions(scalar_space, 3))


def test_solution_degree_is_checked(scalar_space):
    rx = poly_ring(("x1",))
    h = RationalMap.identity(scalar_space)
    with pytest.raises(DomainError):
        finite_symmetry_check(h, 2, [(rx.gens[0] ** 2,)])
