"""Skeletons, determining equations and integrability residues."""

import pytest

from jetlie.algebra import binom
from jetlie.determine import (
    determining_system,
    integrability_residues,
    tangency_polynomial,
    verify_field,
)
from jetlie.dsl import parse_input
from jetlie.errors import DomainError, SpecificationError
from jetlie.jet import JetCoord, JetSpace
from jetlie.jetpoly import CoeffForm, DerivSymbol, JetPoly
from jetlie.prolong import VectorField
from jetlie.system import SystemSpec, homogeneous_system


def symbol(space: JetSpace, kind: str, xorder: int, uorder: int) -> CoeffForm:
    return CoeffForm.from_symbol(space, DerivSymbol(kind, 1, (xorder,), (uorder,)))


# ============================================================================
# System specifications
# ============================================================================


def test_homogeneous_system_is_full_form():
    spec = homogeneous_system(2, 1, 2)
    assert spec.is_full_form()
    assert spec.is_homogeneous()
    assert len(spec.declared) == 3


def test_principal_and_parametric_split(free_particle):
    principal = free_particle.principal_coordinates()
    assert principal == [JetCoord(1, (1, 1))]
    assert free_particle.parametric_coordinates() == [JetCoord(1, (1,))]


@pytest.mark.parametrize(
    "kappa, equations",
    [
        (1, {JetCoord(1, (1,)): None}),
        (2, {}),
        (2, {JetCoord(1, (1, 1, 1)): None}),
    ],
)
def test_system_validation(scalar_space, kappa, equations):
    equations = {c: JetPoly.zero(scalar_space) for c in equations}
    with pytest.raises(SpecificationError):
        SystemSpec(scalar_space, kappa, equations)


def test_rhs_may_not_use_determined_coordinates(scalar_space):
    uxx = JetCoord(1, (1, 1))
    ux = JetCoord(1, (1,))
    with pytest.raises(SpecificationError):
        SystemSpec(
            scalar_space,
            2,
            {uxx: JetPoly.coord(scalar_space, uxx), ux: JetPoly.zero(scalar_space)},
        )


# ============================================================================
# Determining equations
# ============================================================================


@pytest.mark.parametrize("kappa", [3, 4, 5])
def test_scalar_determining_equations(kappa):
    """Coefficients of 1, U_1, U_(kappa-1), U_(kappa-2) and U_1*U_(kappa-1) in the criterion"""
    spec = homogeneous_system(1, 1, kappa)
    space = spec.space
    system = determining_system(spec)
    def R(a, b):
        return symbol(space, "R", a, b)

    def Q(a, b):
        return symbol(space, "Q", a, b)

    expected = [
        R(kappa, 0),
        R(kappa - 1, 1).scale(kappa) - Q(kappa, 0),
        R(1, 1).scale(kappa) - Q(2, 0).scale(binom(kappa, 2)),
        R(2, 1).scale(binom(kappa, 2)) - Q(3, 0).scale(binom(kappa, 3)),
        R(0, 2).scale(kappa) - Q(1, 1).scale(kappa * kappa),
    ]
    for form in expected:
        assert system.contains(form), form.format()
    assert system.is_linear()


def test_free_particle_criterion(free_particle):
    poly = tangency_polynomial(free_particle)
    ux = JetCoord(1, (1,))
    space = free_particle.space
    cubic = poly.coefficient(((ux, 3),))
    assert cubic == symbol(space, "Q", 0, 2).scale(-1)


def test_tangency_polynomial_needs_a_principal_coordinate(free_particle):
    with pytest.raises(DomainError):
        tangency_polynomial(free_particle, coord=JetCoord(1, (1,)))


def test_verify_field(free_particle):
    space = free_particle.space
    x, u = space.x(1), space.u(1)
    assert verify_field(free_particle, VectorField.concrete(space, [x * x], [x * u]))
    assert not verify_field(free_particle, VectorField.concrete(space, [u * u], [0]))
    with pytest.raises(DomainError):
        verify_field(free_particle, VectorField.symbolic(space))


def test_determining_system_deduplicates(free_particle):
    system = determining_system(free_particle)
    forms = [eq.normalized()[0] for eq in system.equations]
    assert len(forms) == len(set(forms))
    assert len(system.provenance) == len(system)


# ============================================================================
# Integrability
# ============================================================================


def test_integrable_system_has_zero_residues():
    spec = homogeneous_system(2, 1, 2)
    assert all(res.is_zero() for res in integrability_residues(spec))


def test_incompatible_system_is_flagged():
    job = parse_input(
        """
        system {
            independent: x, y;
            dependent: u;
            order: 2;
            eq u[x,x] = 0;
            eq u[x,y] = 0;
            eq u[y,y] = x;
        }
        """
    )
    residues = [res for res in integrability_residues(job.system) if not res.is_zero()]
    assert residues
    assert any(res.parent == JetCoord(1, (1, 2, 2)) for res in residues)
