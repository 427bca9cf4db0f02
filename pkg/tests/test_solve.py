"""Polynomial symmetry algebras of homogeneous systems and their tabulated shapes."""

import pytest

import jetlie.solve as solve_module
from jetlie.determine import determining_system, verify_field
from jetlie.dsl import JobSpec
from jetlie.errors import DomainError
from jetlie.runner import run
from jetlie.solve import (
    ansatz_solve,
    generator_coefficients,
    match_solution_shape,
    solve_system,
    stabilization_check,
    theorem1_bound,
)
from jetlie.symfields import span_rank
from jetlie.system import homogeneous_system

# (n, m, kappa) -> dimension of the symmetry algebra of u^j_(x_k1..x_kkappa) = 0
DIMENSIONS = {
    (1, 1, 2): 8,
    (1, 1, 3): 7,
    (1, 1, 4): 8,
    (1, 1, 5): 9,
    (2, 1, 2): 15,
    (1, 2, 2): 15,
    (2, 1, 3): 15,
    (1, 2, 3): 13,
    (2, 2, 2): 24,
}

QUICK = [(1, 1, 2), (1, 1, 3), (1, 1, 4)]
SLOW = [key for key in DIMENSIONS if key not in QUICK]


@pytest.mark.parametrize("n, m, kappa", list(DIMENSIONS))
def test_theorem1_bound_formula(n, m, kappa):
    assert theorem1_bound(n, m, kappa) == DIMENSIONS[(n, m, kappa)]


def test_theorem1_bound_domain():
    with pytest.raises(DomainError):
        theorem1_bound(1, 1, 1)
    with pytest.raises(DomainError):
        theorem1_bound(0, 1, 3)


def _check_dimension(n, m, kappa):
    spec = homogeneous_system(n, m, kappa)
    report = solve_system(spec)
    assert report.dimension == DIMENSIONS[(n, m, kappa)]
    assert report.stabilized
    assert report.verified
    assert span_rank(report.generators) == report.dimension


@pytest.mark.parametrize("n, m, kappa", QUICK)
def test_homogeneous_dimensions(n, m, kappa):
    _check_dimension(n, m, kappa)


@pytest.mark.slow
@pytest.mark.parametrize("n, m, kappa", SLOW)
def test_homogeneous_dimensions_larger(n, m, kappa):
    _check_dimension(n, m, kappa)


def test_low_degree_ansatz_misses_projective_fields(free_particle):
    system = determining_system(free_particle)
    assert ansatz_solve(system, 1).dimension == 6
    assert not stabilization_check(system, 1)
    assert stabilization_check(system, 2)


def test_ansatz_rejects_negative_degree(free_particle):
    with pytest.raises(DomainError):
        ansatz_solve(determining_system(free_particle), -1)


def test_generators_satisfy_the_criterion(free_particle):
    report = solve_system(free_particle, check_stability=False)
    assert report.stabilized is None
    assert all(verify_field(free_particle, X) for X in report.generators)


def test_generator_coefficients_layout(free_particle):
    report = solve_system(free_particle, check_stability=False)
    table = generator_coefficients(report.generators[0])
    assert set(table) == {"Q1", "R1"}
    for rows in table.values():
        for exponents, coefficient in rows:
            assert len(exponents.split(",")) == 2
            assert coefficient


def test_report_to_dict(free_particle):
    data = solve_system(free_particle).to_dict()
    assert data["dimension"] == 8
    assert data["ansatz_degree"] == 2
    assert len(data["generators"]) == 8
    assert data["rows"] > 0
    assert data["independent"] is True
    assert "processing_time" not in data


def test_dependent_generators_fail_the_solve(free_particle, monkeypatch):
    monkeypatch.setattr(solve_module, "span_rank", lambda generators: len(generators) - 1)
    report = solve_system(free_particle, check_stability=False)
    assert report.independent is False
    assert report.to_dict()["independent"] is False
    result = run(JobSpec("solve", free_particle))
    assert not result.ok


# ============================================================================
# Solution shapes
# ============================================================================


@pytest.mark.parametrize(
    "n, m, kappa, shape",
    [
        (1, 1, 3, "scalar-ode"),
        (1, 1, 4, "scalar-ode"),
        pytest.param(1, 1, 5, "scalar-ode", marks=pytest.mark.slow),
        pytest.param(2, 1, 2, "projective", marks=pytest.mark.slow),
        pytest.param(1, 2, 2, "projective", marks=pytest.mark.slow),
        pytest.param(2, 1, 3, "weighted", marks=pytest.mark.slow),
        pytest.param(1, 2, 3, "weighted", marks=pytest.mark.slow),
    ],
)
def test_solution_shapes(n, m, kappa, shape):
    report = solve_system(homogeneous_system(n, m, kappa), check_stability=False)
    match = match_solution_shape(report, shape)
    assert match, match.detail


def test_projective_shape_for_the_free_particle(free_particle):
    report = solve_system(free_particle, check_stability=False)
    assert match_solution_shape(report, "projective")


def test_shape_mismatch_names_a_field():
    report = solve_system(homogeneous_system(1, 1, 3), degree=1, check_stability=False)
    match = match_solution_shape(report, "scalar-ode")
    assert not match
    assert "not in the solution span" in match.detail


def test_shape_domain_errors(free_particle):
    report = solve_system(free_particle, check_stability=False)
    with pytest.raises(DomainError):
        match_solution_shape(report, "scalar-ode")
    with pytest.raises(DomainError):
        match_solution_shape(report, "weighted")
    with pytest.raises(DomainError):
        match_solution_shape(report, "conformal")
