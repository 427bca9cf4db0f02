"""Recursive prolongation against the hard-coded closed forms."""

import pytest

from jetlie.closed_forms import (
    CORRECTIONS,
    closed_form_check,
    formula_order,
    general_groups,
    validate_group,
)
from jetlie.errors import DomainError


@pytest.mark.parametrize("formula", ["R1", "R2", "R3", "R4"])
def test_scalar_formulas(formula):
    report = closed_form_check(1, 1, formula)
    assert report.matches, report.differences[:5]
    assert report.checked == 1
    assert report.kappa == int(formula[-1])


@pytest.mark.parametrize(
    "kappa", [3, 4, 5, pytest.param(6, marks=pytest.mark.slow)]
)
def test_scalar_partial_formula(kappa):
    report = closed_form_check(1, 1, "partial", kappa)
    assert report.matches, report.differences[:5]


@pytest.mark.parametrize("n, m", [(2, 1), (1, 2), (2, 2)])
@pytest.mark.parametrize("formula", ["general_R1", "general_R2", "general_R3"])
def test_general_formulas(n, m, formula):
    report = closed_form_check(n, m, formula)
    assert report.matches, report.differences[:5]
    assert report.checked > 0


@pytest.mark.parametrize("n, m", [(2, 1), (1, 2), (2, 2)])
@pytest.mark.parametrize("kappa", [3, pytest.param(4, marks=pytest.mark.slow)])
def test_general_partial_formula(n, m, kappa):
    report = closed_form_check(n, m, "general_partial", kappa)
    assert report.matches, report.differences[:5]
    assert report.corrections == [
        CORRECTIONS["u1_top_rotations"],
        CORRECTIONS["u1_top_last_term"],
    ]


def test_exhaustive_index_tuples_agree():
    report = closed_form_check(2, 1, "general_R2", exhaustive=True)
    assert report.matches
    assert report.checked == 4


def test_literal_third_order_formula_differs_for_two_components():
    corrected = closed_form_check(1, 2, "general_R3")
    literal = closed_form_check(1, 2, "general_R3", mode="literal")
    assert corrected.corrections == [CORRECTIONS["u1u1u2_delta_i1"]]
    assert literal.corrections == []
    assert not literal.matches
    assert {d["coefficient"] for d in literal.differences}


def test_groups_are_valid():
    for order in (1, 2, 3):
        for group in general_groups(order):
            validate_group(group, order)


def test_report_to_dict():
    data = closed_form_check(1, 1, "R2").to_dict()
    assert data["status"] == "match"
    assert data["checked_coefficients"] == 1
    assert data["differences"] == []


@pytest.mark.parametrize(
    "args",
    [
        (1, 1, "R5", None),
        (2, 1, "R2", None),
        (1, 1, "partial", None),
        (1, 1, "partial", 2),
    ],
)
def test_closed_form_domain_errors(args):
    with pytest.raises(DomainError):
        closed_form_check(*args)


def test_formula_order():
    assert formula_order("general_R3", None) == 3
    assert formula_order("partial", 5) == 5
