"""Truncated power series: inverses, composition and reversion."""

import pytest
from sympy.polys.domains import QQ

from jetlie.algebra import poly_ring
from jetlie.errors import DomainError
from jetlie.series import (
    SeriesMap,
    jacobian_at,
    linear_part,
    rename,
    reversion,
    series_compose,
    series_inverse,
    series_mul,
)


@pytest.fixture
def ring():
    return poly_ring(("s", "t"))


def test_geometric_inverse(ring):
    s, t = ring.gens
    inverse = series_inverse(1 - s, 4)
    assert inverse == 1 + s + s**2 + s**3 + s**4
    assert series_mul(inverse, 1 - s, 4) == ring.one


def test_inverse_scales_the_constant(ring):
    s, _ = ring.gens
    assert series_inverse(2 + 2 * s, 2) == QQ(1, 2) - QQ(1, 2) * s + QQ(1, 2) * s**2
    with pytest.raises(DomainError):
        series_inverse(s, 3)


def test_reversion_of_a_scalar_series(ring):
    s, t = ring.gens
    inverse = reversion([s + s**2, t], 4)
    assert inverse[0] == s - s**2 + 2 * s**3 - 5 * s**4
    assert inverse[1] == t
    composed = series_compose(s + s**2, inverse, ring, 4)
    assert composed == s


def test_reversion_needs_an_invertible_linear_part(ring):
    s, t = ring.gens
    with pytest.raises(DomainError):
        reversion([s + t, s + t], 3)
    with pytest.raises(DomainError):
        reversion([s + 1, t], 3)


def test_linear_part_and_jacobian(ring):
    s, t = ring.gens
    outputs = [s + 2 * t + s * t, t**2]
    assert linear_part(outputs) == [[QQ(1), QQ(2)], [QQ(0), QQ(0)]]
    assert jacobian_at(outputs, [QQ(1), QQ(3)]) == [[QQ(4), QQ(3)], [QQ(0), QQ(6)]]


def test_rename_drops_unmapped_variables(ring):
    s, t = ring.gens
    target = poly_ring(("a",))
    assert rename(s * t + s, target, ["a", None]) == target.gens[0]


def test_series_map_truncates_and_composes(ring):
    s, t = ring.gens
    outer = SeriesMap(("s", "t"), (s + s**3, t), 2)
    assert outer.outputs == (s, t)
    inner = SeriesMap(("s", "t"), (s + t, t), 3)
    composed = outer.compose(inner)
    assert composed.truncation == 2
    assert composed.outputs == (s + t, t)
    assert composed.evaluate([1, 2]) == [QQ(3), QQ(2)]


def test_series_map_validation(ring):
    other = poly_ring(("a",))
    with pytest.raises(DomainError):
        SeriesMap(("s", "t"), (other.gens[0],), 2)
    with pytest.raises(DomainError):
        SeriesMap(("s", "t"), (ring.gens[0],), -1)
