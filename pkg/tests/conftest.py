"""Shared fixtures: small jet spaces, the bundled example manifolds and a quiet logger."""

import logging

import pytest

from jetlie.jet import JetSpace
from jetlie.manifold import (
    degenerate_plane_manifold,
    line_manifold,
    polynomial_ode_manifold,
    split_manifold,
)
from jetlie.system import homogeneous_system


@pytest.fixture(autouse=True)
def quiet_logging():
    logging.getLogger("jetlie").setLevel(logging.WARNING)
    yield


@pytest.fixture
def scalar_space():
    return JetSpace(1, 1)


@pytest.fixture
def plane_space():
    return JetSpace(2, 1)


@pytest.fixture
def pair_space():
    return JetSpace(1, 2)


@pytest.fixture
def line():
    return line_manifold()


@pytest.fixture
def degenerate_plane():
    return degenerate_plane_manifold()


@pytest.fixture
def split():
    return split_manifold()


@pytest.fixture
def cubic_ode_manifold():
    return polynomial_ode_manifold(3)


@pytest.fixture
def free_particle():
    """u_xx = 0"""
    return homogeneous_system(1, 1, 2)
