"""Shared fixtures: the frozen two-eigenvalue reference problem."""

from __future__ import annotations

import numpy as np
import pytest

from gradeig.problem import HermitianPencil, solve_pencil


@pytest.fixture(scope="session")
def pair_pencil():
    """Diagonal pencil with eigenvalues (2, 1) and A = I."""
    return HermitianPencil(np.diag([2.0, 1.0]), np.eye(2))


@pytest.fixture(scope="session")
def pair_data(pair_pencil):
    return solve_pencil(pair_pencil)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260822)
