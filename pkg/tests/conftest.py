"""Pytest configuration and shared fixtures.

Provides a seeded generator and the standard steering instances. Random
matrix factories live in tests/factories.py.
"""

import os

# Set test environment variables BEFORE any module imports
os.environ["ENVIRONMENT"] = "test"
os.environ.setdefault("LOG_LEVEL", "WARNING")

import numpy as np
import pytest

from src.models.params import CostParams
from src.models.problem import ProblemInstance


@pytest.fixture
def rng():
    """Seeded numpy Generator.

    Returns:
        Generator with a fixed seed so random instances are reproducible
    """
    return np.random.default_rng(20240611)


@pytest.fixture
def commuting_instance():
    """Diagonal instance diag(2, 0.5) -> diag(0.5, 2) with theta = 1.

    Returns:
        ProblemInstance whose optimal control is diag(-ln 2, ln 2)
    """
    return ProblemInstance(
        sigma0=np.diag([2.0, 0.5]),
        sigma1=np.diag([0.5, 2.0]),
        params=CostParams(theta=1.0),
    )


@pytest.fixture
def identity_instance():
    """Instance with sigma0 = sigma1 = I_2 and theta = 5.

    Returns:
        ProblemInstance solved by the zero control
    """
    return ProblemInstance(sigma0=np.eye(2), sigma1=np.eye(2), params=CostParams(theta=5.0))


@pytest.fixture
def planar_instance():
    """Non-commuting planar instance with det = 1.75 and theta = 5.

    Returns:
        ProblemInstance matching data/example_planar.json
    """
    return ProblemInstance(
        sigma0=[[2.0, 0.5], [0.5, 1.0]],
        sigma1=[[1.0, -0.3], [-0.3, 1.84]],
        params=CostParams(theta=5.0),
    )


@pytest.fixture
def problem_payload():
    """Problem file content for the commuting instance.

    Returns:
        Dict in the solve/baseline input format
    """
    return {
        "theta": 1.0,
        "sigma0": [[2.0, 0.0], [0.0, 0.5]],
        "sigma1": [[0.5, 0.0], [0.0, 2.0]],
        "steps": 200,
    }


def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line("markers", "integration: marks tests as integration tests")
    config.addinivalue_line("markers", "unit: marks tests as unit tests")


def pytest_collection_modifyitems(config, items):
    """Automatically mark tests based on their location."""
    for item in items:
        # CLI round trips touch the filesystem and run full solves
        if "test_cli" in item.nodeid:
            item.add_marker(pytest.mark.integration)
        else:
            item.add_marker(pytest.mark.unit)
