import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gfflab.basis import build_hermite_basis, build_interval_basis
from gfflab.fields import RngStream

settings.register_profile(
    "ci",
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def dirichlet16():
    return build_interval_basis("dirichlet", 0.0, 1.0, 16)


@pytest.fixture(scope="session")
def dirichlet64():
    return build_interval_basis("dirichlet", 0.0, 1.0, 64)


@pytest.fixture(scope="session")
def hermite16():
    return build_hermite_basis(1, 16)


@pytest.fixture()
def rng():
    return RngStream(2026, 0).generator()


@pytest.fixture()
def stream():
    return RngStream(2026, 0)


def assert_close(actual, expected, rel=1e-12, abs_tol=0.0, label=""):
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    tol = rel * np.maximum(np.abs(expected), 1.0e-300) + abs_tol
    if not np.all(np.abs(actual - expected) <= tol):
        worst = float(np.max(np.abs(actual - expected)))
        raise AssertionError(
            f"{label or 'values'} differ: worst |diff| = {worst:.3e}, "
            f"actual={actual!r}, expected={expected!r}"
        )
