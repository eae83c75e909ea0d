"""Session-wide fixtures shared by the tower-dependent test modules."""

import pytest

from artifact.padic import PrimeContext
from artifact.tower import build_level


@pytest.fixture(scope="session")
def ctx3():
    return PrimeContext(3, 12)


@pytest.fixture(scope="session")
def tower0(ctx3):
    return build_level(ctx3, 0)


@pytest.fixture(scope="session")
def tower1(ctx3):
    return build_level(ctx3, 1)
