import pytest

from lensflow import SolitonParams, build_profile

# default test matrix of (n, k) pairs
MATRIX = [(2, 1), (3, 1), (3, 2), (4, 2), (5, 3)]


@pytest.fixture(scope="session")
def profiles():
    return {(n, k): build_profile(SolitonParams(n=n, k=k)) for n, k in MATRIX}


@pytest.fixture(scope="session")
def profile21(profiles):
    return profiles[(2, 1)]
