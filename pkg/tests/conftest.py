import pytest

from scwave import named_ensemble


@pytest.fixture(scope="session")
def reg36():
    return named_ensemble("reg-3-6")


@pytest.fixture(scope="session")
def five_fp():
    return named_ensemble("irr-five-fp")
