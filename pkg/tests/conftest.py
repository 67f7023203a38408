import pytest

from nttforge.ring import derive_params, preset
from nttforge.rtl import generate_design


@pytest.fixture(scope="session")
def toy():
    return derive_params(17, 8)


@pytest.fixture(scope="session")
def toy_ir(toy):
    return generate_design(toy)


@pytest.fixture(scope="session")
def kyber():
    return preset("kyber")


@pytest.fixture(scope="session")
def dilithium():
    return preset("dilithium")


@pytest.fixture(scope="session")
def kyber_ir(kyber):
    return generate_design(kyber)


@pytest.fixture(scope="session")
def dilithium_ir(dilithium):
    return generate_design(dilithium)
