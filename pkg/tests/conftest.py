import pytest

from contactstab import ContactConfig, fixture_config


@pytest.fixture(scope="session")
def example1():
    return fixture_config("example1.cfg")


@pytest.fixture(scope="session")
def example2():
    return fixture_config("example2.cfg")


@pytest.fixture(scope="session")
def example3():
    return fixture_config("example3.cfg")


@pytest.fixture(scope="session")
def example4():
    return fixture_config("example4.cfg")


@pytest.fixture(scope="session")
def flat_block():
    # symmetric block on flat ground, gravity through the midpoint
    return ContactConfig(l1=-1.0, l2=1.0, h=0.8, phi1=0.0, phi2=0.0,
                         mu1=0.5, mu2=0.5, alpha=0.0)
