import pytest

from slitfano.asymptotics import default_alpha
from slitfano.greens import PhysicalConfig


@pytest.fixture(scope="session")
def cfg():
    return PhysicalConfig(d=1.0, d0=0.4, eps=0.05)


@pytest.fixture(scope="session")
def alpha():
    return default_alpha()
