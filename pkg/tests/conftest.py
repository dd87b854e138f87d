import numpy as np
import pytest

from teleoplab import geometry


@pytest.fixture(scope="session")
def canonical_route():
    return geometry.build_route(geometry.canonical_route_spec())


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)
