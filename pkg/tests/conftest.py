import numpy as np
import pytest

from killing_transport.manifold import flat_torus, half_plane, perturbed_flat, plane, polar_plane, sphere, torus


@pytest.fixture(scope="session")
def unit_sphere():
    return sphere()


@pytest.fixture(scope="session")
def torus21():
    return torus(2.0, 1.0)


@pytest.fixture(scope="session")
def flat_plane():
    return plane()


@pytest.fixture(scope="session")
def polar():
    return polar_plane()


@pytest.fixture(scope="session")
def hyperbolic():
    return half_plane()


@pytest.fixture(scope="session")
def square_torus():
    return flat_torus()


@pytest.fixture(scope="session")
def bumpy():
    return perturbed_flat()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for text in RESULTS.values():
            terminalreporter.write_line(text)
