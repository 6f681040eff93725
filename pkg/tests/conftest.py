import numpy as np
import pytest

from hypdecomp.fixtures import fixture_path
from hypdecomp.io_cli import load_spec, run


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20250810)


def _load(name):
    return load_spec(fixture_path(name))


@pytest.fixture(scope="session")
def spec_3ps():
    return _load("thrice_punctured_sphere")


@pytest.fixture(scope="session")
def spec_torus():
    return _load("once_punctured_torus")


@pytest.fixture(scope="session")
def spec_fig3():
    return _load("figure3_surface")


@pytest.fixture(scope="session")
def spec_fig8():
    return _load("figure_eight_knot")


@pytest.fixture(scope="session")
def report_3ps(spec_3ps):
    return run(spec_3ps)


@pytest.fixture(scope="session")
def report_torus(spec_torus):
    return run(spec_torus)


@pytest.fixture(scope="session")
def report_fig3(spec_fig3):
    return run(spec_fig3)


@pytest.fixture(scope="session")
def report_fig8(spec_fig8):
    return run(spec_fig8)


@pytest.fixture(scope="session")
def all_reports(report_3ps, report_torus, report_fig3, report_fig8):
    return {
        "thrice_punctured_sphere": report_3ps,
        "once_punctured_torus": report_torus,
        "figure3_surface": report_fig3,
        "figure_eight_knot": report_fig8,
    }


def random_lightlike(rng, n, height_range=(0.5, 4.0)):
    """Future lightlike vector with a random direction."""
    v = rng.normal(size=n)
    v /= np.linalg.norm(v)
    h = rng.uniform(*height_range)
    return np.concatenate(([h], h * v))


def random_hyperboloid(rng, n, radius=2.0):
    """Point of V+ within the given hyperbolic distance of the apex."""
    v = rng.normal(size=n)
    v /= np.linalg.norm(v)
    t = rng.uniform(0.0, radius)
    return np.concatenate(([np.cosh(t)], np.sinh(t) * v))


def random_boost(rng, n):
    """Random element of SO+(n,1): a boost conjugated by a rotation."""
    t = rng.uniform(-1.5, 1.5)
    B = np.eye(n + 1)
    B[0, 0] = B[1, 1] = np.cosh(t)
    B[0, 1] = B[1, 0] = np.sinh(t)
    Q = _random_rotation(rng, n)
    return Q @ B @ Q.T


def _random_rotation(rng, n):
    A = rng.normal(size=(n, n))
    Q, r = np.linalg.qr(A)
    Q = Q @ np.diag(np.sign(np.diag(r)))
    full = np.eye(n + 1)
    full[1:, 1:] = Q
    return full
