import os
import sys

import numpy as np
import pytest
from configobj import ConfigObj

# Add the package sources to the PYTHONPATH
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "src")))

from meshkit.mesh.core import TriMesh
from meshkit.preprocess.synthetic import grid_mesh, icosphere

CONFIG_PATH = os.path.join(os.path.dirname(__file__), "meshkit_tests_config.ini")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance runs")


@pytest.fixture(scope="session")
def tests_config():
    return ConfigObj(CONFIG_PATH, file_error=True)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def sphere():
    return icosphere(3)


@pytest.fixture(scope="session")
def small_sphere():
    return icosphere(1)


@pytest.fixture
def plane():
    return grid_mesh(6, 6)


@pytest.fixture
def triangle():
    return TriMesh([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], [[0, 1, 2]])


def random_mesh(rng, n_vertices=30, n_facets=50):
    """Random triangle soup over distinct vertex triples."""
    vertices = rng.normal(size=(n_vertices, 3))
    facets = np.array([rng.choice(n_vertices, size=3, replace=False) for _ in range(n_facets)])
    return TriMesh(vertices, facets)


def jitter(mesh, rng, scale=0.05):
    return TriMesh(mesh.vertices + scale * rng.normal(size=mesh.vertices.shape), mesh.facets)


def numeric_gradient(loss, x, step=1e-5):
    """Central differences of the scalar loss() with respect to every entry of x, perturbed in place."""
    grad = np.zeros_like(x)
    flat, out = x.reshape(-1), grad.reshape(-1)
    for k in range(flat.size):
        saved = flat[k]
        flat[k] = saved + step
        upper = loss()
        flat[k] = saved - step
        lower = loss()
        flat[k] = saved
        out[k] = (upper - lower) / (2.0 * step)
    return grad


def relative_error(analytic, numeric):
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-30)
    return np.linalg.norm(analytic - numeric) / scale
