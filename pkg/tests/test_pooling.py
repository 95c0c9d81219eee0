import numpy as np
import pytest

from meshkit.conv.context import backward
from meshkit.errors import ArgumentError, StateError
from meshkit.mesh.clustering import ClusterMap
from meshkit.pooling import PoolContext, pool, pool_backward, pool_forward, unpool, unpool_backward, unpool_forward
from tests.conftest import numeric_gradient, relative_error

# vertices a..g clustered as {a, b, g}, {c, d}, {e, f}
WORKED_MAP = ClusterMap.from_labels([0, 0, 2, 2, 4, 4, 0])


def random_cluster_map(rng, n):
    return ClusterMap.from_labels(rng.integers(0, max(1, n // 2), size=n))


def test_worked_example_max_pool(rng):
    features = rng.normal(size=(7, 4))
    pooled, context = pool(features, WORKED_MAP, "max")
    np.testing.assert_array_equal(pooled[0], np.max(features[[0, 1, 6]], axis=0))
    np.testing.assert_array_equal(pooled[1], np.max(features[[2, 3]], axis=0))
    for row, members in zip(context.argmax, WORKED_MAP.members()):
        assert set(row.tolist()) <= set(members.tolist())


def test_worked_example_unpool(rng):
    pooled = rng.normal(size=(3, 2))
    restored = unpool(pooled, WORKED_MAP)
    for vertex in (0, 1, 6):
        np.testing.assert_array_equal(restored[vertex], pooled[0])


@pytest.mark.parametrize("mode", ["max", "avg"])
def test_singletons_are_identity(rng, mode):
    features = rng.normal(size=(5, 3))
    cmap = ClusterMap.identity(5)
    pooled, context = pool(features, cmap, mode)
    np.testing.assert_array_equal(pooled, features)
    upstream = rng.normal(size=(5, 3))
    np.testing.assert_array_equal(pool_backward(context, upstream), upstream)
    np.testing.assert_array_equal(unpool(features, cmap), features)
    np.testing.assert_array_equal(unpool_backward(cmap, upstream), upstream)


def test_avg_pool_matches_group_by(rng):
    features = rng.normal(size=(40, 3))
    cmap = random_cluster_map(rng, 40)
    pooled, _ = pool(features, cmap, "avg")
    for cluster, members in enumerate(cmap.members()):
        np.testing.assert_allclose(pooled[cluster], features[members].mean(axis=0), rtol=0, atol=1e-12)


def test_avg_backward_splits_evenly():
    cmap = ClusterMap.from_labels([0, 0, 0, 1])
    _, context = pool(np.zeros((4, 1)), cmap, "avg")
    np.testing.assert_allclose(pool_backward(context, np.array([[3.0], [5.0]]))[:, 0], [1.0, 1.0, 1.0, 5.0])


def test_max_ties_route_to_lowest_row():
    cmap = ClusterMap.from_labels([0, 0, 0])
    _, context = pool(np.array([[1.0], [2.0], [2.0]]), cmap, "max")
    np.testing.assert_array_equal(pool_backward(context, np.array([[1.0]]))[:, 0], [0.0, 1.0, 0.0])


def test_unpool_backward_sums_members():
    np.testing.assert_array_equal(unpool_backward(WORKED_MAP, np.ones((7, 1)))[:, 0], [3.0, 2.0, 2.0])


def test_unpool_of_avg_is_idempotent_and_bounded(rng, tests_config):
    for _ in range(tests_config["pooling"].as_int("cluster_maps")):
        n = int(rng.integers(1, 30))
        cmap = random_cluster_map(rng, n)
        features = rng.normal(size=(n, 2))
        project = lambda x: unpool(pool(x, cmap, "avg")[0], cmap)
        once = project(features)
        np.testing.assert_allclose(project(once), once, rtol=0, atol=1e-12)
        assert np.all(pool(features, cmap, "max")[0] >= pool(features, cmap, "avg")[0] - 1e-12)


def test_adjoint_identities(rng, tests_config):
    for _ in range(tests_config["pooling"].as_int("cluster_maps")):
        n = int(rng.integers(1, 30))
        cmap = random_cluster_map(rng, n)
        x = rng.normal(size=(n, 2))
        y = rng.normal(size=(cmap.n_out, 2))
        pooled, context = pool(x, cmap, "avg")
        assert np.sum(pooled * y) == pytest.approx(np.sum(x * pool_backward(context, y)), abs=1e-10)
        assert np.sum(unpool(y, cmap) * x) == pytest.approx(np.sum(y * unpool_backward(cmap, x)), abs=1e-10)


@pytest.mark.parametrize("mode", ["max", "avg"])
def test_pool_finite_differences(rng, mode):
    cmap = random_cluster_map(rng, 12)
    features = rng.normal(size=(12, 3))
    weights = rng.normal(size=(cmap.n_out, 3))
    pooled, ctx = pool_forward(features, cmap, mode)
    analytic = backward(ctx, weights)["features"]
    numeric = numeric_gradient(lambda: float(np.sum(pool(features, cmap, mode)[0] * weights)), features)
    assert relative_error(analytic, numeric) < 1e-6


def test_unpool_finite_differences(rng):
    cmap = random_cluster_map(rng, 12)
    features = rng.normal(size=(cmap.n_out, 3))
    weights = rng.normal(size=(12, 3))
    _, ctx = unpool_forward(features, cmap)
    numeric = numeric_gradient(lambda: float(np.sum(unpool(features, cmap) * weights)), features)
    assert relative_error(backward(ctx, weights)["features"], numeric) < 1e-6


def test_row_mismatch(rng):
    with pytest.raises(ArgumentError):
        pool(rng.normal(size=(6, 2)), WORKED_MAP)
    with pytest.raises(ArgumentError):
        unpool(rng.normal(size=(4, 2)), WORKED_MAP)
    with pytest.raises(ArgumentError):
        pool(rng.normal(size=(7, 2)), WORKED_MAP, "sum")


def test_stale_context(rng):
    _, context = pool(rng.normal(size=(7, 2)), WORKED_MAP)
    with pytest.raises(StateError):
        pool_backward(context, np.zeros((7, 2)))
    with pytest.raises(StateError):
        pool_backward(None, np.zeros((3, 2)))
    assert isinstance(context, PoolContext)
