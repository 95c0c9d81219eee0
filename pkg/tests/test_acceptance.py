"""Long runs: cube classification accuracy and single-pass versus iterative decimation timing."""
import time

import numpy as np
import pytest

from meshkit.decimation.iterative_qem import IterativeQEMDecimator
from meshkit.decimation.single_pass import QuadricDecimator
from meshkit.network.config import NetworkConfig, TrainConfig
from meshkit.network.model import build_model
from meshkit.network.train import evaluate, make_samples, train
from meshkit.preprocess.synthetic import random_grid_mesh, synth_engraved_cubes


@pytest.mark.slow
def test_engraved_cube_classification(tests_config):
    cubes = tests_config["cubes"]
    n_classes = cubes.as_int("classes")
    n_train, n_test = cubes.as_int("train_per_class"), cubes.as_int("test_per_class")
    seed = cubes.as_int("seed")
    dataset = synth_engraved_cubes(n_classes, n_train + n_test, seed)
    per_class = n_train + n_test
    train_set = [item for k, item in enumerate(dataset) if k % per_class < n_train]
    test_set = [item for k, item in enumerate(dataset) if k % per_class >= n_train]

    config = TrainConfig(epochs=cubes.as_int("epochs"), batch_size=cubes.as_int("batch_size"), seed=seed)
    model = build_model(NetworkConfig(n_classes=n_classes), np.random.default_rng(seed))
    train(model, make_samples(train_set), config)
    metrics = evaluate(model, make_samples(test_set), config.batch_size)
    assert metrics["accuracy"] >= cubes.as_float("min_accuracy")


@pytest.mark.slow
@pytest.mark.parametrize("index", [0, 1])
def test_single_pass_beats_iterative(tests_config, index):
    size = int(tests_config["bench"].as_list("sizes")[index])
    mesh = random_grid_mesh(size, np.random.default_rng(index))
    target = mesh.n_vertices // 2

    start = time.perf_counter()
    QuadricDecimator().decimate(mesh, target_vertices=target)
    single_pass = time.perf_counter() - start
    start = time.perf_counter()
    IterativeQEMDecimator().decimate(mesh, target_vertices=target)
    iterative = time.perf_counter() - start

    assert single_pass < iterative


def best_time(fn, repeats=3):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


@pytest.mark.slow
def test_single_pass_scales_near_linearly(tests_config):
    small, large = (int(s) for s in tests_config["bench"].as_list("sizes"))
    timings = []
    for size in (small, large):
        mesh = random_grid_mesh(size, np.random.default_rng(size))
        target = mesh.n_vertices // 2
        timings.append(best_time(lambda: QuadricDecimator().decimate(mesh, target_vertices=target)))
    assert large == 2 * small
    assert timings[1] / timings[0] < 2.5
