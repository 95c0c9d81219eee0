import numpy as np
import pytest

from meshkit.decimation.hierarchy import build_hierarchy, decimate, make_decimator, stride_targets
from meshkit.decimation.iterative_qem import IterativeQEMDecimator
from meshkit.decimation.quadric import contract_clusters, contraction_cost, quadric_error, vertex_quadrics
from meshkit.decimation.single_pass import PairList, QuadricDecimator, cluster_vertices, sorted_pairs
from meshkit.errors import ArgumentError
from meshkit.mesh.clustering import ClusterMap
from meshkit.mesh.core import TriMesh, compute_normals_areas
from meshkit.preprocess.synthetic import icosphere
from tests.conftest import jitter, random_mesh

A, B, C, D, E, F, G = range(7)


def pair_list(pairs):
    pairs = np.asarray(pairs, dtype=np.int64)
    return PairList(pairs[:, 0], pairs[:, 1], np.arange(len(pairs), dtype=np.float64))


def test_worked_example_clusters():
    # cheapest pairs (c,d), (a,g), (e,f); (a,b) is the cheapest pair holding b
    pairs = pair_list([(C, D), (A, G), (E, F), (A, B), (B, C), (B, E), (D, E)])
    cmap, removed = cluster_vertices(pairs, n_remove=10, n_vertices=7)
    groups = sorted(sorted(m.tolist()) for m in cmap.members())
    assert groups == [[A, B, G], [C, D], [E, F]]
    assert removed == 4
    cmap.check()


def test_worked_example_contraction():
    vertices = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0], [0, 1, 0], [1, 1, 0], [2, 1, 0]], dtype=float)
    cmap = ClusterMap.from_labels([0, 0, 2, 2, 4, 4, 0])
    mesh = TriMesh(vertices, [[A, B, G], [A, C, E], [B, D, F], [G, E, C]])
    contracted = contract_clusters(mesh, cmap)
    np.testing.assert_allclose(contracted.vertices, [vertices[[A, B, G]].mean(0), vertices[[C, D]].mean(0), vertices[[E, F]].mean(0)])
    # the first facet collapses, the other three become one
    np.testing.assert_array_equal(contracted.facets, [[0, 1, 2]])


def test_no_removal_is_identity():
    pairs = pair_list([(0, 1), (1, 2)])
    cmap, removed = cluster_vertices(pairs, 0, 3)
    assert removed == 0
    np.testing.assert_array_equal(cmap.iomap, [0, 1, 2])


def test_path_graph_single_removal():
    pairs = PairList(np.array([0, 1]), np.array([1, 2]), np.zeros(2))
    cmap, removed = cluster_vertices(pairs, 1, 3)
    assert removed == 1
    np.testing.assert_array_equal(cmap.iomap, [0, 0, 1])


def test_infeasible_removals_are_reported():
    pairs = pair_list([(0, 1)])
    cmap, removed = cluster_vertices(pairs, 5, 4)
    assert removed == 1
    assert cmap.n_out == 3


def test_isolated_vertex_has_zero_quadric(triangle):
    mesh = TriMesh(np.vstack([triangle.vertices, [[5.0, 5.0, 5.0]]]), triangle.facets)
    assert np.all(vertex_quadrics(mesh)[3] == 0.0)


def test_quadric_is_area_weighted_plane_distance(rng):
    mesh = random_mesh(rng, 15, 40)
    quadrics = vertex_quadrics(mesh)
    frame = compute_normals_areas(mesh)
    for vertex in range(mesh.n_vertices):
        point = rng.normal(size=3)
        incident = np.flatnonzero((mesh.facets == vertex).any(axis=1))
        offsets = point - mesh.vertices[mesh.facets[incident, 0]]
        expected = np.sum(frame.areas[incident] * np.einsum("ij,ij->i", offsets, frame.normals[incident]) ** 2)
        assert quadric_error(quadrics[vertex], point) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_in_plane_moves_cost_nothing(plane):
    quadrics = vertex_quadrics(plane)
    inside = quadric_error(quadrics[10], plane.vertices[10] + [0.3, -0.2, 0.0])
    assert abs(inside) < 1e-10


def test_sorted_pairs_single_edge():
    mesh = TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 1]])
    pairs = sorted_pairs(mesh, vertex_quadrics(mesh))
    assert len(pairs) == 1
    assert (pairs.first[0], pairs.second[0]) == (0, 1)


def test_sorted_pairs_flat_ties_use_indices(plane):
    pairs = sorted_pairs(plane, vertex_quadrics(plane))
    assert np.all(pairs.cost == 0.0)
    np.testing.assert_array_equal(np.stack([pairs.first, pairs.second], axis=1), plane.edges())


def test_sorted_pairs_against_brute_force(rng):
    mesh = random_mesh(rng, 20, 40)
    quadrics = vertex_quadrics(mesh)
    pairs = sorted_pairs(mesh, quadrics)
    got = {(int(i), int(j)) for i, j in zip(pairs.first, pairs.second)}
    assert got == {tuple(e) for e in mesh.edges().tolist()}
    for i, j, cost in zip(pairs.first, pairs.second, pairs.cost):
        v = np.append(0.5 * (mesh.vertices[i] + mesh.vertices[j]), 1.0)
        assert cost == pytest.approx(v @ (quadrics[i] + quadrics[j]) @ v, rel=1e-12, abs=1e-12)
    assert np.all(np.diff(pairs.cost) >= 0)


def test_target_equal_to_input_is_identity(small_sphere):
    result = decimate(small_sphere, target_vertices=small_sphere.n_vertices)
    assert result.removed_count == 0
    np.testing.assert_array_equal(result.cluster_map.iomap, np.arange(small_sphere.n_vertices))
    np.testing.assert_array_equal(result.mesh.facets, small_sphere.facets)


def test_target_above_input_warns_and_keeps_mesh(small_sphere, caplog):
    result = decimate(small_sphere, target_vertices=small_sphere.n_vertices + 5)
    assert result.mesh.n_vertices == small_sphere.n_vertices
    assert "exceeds" in caplog.text


@pytest.mark.parametrize("kwargs", [dict(), dict(target_vertices=3, n_remove=2), dict(target_vertices=0), dict(n_remove=-1)])
def test_decimate_rejects_bad_targets(small_sphere, kwargs):
    with pytest.raises(ArgumentError):
        decimate(small_sphere, **kwargs)


def test_icosphere_halves(sphere):
    assert sphere.n_vertices == 642
    result = QuadricDecimator(1).decimate(sphere, target_vertices=321)
    assert 321 <= result.mesh.n_vertices <= 331
    assert result.removed_count == 642 - result.mesh.n_vertices


def test_fuzz_clusters_disjoint_and_covering(tests_config):
    rng = np.random.default_rng(7)
    for _ in range(tests_config["decimation"].as_int("fuzz_meshes")):
        mesh = random_mesh(rng, int(rng.integers(8, 40)), int(rng.integers(4, 60)))
        n_remove = int(rng.integers(0, mesh.n_vertices))
        result = QuadricDecimator(1).decimate(mesh, n_remove=n_remove)
        cmap = result.cluster_map
        cmap.check()
        assert cmap.n_in == mesh.n_vertices
        assert np.array_equal(np.sort(np.concatenate(cmap.members())), np.arange(mesh.n_vertices))
        assert result.removed_count == mesh.n_vertices - result.mesh.n_vertices == mesh.n_vertices - cmap.n_out
        assert result.removed_count <= n_remove


def test_flat_plane_costs_nothing(plane):
    result = decimate(plane, target_vertices=plane.n_vertices // 2, max_iters=3)
    assert result.cost < 1e-8
    np.testing.assert_allclose(result.mesh.vertices[:, 2], 0.0)


def test_greedy_beats_random_order(tests_config):
    rng = np.random.default_rng(11)
    trials = tests_config["decimation"].as_int("fuzz_meshes")
    wins = compared = 0
    for _ in range(trials):
        mesh = jitter(icosphere(1), rng, 0.08)
        quadrics = vertex_quadrics(mesh)
        pairs = sorted_pairs(mesh, quadrics)
        greedy, removed = cluster_vertices(pairs, mesh.n_vertices // 2, mesh.n_vertices)
        order = rng.permutation(len(pairs))
        shuffled = PairList(pairs.first[order], pairs.second[order], pairs.cost[order])
        shuffled_map, shuffled_removed = cluster_vertices(shuffled, removed, mesh.n_vertices)
        if shuffled_removed != removed:
            continue
        compared += 1
        wins += contraction_cost(mesh, quadrics, greedy) <= contraction_cost(mesh, quadrics, shuffled_map)
    assert compared >= trials // 2
    assert wins >= tests_config["decimation"].as_int("greedy_wins") * compared / trials


def test_decimation_is_deterministic(sphere):
    first = decimate(sphere, target_vertices=200, max_iters=4)
    second = decimate(sphere, target_vertices=200, max_iters=4)
    np.testing.assert_array_equal(first.cluster_map.iomap, second.cluster_map.iomap)
    np.testing.assert_array_equal(first.mesh.facets, second.mesh.facets)


def test_multi_pass_composes_cluster_maps(sphere):
    result = decimate(sphere, target_vertices=100, max_iters=8)
    assert result.mesh.n_vertices == 100
    assert result.iterations > 1
    cmap = result.cluster_map
    assert cmap.n_in == 642 and cmap.n_out == 100
    cmap.check()


def test_stride_targets():
    assert stride_targets(1000, (4, 3, 3, 2, 2)) == [250, 84, 28, 14, 7]
    assert stride_targets(10, (1, 2.5)) == [10, 4]
    with pytest.raises(ArgumentError):
        stride_targets(10, (0.5,))


def test_build_hierarchy_counts(sphere):
    hierarchy = build_hierarchy(sphere, (2, 2, 1))
    assert hierarchy.depth == 4
    assert [m.n_vertices for m in hierarchy.meshes] == [642, 321, 161, 161]
    for k, cmap in enumerate(hierarchy.cluster_maps):
        assert cmap.n_in == hierarchy.meshes[k].n_vertices
        assert cmap.n_out == hierarchy.meshes[k + 1].n_vertices


def test_iterative_baseline_reaches_target(small_sphere):
    result = IterativeQEMDecimator().decimate(small_sphere, target_vertices=21)
    assert result.mesh.n_vertices == 21
    result.cluster_map.check()


def test_voxel_method(small_sphere):
    result = make_decimator("voxel", grid_size=10.0).decimate(small_sphere)
    assert result.mesh.n_vertices == 1
    assert result.mesh.n_facets == 0


def test_unknown_method():
    with pytest.raises(ArgumentError):
        make_decimator("spectral")
