import numpy as np
import pytest

from meshkit.errors import ArgumentError, StructuralError
from meshkit.mesh.clustering import ClusterMap, cluster_positions, voxel_cluster
from meshkit.mesh.core import TriMesh, compute_facet_geometrics, compute_normals_areas, facet_geometry, validate_mesh
from meshkit.mesh.texture import barycentric_lattice, build_texture_field, concat_textures, texture_resolution
from tests.conftest import random_mesh


def test_right_triangle_normal_and_area(triangle):
    frame = compute_normals_areas(triangle)
    np.testing.assert_allclose(frame.normals[0], [0.0, 0.0, 1.0])
    assert frame.areas[0] == pytest.approx(0.5)
    assert not frame.degenerate[0]


def test_coincident_vertices_are_degenerate():
    mesh = TriMesh([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], [[0, 1, 2]])
    frame = compute_normals_areas(mesh)
    assert frame.areas[0] == 0.0
    assert frame.degenerate[0]
    np.testing.assert_array_equal(frame.normals[0], [0.0, 0.0, 1.0])


def test_out_of_range_index_raises(triangle):
    with pytest.raises(StructuralError):
        compute_normals_areas(TriMesh(triangle.vertices, [[0, 1, 3]]))


def test_area_matches_heron(rng):
    mesh = random_mesh(rng, 20, 40)
    geometry = facet_geometry(mesh)
    a, b, c = geometry.edge_lengths.T
    s = 0.5 * (a + b + c)
    heron = np.sqrt(np.maximum(s * (s - a) * (s - b) * (s - c), 0.0))
    np.testing.assert_allclose(geometry.areas, heron, rtol=0, atol=1e-10)


def test_equilateral_geometrics():
    mesh = TriMesh([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, np.sqrt(3) / 2, 0.0]], [[0, 1, 2]])
    row = compute_facet_geometrics(mesh)[0]
    np.testing.assert_allclose(row[:3], [1.0, 1.0, 1.0])
    np.testing.assert_allclose(row[3:6], [0.5, 0.5, 0.5])
    np.testing.assert_allclose(row[6:9], [0.0, 0.0, 1.0])


def test_right_isosceles_geometrics(triangle):
    row = compute_facet_geometrics(triangle)[0]
    np.testing.assert_allclose(row[:3], [1.0, np.sqrt(2.0), 1.0])
    assert row[3] == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(row[4:6], [np.sqrt(0.5), np.sqrt(0.5)])


def test_height_columns(triangle):
    lifted = TriMesh(triangle.vertices + [0.0, 0.0, 2.0], triangle.facets)
    rows = compute_facet_geometrics(lifted, with_height=True)
    assert rows.shape == (1, 12)
    np.testing.assert_allclose(rows[0, 9:], [2.0, 2.0, 2.0])


def test_inner_angles_sum_to_pi(rng):
    mesh = random_mesh(rng, 30, 80)
    cosines = compute_facet_geometrics(mesh)[:, 3:6]
    np.testing.assert_allclose(np.arccos(cosines).sum(axis=1), np.pi, atol=1e-9)


def test_geometrics_translation_and_scale(rng):
    mesh = random_mesh(rng, 25, 40)
    base = compute_facet_geometrics(mesh)
    moved = compute_facet_geometrics(TriMesh(mesh.vertices + [3.0, -1.0, 7.0], mesh.facets))
    np.testing.assert_allclose(moved, base, atol=1e-9)
    scaled = compute_facet_geometrics(TriMesh(2.5 * mesh.vertices, mesh.facets))
    np.testing.assert_allclose(scaled[:, :3], 2.5 * base[:, :3], rtol=1e-12)
    np.testing.assert_allclose(scaled[:, 3:], base[:, 3:], atol=1e-9)


def test_zero_edge_gives_zero_cosines():
    mesh = TriMesh([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], [[0, 1, 2]])
    geometry = facet_geometry(mesh)
    np.testing.assert_array_equal(geometry.cosines[0], [0.0, 0.0, 0.0])
    assert geometry.degenerate[0]


def test_validate_single_triangle_is_clean(triangle):
    assert validate_mesh(triangle).is_clean


def test_validate_duplicate_facets(triangle):
    report = validate_mesh(TriMesh(triangle.vertices, [[0, 1, 2], [0, 1, 2]]))
    assert report.duplicate_facets == [(0, 1)]
    assert not report.is_clean


def test_validate_non_manifold_edge():
    vertices = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]]
    report = validate_mesh(TriMesh(vertices, [[0, 1, 2], [0, 1, 3], [0, 1, 4]]))
    np.testing.assert_array_equal(report.non_manifold_edges, [[0, 1]])
    assert not report.is_edge_manifold


def test_validate_indices_and_isolated():
    vertices = np.zeros((5, 3))
    report = validate_mesh(TriMesh(vertices, [[0, 1, 2], [0, 1, 7], [2, 2, 3]]))
    np.testing.assert_array_equal(report.out_of_range_facets, [1])
    np.testing.assert_array_equal(report.repeated_index_facets, [2])
    np.testing.assert_array_equal(report.isolated_vertices, [4])


def test_voxel_cluster_large_grid_is_one_cluster(rng):
    mesh = random_mesh(rng)
    cmap = voxel_cluster(mesh, 1e6)
    assert cmap.n_out == 1
    np.testing.assert_allclose(cluster_positions(mesh.vertices, cmap)[0], mesh.vertices.mean(axis=0))


def test_voxel_cluster_tiny_grid_is_identity(rng):
    mesh = random_mesh(rng)
    cmap = voxel_cluster(mesh, 1e-9)
    np.testing.assert_array_equal(cmap.iomap, np.arange(mesh.n_vertices))


@pytest.mark.parametrize("grid_size", [1e-20, 1e-320])
def test_voxel_cluster_vanishing_grid_keeps_vertices_apart(grid_size):
    line = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]])
    cmap = voxel_cluster(TriMesh(line, np.zeros((0, 3))), grid_size)
    assert cmap.n_out == 4
    np.testing.assert_array_equal(cmap.iomap, np.arange(4))


def test_voxel_cluster_cube_corners():
    corners = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    cmap = voxel_cluster(TriMesh(corners, np.zeros((0, 3))), 0.5, origin=[0.0, 0.0, 0.0])
    assert cmap.n_out == 8


def test_voxel_cluster_disjoint_covering(rng):
    mesh = random_mesh(rng, 200, 10)
    cmap = voxel_cluster(mesh, 0.7)
    cmap.check()
    members = np.sort(np.concatenate(cmap.members()))
    np.testing.assert_array_equal(members, np.arange(mesh.n_vertices))


def test_voxel_cluster_rejects_bad_grid(triangle):
    with pytest.raises(ArgumentError):
        voxel_cluster(triangle, 0.0)


def test_cluster_map_labels_follow_first_occurrence():
    cmap = ClusterMap.from_labels([7, 7, 3, 9, 3])
    np.testing.assert_array_equal(cmap.iomap, [0, 0, 1, 2, 1])
    np.testing.assert_array_equal(cmap.sizes(), [2, 2, 1])


def test_cluster_map_compose():
    first = ClusterMap.from_labels([0, 0, 1, 2, 2])
    second = ClusterMap.from_labels([0, 1, 0])
    np.testing.assert_array_equal(first.compose(second).iomap, [0, 0, 1, 0, 0])
    with pytest.raises(StructuralError):
        second.compose(first)


def test_cluster_map_check_rejects_gaps():
    with pytest.raises(StructuralError):
        ClusterMap([0, 2], [0, 2]).check()


@pytest.mark.parametrize(
    "area, a_max, alpha, beta, gamma, count",
    [(0.0, 1.0, 3, 1, 1, 3), (1.0, 1.0, 3, 3, 6, 28), (0.5, 1.0, 2, 1, 2, 6)],
)
def test_texture_resolution(area, a_max, alpha, beta, gamma, count):
    assert texture_resolution(area, 0.0, a_max, alpha, beta) == (gamma, count)


def test_texture_resolution_flat_areas_use_beta():
    assert texture_resolution(2.0, 2.0, 2.0, 3, 2) == (2, 6)


def test_texture_resolution_rejects_negative():
    with pytest.raises(ArgumentError):
        texture_resolution(0.5, 0.0, 1.0, -1, 1)


def test_lattice_first_orders():
    np.testing.assert_allclose(barycentric_lattice(1), [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    np.testing.assert_allclose(barycentric_lattice(0), [[1 / 3, 1 / 3, 1 / 3]])
    points = {tuple(p) for p in barycentric_lattice(2).tolist()}
    assert {(0.5, 0.5, 0.0), (0.0, 0.5, 0.5), (0.5, 0.0, 0.5), (1.0, 0.0, 0.0)} <= points


@pytest.mark.parametrize("gamma", range(1, 21))
def test_lattice_count_and_simplex(gamma):
    lattice = barycentric_lattice(gamma)
    assert len(lattice) == (gamma + 1) * (gamma + 2) // 2
    assert len({tuple(p) for p in lattice.tolist()}) == len(lattice)
    np.testing.assert_allclose(lattice.sum(axis=1), 1.0)
    assert lattice.min() >= 0.0


def test_texture_field_interpolates_vertex_colors(rng):
    mesh = random_mesh(rng, 12, 15)
    colors = rng.uniform(size=(mesh.n_vertices, 3))
    field = build_texture_field(mesh, colors)
    owner = field.facet_ids()
    expected = np.einsum("kj,kjc->kc", field.barycentric, colors[mesh.facets[owner]])
    np.testing.assert_allclose(field.colors, expected)
    assert field.n_facets == mesh.n_facets
    assert field.counts().min() >= 3


def test_concat_textures(rng):
    mesh = random_mesh(rng, 10, 6)
    colors = rng.uniform(size=(mesh.n_vertices, 3))
    one = build_texture_field(mesh, colors)
    both = concat_textures([one, one])
    assert both.n_facets == 2 * mesh.n_facets
    np.testing.assert_allclose(both.colors[len(one.colors):], one.colors)
