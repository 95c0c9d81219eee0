"""Garland-Heckbert quadrics and cluster contraction."""
import numpy as np

from meshkit.mesh.clustering import cluster_positions
from meshkit.mesh.core import TriMesh, compute_normals_areas


def vertex_quadrics(mesh):
    """Area-weighted plane quadrics, shape (N, 4, 4).

    Q_v = sum over facets f containing v of A_f p_f p_f^T with p_f = (n_f, -n_f . x_1).
    Degenerate facets have zero area and contribute nothing.
    """
    frame = compute_normals_areas(mesh)
    x1 = mesh.vertices[mesh.facets[:, 0]] if mesh.n_facets else np.zeros((0, 3))
    planes = np.hstack([frame.normals, -np.einsum("ij,ij->i", frame.normals, x1)[:, None]])
    facet_quadrics = frame.areas[:, None, None] * planes[:, :, None] * planes[:, None, :]
    quadrics = np.zeros((mesh.n_vertices, 4, 4))
    for corner in range(3):
        np.add.at(quadrics, mesh.facets[:, corner], facet_quadrics)
    return quadrics


def homogeneous(points):
    points = np.asarray(points, dtype=np.float64)
    return np.concatenate([points, np.ones(points.shape[:-1] + (1,))], axis=-1)


def quadric_error(quadrics, points):
    """v^T Q v for matching stacks of quadrics (..., 4, 4) and points (..., 3)."""
    v = homogeneous(points)
    return np.einsum("...i,...ij,...j->...", v, quadrics, v)


def contraction_cost(mesh, quadrics, cluster_map):
    """Total quadric error of contracting every cluster to its mean position."""
    positions = cluster_positions(mesh.vertices, cluster_map)
    summed = np.zeros((cluster_map.n_out, 4, 4))
    np.add.at(summed, cluster_map.iomap, quadrics)
    return float(quadric_error(summed, positions).sum())


def contract_clusters(mesh, cluster_map):
    """Collapse every cluster to its mean; drop collapsed and duplicated facets."""
    positions = cluster_positions(mesh.vertices, cluster_map)
    facets = cluster_map.iomap[mesh.facets] if mesh.n_facets else mesh.facets.copy()
    if len(facets):
        collapsed = (facets[:, 0] == facets[:, 1]) | (facets[:, 1] == facets[:, 2]) | (facets[:, 0] == facets[:, 2])
        facets = facets[~collapsed]
    if len(facets):
        _, first = np.unique(np.sort(facets, axis=1), axis=0, return_index=True)
        facets = facets[np.sort(first)]
    return TriMesh(positions, facets)
