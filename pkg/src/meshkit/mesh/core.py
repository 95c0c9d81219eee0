"""Triangle mesh container, per-facet geometry and validation."""
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from meshkit.errors import StructuralError

logger = logging.getLogger(__name__)

DEGENERATE_AREA = 1e-12
DEFAULT_NORMAL = np.array([0.0, 0.0, 1.0])


@dataclass
class TriMesh:
    """Vertex positions (N, 3) float64 and 0-based facet indices (M, 3)."""

    vertices: np.ndarray
    facets: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.facets = np.asarray(self.facets, dtype=np.int64).reshape(-1, 3)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_facets(self):
        return len(self.facets)

    def copy(self):
        return TriMesh(self.vertices.copy(), self.facets.copy())

    def edges(self):
        """Unique undirected edges (i < j), sorted lexicographically."""
        return mesh_edges(self.facets)

    def check_indices(self):
        """Raise StructuralError when a facet references a missing vertex."""
        if self.facets.size and (self.facets.min() < 0 or self.facets.max() >= self.n_vertices):
            bad = np.flatnonzero(((self.facets < 0) | (self.facets >= self.n_vertices)).any(axis=1))
            raise StructuralError(
                f"{len(bad)} facet(s) index outside [0, {self.n_vertices}), first is facet {bad[0]}"
            )


def mesh_edges(facets):
    facets = np.asarray(facets, dtype=np.int64).reshape(-1, 3)
    pairs = np.concatenate([facets[:, [0, 1]], facets[:, [1, 2]], facets[:, [2, 0]]])
    pairs = np.sort(pairs, axis=1)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    if len(pairs) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    return np.unique(pairs, axis=0)


class NormalsAreas(NamedTuple):
    normals: np.ndarray
    areas: np.ndarray
    degenerate: np.ndarray


def compute_normals_areas(mesh):
    """Unit facet normals and areas; degenerate facets get n = (0, 0, 1)."""
    mesh.check_indices()
    x = mesh.vertices[mesh.facets]
    cross = np.cross(x[:, 1] - x[:, 0], x[:, 2] - x[:, 0])
    norm = np.linalg.norm(cross, axis=1)
    areas = 0.5 * norm
    degenerate = areas < DEGENERATE_AREA
    normals = np.empty_like(cross)
    normals[~degenerate] = cross[~degenerate] / norm[~degenerate, None]
    normals[degenerate] = DEFAULT_NORMAL
    if degenerate.any():
        logger.debug("%d degenerate facet(s) flagged", int(degenerate.sum()))
    return NormalsAreas(normals, areas, degenerate)


@dataclass
class FacetGeometry:
    edge_lengths: np.ndarray
    cosines: np.ndarray
    normals: np.ndarray
    areas: np.ndarray
    degenerate: np.ndarray
    heights: Optional[np.ndarray] = None

    def as_features(self):
        blocks = [self.edge_lengths, self.cosines, self.normals]
        if self.heights is not None:
            blocks.append(self.heights)
        return np.hstack(blocks)


def facet_geometry(mesh, with_height=False):
    """Edge lengths, inner-angle cosines, normals (and vertex heights) per facet.

    Edge convention: l1 = |x2 - x1|, l2 = |x3 - x2|, l3 = |x1 - x3|.
    """
    frame = compute_normals_areas(mesh)
    x = mesh.vertices[mesh.facets]
    x1, x2, x3 = x[:, 0], x[:, 1], x[:, 2]
    lengths = np.stack(
        [np.linalg.norm(x2 - x1, axis=1), np.linalg.norm(x3 - x2, axis=1), np.linalg.norm(x1 - x3, axis=1)],
        axis=1,
    )
    l1, l2, l3 = lengths.T
    dots = np.stack(
        [
            np.einsum("ij,ij->i", x2 - x1, x3 - x1),
            np.einsum("ij,ij->i", x1 - x2, x3 - x2),
            np.einsum("ij,ij->i", x1 - x3, x2 - x3),
        ],
        axis=1,
    )
    denom = np.stack([l1 * l3, l1 * l2, l2 * l3], axis=1)
    zero_edge = (lengths == 0).any(axis=1)
    cosines = np.zeros_like(dots)
    ok = ~zero_edge
    cosines[ok] = np.clip(dots[ok] / denom[ok], -1.0, 1.0)
    if zero_edge.any():
        logger.debug("%d facet(s) with a zero-length edge, cosines set to 0", int(zero_edge.sum()))
    heights = x[:, :, 2].copy() if with_height else None
    return FacetGeometry(lengths, cosines, frame.normals, frame.areas, zero_edge | frame.degenerate, heights)


def compute_facet_geometrics(mesh, with_height=False):
    """Per-facet input rows [l, theta, n] (9 values) or [l, theta, n, h] (12 values)."""
    return facet_geometry(mesh, with_height).as_features()


@dataclass
class ValidationReport:
    out_of_range_facets: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    repeated_index_facets: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    duplicate_facets: list = field(default_factory=list)
    non_manifold_edges: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    isolated_vertices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def is_clean(self):
        return not (
            len(self.out_of_range_facets)
            or len(self.repeated_index_facets)
            or len(self.duplicate_facets)
            or len(self.non_manifold_edges)
            or len(self.isolated_vertices)
        )

    @property
    def is_edge_manifold(self):
        return len(self.non_manifold_edges) == 0

    def summary(self):
        return {
            "out_of_range_facets": len(self.out_of_range_facets),
            "repeated_index_facets": len(self.repeated_index_facets),
            "duplicate_facets": len(self.duplicate_facets),
            "non_manifold_edges": len(self.non_manifold_edges),
            "isolated_vertices": len(self.isolated_vertices),
        }


def validate_mesh(mesh):
    """Report-only structural checks; never raises."""
    facets = mesh.facets
    n = mesh.n_vertices
    report = ValidationReport()
    if len(facets) == 0:
        report.isolated_vertices = np.arange(n)
        return report

    bad = ((facets < 0) | (facets >= n)).any(axis=1)
    report.out_of_range_facets = np.flatnonzero(bad)
    repeated = (facets[:, 0] == facets[:, 1]) | (facets[:, 1] == facets[:, 2]) | (facets[:, 0] == facets[:, 2])
    report.repeated_index_facets = np.flatnonzero(repeated & ~bad)

    good = facets[~bad]
    good_ids = np.flatnonzero(~bad)
    if len(good):
        keys = np.sort(good, axis=1)
        _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        for group in np.flatnonzero(counts > 1):
            report.duplicate_facets.append(tuple(int(i) for i in good_ids[inverse == group]))

        proper = good[~repeated[~bad]]
        if len(proper):
            pairs = np.sort(
                np.concatenate([proper[:, [0, 1]], proper[:, [1, 2]], proper[:, [2, 0]]]), axis=1
            )
            edges, edge_counts = np.unique(pairs, axis=0, return_counts=True)
            report.non_manifold_edges = edges[edge_counts > 2]

        used = np.zeros(n, dtype=bool)
        used[good.ravel()] = True
        report.isolated_vertices = np.flatnonzero(~used)
    else:
        report.isolated_vertices = np.arange(n)

    if not report.is_clean:
        logger.debug("mesh validation: %s", report.summary())
    return report
