"""Vertex clusterings linking a mesh to its decimated successor."""
import logging
from dataclasses import dataclass

import numpy as np

from meshkit.errors import ArgumentError, StructuralError
from meshkit.helpers.utility import relabel_first_occurrence

logger = logging.getLogger(__name__)


@dataclass
class ClusterMap:
    """VCluster (cluster id per input vertex) and IOmap (output vertex per input vertex).

    Clusters are numbered by the first input vertex they contain and output
    vertices are emitted in cluster order, so both vectors hold the same
    contiguous labels 0..n_out-1.
    """

    vcluster: np.ndarray
    iomap: np.ndarray

    def __post_init__(self):
        self.vcluster = np.asarray(self.vcluster, dtype=np.int64)
        self.iomap = np.asarray(self.iomap, dtype=np.int64)

    @classmethod
    def from_labels(cls, labels):
        labels = relabel_first_occurrence(labels)
        return cls(labels, labels.copy())

    @classmethod
    def identity(cls, n):
        ids = np.arange(n, dtype=np.int64)
        return cls(ids, ids.copy())

    @property
    def n_in(self):
        return len(self.iomap)

    @property
    def n_out(self):
        return int(self.iomap.max()) + 1 if len(self.iomap) else 0

    def sizes(self):
        return np.bincount(self.iomap, minlength=self.n_out)

    def members(self):
        """Input vertex ids of every cluster, ascending inside each cluster."""
        order = np.argsort(self.iomap, kind="stable")
        bounds = np.cumsum(self.sizes())[:-1]
        return np.split(order, bounds)

    def compose(self, following):
        """Map input vertices straight to the outputs of a following ClusterMap."""
        if following.n_in != self.n_out:
            raise StructuralError(
                f"cannot compose: following map expects {following.n_in} vertices, got {self.n_out}"
            )
        return ClusterMap.from_labels(following.iomap[self.iomap])

    def check(self):
        """Raise StructuralError unless labels are contiguous and VCluster agrees with IOmap."""
        if self.vcluster.shape != self.iomap.shape:
            raise StructuralError("VCluster and IOmap differ in length")
        if len(self.iomap) == 0:
            return
        if self.iomap.min() < 0 or np.any(np.bincount(self.iomap) == 0):
            raise StructuralError("IOmap output indices are not contiguous")
        pairs = np.unique(np.stack([self.vcluster, self.iomap], axis=1), axis=0)
        if len(np.unique(pairs[:, 0])) != len(pairs) or len(np.unique(pairs[:, 1])) != len(pairs):
            raise StructuralError("VCluster and IOmap disagree on cluster membership")


def cluster_positions(vertices, cluster_map):
    """Arithmetic mean position of every cluster."""
    vertices = np.asarray(vertices, dtype=np.float64)
    sums = np.zeros((cluster_map.n_out, vertices.shape[1]))
    np.add.at(sums, cluster_map.iomap, vertices)
    return sums / cluster_map.sizes()[:, None]


def voxel_cluster(mesh, grid_size, origin=None):
    """Group vertices sharing a cubic voxel of edge grid_size.

    The grid starts at the bounding-box minimum unless an origin is given.
    """
    if not grid_size > 0:
        raise ArgumentError(f"grid_size must be > 0, got {grid_size}")
    if mesh.n_vertices == 0:
        return ClusterMap.identity(0)
    if origin is None:
        origin = mesh.vertices.min(axis=0)
    offsets = mesh.vertices - np.asarray(origin, dtype=np.float64)
    with np.errstate(over="ignore"):
        cells = np.floor(offsets / grid_size)
    # overflowed cells key on the raw offset, flagged apart from finite cells
    overflow = ~np.isfinite(cells)
    keys = np.hstack([np.where(overflow, offsets, cells), overflow])
    _, labels = np.unique(keys, axis=0, return_inverse=True)
    cmap = ClusterMap.from_labels(labels.reshape(-1))
    logger.debug("voxel clustering at %g: %d -> %d vertices", grid_size, mesh.n_vertices, cmap.n_out)
    return cmap
