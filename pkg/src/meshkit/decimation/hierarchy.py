import logging
import math
from dataclasses import dataclass, field

from meshkit.decimation.iterative_qem import IterativeQEMDecimator
from meshkit.decimation.single_pass import QuadricDecimator
from meshkit.decimation.voxel import VoxelDecimator
from meshkit.errors import ArgumentError
from meshkit.mesh.clustering import ClusterMap

logger = logging.getLogger(__name__)

METHODS = ("qem", "voxel", "iterative")


def make_decimator(method="qem", max_iters=1, grid_size=None):
    if method == "qem":
        return QuadricDecimator(max_iters)
    if method == "iterative":
        return IterativeQEMDecimator(max_iters)
    if method == "voxel":
        if grid_size is None:
            raise ArgumentError("voxel decimation needs a grid size")
        return VoxelDecimator(grid_size)
    raise ArgumentError(f"unknown decimation method {method!r}, expected one of {METHODS}")


def decimate(mesh, target_vertices=None, n_remove=None, max_iters=1, method="qem", grid_size=None):
    return make_decimator(method, max_iters, grid_size).decimate(mesh, target_vertices, n_remove)


def stride_targets(n_vertices, strides):
    """Vertex targets ceil(N / (s_1 ... s_k)) of a strided schedule; strides may be fractional."""
    targets, scale = [], 1.0
    for stride in strides:
        if stride < 1:
            raise ArgumentError(f"pooling strides must be >= 1, got {stride}")
        scale *= stride
        targets.append(max(1, math.ceil(n_vertices / scale - 1e-9)))
    return targets


@dataclass
class MeshHierarchy:
    """Meshes T^0..T^D-1 and the ClusterMap taking level k to level k+1."""

    meshes: list = field(default_factory=list)
    cluster_maps: list = field(default_factory=list)

    @property
    def depth(self):
        return len(self.meshes)


def build_hierarchy(mesh, strides, max_iters=8, method="qem"):
    hierarchy = MeshHierarchy([mesh], [])
    decimator = make_decimator(method, max_iters)
    current = mesh
    for target in stride_targets(mesh.n_vertices, strides):
        if target >= current.n_vertices:
            cmap = ClusterMap.identity(current.n_vertices)
        else:
            result = decimator.decimate(current, target_vertices=target)
            cmap, current = result.cluster_map, result.mesh
        hierarchy.meshes.append(current)
        hierarchy.cluster_maps.append(cmap)
    logger.debug("hierarchy vertex counts: %s", [m.n_vertices for m in hierarchy.meshes])
    return hierarchy
