import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass

from meshkit.decimation.quadric import contract_clusters, contraction_cost, vertex_quadrics
from meshkit.errors import ArgumentError
from meshkit.mesh.clustering import ClusterMap
from meshkit.mesh.core import TriMesh

logger = logging.getLogger(__name__)


@dataclass
class DecimationResult:
    mesh: TriMesh
    cluster_map: ClusterMap
    removed_count: int
    cost: float = 0.0
    iterations: int = 0


class Decimator(ABC):
    """Repeats cluster-then-contract passes until a vertex target is met.

    Subclasses decide how one pass clusters the vertices; the driver composes
    the per-pass ClusterMaps so pooling can jump across several passes.
    """

    def __init__(self, max_iters=1):
        if max_iters < 1:
            raise ArgumentError(f"max_iters must be >= 1, got {max_iters}")
        self.max_iters = max_iters

    def decimate(self, mesh, target_vertices=None, n_remove=None):
        n_in = mesh.n_vertices
        target = self.resolve_target(n_in, target_vertices, n_remove)
        composed = ClusterMap.identity(n_in)
        if target >= n_in:
            if target > n_in:
                logger.warning("target %d exceeds the %d input vertices, returning the mesh unchanged", target, n_in)
            return DecimationResult(mesh.copy(), composed, 0)

        current, cost, iterations = mesh, 0.0, 0
        while iterations < self.max_iters and current.n_vertices > target:
            quadrics = vertex_quadrics(current)
            cmap = self.cluster(current, quadrics, current.n_vertices - target)
            iterations += 1
            if cmap.n_out == current.n_vertices:
                logger.debug("pass %d removed nothing, stopping", iterations)
                break
            cost += contraction_cost(current, quadrics, cmap)
            current = contract_clusters(current, cmap)
            composed = composed.compose(cmap)

        if current.n_vertices > target:
            logger.debug("stopped at %d vertices, target was %d", current.n_vertices, target)
        return DecimationResult(current, composed, n_in - current.n_vertices, cost, iterations)

    @staticmethod
    def resolve_target(n_in, target_vertices, n_remove):
        if (target_vertices is None) == (n_remove is None):
            raise ArgumentError("give exactly one of target_vertices and n_remove")
        if n_remove is not None:
            if n_remove < 0:
                raise ArgumentError(f"n_remove must be >= 0, got {n_remove}")
            target_vertices = max(n_in - n_remove, 1)
        if target_vertices < 1:
            raise ArgumentError(f"target_vertices must be >= 1, got {target_vertices}")
        return target_vertices

    @abstractmethod
    def cluster(self, mesh, quadrics, n_remove):
        """Cluster the vertices of one pass, removing at most n_remove of them."""
