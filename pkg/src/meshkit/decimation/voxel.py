from meshkit.decimation.decimator import Decimator
from meshkit.errors import ArgumentError
from meshkit.mesh.clustering import voxel_cluster


class VoxelDecimator(Decimator):
    """Clusters vertices by voxel cell; a single pass, independent of any target."""

    def __init__(self, grid_size, origin=None):
        super().__init__(max_iters=1)
        if not grid_size > 0:
            raise ArgumentError(f"grid_size must be > 0, got {grid_size}")
        self.grid_size = grid_size
        self.origin = origin

    def decimate(self, mesh, target_vertices=None, n_remove=None):
        if target_vertices is None and n_remove is None:
            target_vertices = 1
        return super().decimate(mesh, target_vertices, n_remove)

    def cluster(self, mesh, quadrics, n_remove):
        return voxel_cluster(mesh, self.grid_size, self.origin)
