from meshkit.decimation.decimator import DecimationResult, Decimator
from meshkit.decimation.hierarchy import MeshHierarchy, build_hierarchy, decimate, make_decimator, stride_targets
from meshkit.decimation.iterative_qem import IterativeQEMDecimator
from meshkit.decimation.quadric import contract_clusters, contraction_cost, vertex_quadrics
from meshkit.decimation.single_pass import QuadricDecimator, cluster_vertices, sorted_pairs
from meshkit.decimation.voxel import VoxelDecimator
