from meshkit.mesh.clustering import ClusterMap, cluster_positions, voxel_cluster
from meshkit.mesh.core import (
    FacetGeometry,
    TriMesh,
    ValidationReport,
    compute_facet_geometrics,
    compute_normals_areas,
    facet_geometry,
    validate_mesh,
)
from meshkit.mesh.texture import TextureField, barycentric_lattice, build_texture_field, texture_resolution
