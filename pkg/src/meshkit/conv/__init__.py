from meshkit.conv.adjacency import VertexFacetAdjacency
from meshkit.conv.context import SavedContext, backward
from meshkit.conv.mesh_conv import facet2facet, facet2vertex, vertex2facet, vertex2vertex
from meshkit.conv.pcloud import NeighborList, batched_radius_search, pcloud_conv, radius_search
