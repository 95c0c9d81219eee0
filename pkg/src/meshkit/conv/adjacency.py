from dataclasses import dataclass

import numpy as np
from scipy import sparse

from meshkit.helpers.utility import offsets_from_counts, segment_ids


@dataclass
class VertexFacetAdjacency:
    """Incident facets N(v) of every vertex as a flat facet-id array plus offsets.

    Facet ids are ascending inside each vertex segment; this is the fixed
    accumulation order of facet2vertex.
    """

    facet_ids: np.ndarray
    offsets: np.ndarray
    n_facets: int

    @classmethod
    def from_facets(cls, facets, n_vertices):
        facets = np.asarray(facets, dtype=np.int64).reshape(-1, 3)
        owners = np.repeat(np.arange(len(facets)), 3)
        pairs = np.stack([facets.ravel(), owners], axis=1)
        if len(pairs):
            pairs = np.unique(pairs, axis=0)
        counts = np.bincount(pairs[:, 0], minlength=n_vertices)
        return cls(pairs[:, 1].copy(), offsets_from_counts(counts), len(facets))

    @property
    def n_vertices(self):
        return len(self.offsets) - 1

    def degrees(self):
        return np.diff(self.offsets)

    def vertex_ids(self):
        return segment_ids(self.offsets)

    def mean_operator(self):
        """Sparse (N, M) matrix with 1/|N(v)| on every incident pair; empty rows stay zero."""
        return segment_mean_matrix(self.offsets, self.facet_ids, self.n_facets)


def segment_mean_matrix(offsets, columns, n_columns):
    """CSR matrix averaging the columns listed in each row segment.

    Rows sum their entries in stored order, which keeps reductions deterministic.
    """
    offsets = np.asarray(offsets, dtype=np.int64)
    counts = np.diff(offsets)
    weights = 1.0 / np.repeat(np.maximum(counts, 1), counts)
    return sparse.csr_matrix((weights, np.asarray(columns, dtype=np.int64), offsets), shape=(len(counts), n_columns))
