"""Single-pass clustering of edge pairs in ascending quadric order."""
import logging
from typing import NamedTuple

import numpy as np

from meshkit.decimation.decimator import Decimator
from meshkit.decimation.quadric import quadric_error
from meshkit.mesh.clustering import ClusterMap

logger = logging.getLogger(__name__)


class PairList(NamedTuple):
    first: np.ndarray
    second: np.ndarray
    cost: np.ndarray

    def __len__(self):
        return len(self.cost)


def sorted_pairs(mesh, quadrics):
    """One candidate pair per mesh edge, ordered by (cost, first, second).

    The cost scores the contraction target of the pair, its mean position.
    """
    edges = mesh.edges()
    first, second = edges[:, 0], edges[:, 1]
    midpoint = 0.5 * (mesh.vertices[first] + mesh.vertices[second])
    cost = quadric_error(quadrics[first] + quadrics[second], midpoint)
    order = np.lexsort((second, first, cost))
    return PairList(first[order], second[order], cost[order])


def cluster_vertices(pairs, n_remove, n_vertices):
    """Greedy two-pass clustering; returns the ClusterMap and the removed count.

    Pass 1 opens a cluster for every pair whose endpoints are both free. Pass 2
    attaches each remaining free endpoint to its partner's cluster, the first
    (cheapest) pair containing it winning. Every new cluster and every
    attachment removes one vertex, and the scan stops once n_remove is reached.
    Vertices left free become singletons.
    """
    owner = list(range(n_vertices))
    claimed = bytearray(n_vertices)
    removed = 0
    first, second = pairs.first.tolist(), pairs.second.tolist()

    for i, j in zip(first, second):
        if removed >= n_remove:
            break
        if not claimed[i] and not claimed[j]:
            owner[j] = i
            claimed[i] = claimed[j] = 1
            removed += 1

    for i, j in zip(first, second):
        if removed >= n_remove:
            break
        if claimed[i] and claimed[j]:
            continue
        if claimed[i]:
            owner[j] = owner[i]
        elif claimed[j]:
            owner[i] = owner[j]
        else:
            owner[j] = i
        claimed[i] = claimed[j] = 1
        removed += 1

    if removed < n_remove:
        logger.debug("only %d of %d requested removals were feasible", removed, n_remove)
    return ClusterMap.from_labels(owner), removed


class QuadricDecimator(Decimator):
    """Edge pairs sorted by quadric cost, clustered greedily, contracted to cluster means."""

    def cluster(self, mesh, quadrics, n_remove):
        pairs = sorted_pairs(mesh, quadrics)
        if len(pairs) == 0:
            return ClusterMap.identity(mesh.n_vertices)
        cmap, _ = cluster_vertices(pairs, n_remove, mesh.n_vertices)
        return cmap
