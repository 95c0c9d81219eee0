"""Classical edge-collapse QEM driven by a priority list, kept as benchmark baseline."""
import logging

import numpy as np
from sortedcontainers import SortedList

from meshkit.decimation.decimator import Decimator
from meshkit.mesh.clustering import ClusterMap

logger = logging.getLogger(__name__)


class IterativeQEMDecimator(Decimator):
    """Collapse the cheapest edge, merge quadrics, re-score the surviving edges, repeat."""

    def cluster(self, mesh, quadrics, n_remove):
        n = mesh.n_vertices
        self.quadrics = [q.copy() for q in quadrics]
        self.sums = [v.copy() for v in mesh.vertices]
        self.counts = [1] * n
        self.parent = list(range(n))
        self.neighbors = [set() for _ in range(n)]
        self.priority_list = SortedList()
        self.entries = {}

        for i, j in mesh.edges().tolist():
            self.neighbors[i].add(j)
            self.neighbors[j].add(i)
            self.push(i, j)

        removed = 0
        while removed < n_remove and self.priority_list:
            self.collapse(self.priority_list[0])
            removed += 1

        roots = [self.find(v) for v in range(n)]
        return ClusterMap.from_labels(roots)

    def pair_cost(self, i, j):
        count = self.counts[i] + self.counts[j]
        v = np.append((self.sums[i] + self.sums[j]) / count, 1.0)
        return float(v @ (self.quadrics[i] + self.quadrics[j]) @ v)

    def push(self, i, j):
        key = (i, j) if i < j else (j, i)
        entry = (self.pair_cost(*key), key[0], key[1])
        self.entries[key] = entry
        self.priority_list.add(entry)

    def drop(self, i, j):
        key = (i, j) if i < j else (j, i)
        entry = self.entries.pop(key, None)
        if entry is not None:
            self.priority_list.remove(entry)

    def collapse(self, entry):
        """Merge the second vertex of the entry into the first and update its neighbours."""
        _, keep, gone = entry
        self.drop(keep, gone)
        self.quadrics[keep] = self.quadrics[keep] + self.quadrics[gone]
        self.sums[keep] = self.sums[keep] + self.sums[gone]
        self.counts[keep] += self.counts[gone]
        self.parent[gone] = keep

        for k in self.neighbors[gone]:
            if k == keep:
                continue
            self.drop(gone, k)
            self.neighbors[k].discard(gone)
            self.neighbors[k].add(keep)
            self.neighbors[keep].add(k)
        self.neighbors[keep].discard(gone)
        self.neighbors[gone] = set()

        for k in self.neighbors[keep]:
            self.drop(keep, k)
            self.push(keep, k)

    def find(self, v):
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root
