"""Heterogeneous batches: meshes of unequal size concatenated with index offsets."""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from meshkit.decimation.hierarchy import MeshHierarchy, build_hierarchy
from meshkit.errors import ArgumentError
from meshkit.helpers.utility import offsets_from_counts, parallel_map
from meshkit.mesh.clustering import ClusterMap
from meshkit.mesh.core import TriMesh, compute_facet_geometrics
from meshkit.mesh.texture import TextureField, build_texture_field, concat_textures

logger = logging.getLogger(__name__)


@dataclass
class Sample:
    """One mesh with its facet geometrics, optional texture and target.

    label is an int for classification, or one int per vertex (or facet) for
    dense labelling.
    """

    mesh: TriMesh
    geometrics: np.ndarray
    label: object = None
    texture: Optional[TextureField] = None

    def __post_init__(self):
        self.geometrics = np.asarray(self.geometrics, dtype=np.float64)
        if self.geometrics.ndim != 2 or len(self.geometrics) != self.mesh.n_facets:
            raise ArgumentError(
                f"geometrics must have one row per facet ({self.mesh.n_facets}), got shape {self.geometrics.shape}"
            )
        if self.texture is not None and self.texture.n_facets != self.mesh.n_facets:
            raise ArgumentError("texture facet count differs from the mesh")

    @classmethod
    def from_mesh(cls, mesh, label=None, colors=None, with_height=False, alpha=3, beta=1):
        texture = None if colors is None else build_texture_field(mesh, colors, alpha, beta)
        return cls(mesh, compute_facet_geometrics(mesh, with_height), label, texture)

    @property
    def dense(self):
        return self.label is not None and np.ndim(self.label) > 0


@dataclass
class HeteroBatch:
    """Concatenated (V, F, H0) tuple with the vertex/facet offsets of every sample."""

    mesh: TriMesh
    geometrics: np.ndarray
    vertex_offsets: np.ndarray
    facet_offsets: np.ndarray
    labels: Optional[np.ndarray] = None
    texture: Optional[TextureField] = None
    dense: bool = False

    @property
    def n_samples(self):
        return len(self.vertex_offsets) - 1

    @property
    def sample_offsets(self):
        """(vertex_start, facet_start) per sample."""
        return np.stack([self.vertex_offsets[:-1], self.facet_offsets[:-1]], axis=1)

    def sample_of_facet(self):
        return np.repeat(np.arange(self.n_samples), np.diff(self.facet_offsets))


def concat_batch(samples):
    """Concatenate samples, shifting the facets of sample s by the vertices before it."""
    samples = list(samples)
    if not samples:
        raise ArgumentError("cannot batch an empty sample list")
    widths = {s.geometrics.shape[1] for s in samples}
    if len(widths) != 1:
        raise ArgumentError(f"samples disagree on geometric feature width: {sorted(widths)}")
    textured = {s.texture is not None for s in samples}
    if len(textured) != 1:
        raise ArgumentError("either every sample or no sample may carry a texture")
    labelled = {s.label is not None for s in samples}
    dense = {s.dense for s in samples}
    if len(labelled) != 1 or len(dense) != 1:
        raise ArgumentError("samples mix label kinds")

    vertex_offsets = offsets_from_counts([s.mesh.n_vertices for s in samples])
    facet_offsets = offsets_from_counts([s.mesh.n_facets for s in samples])
    vertices = np.concatenate([s.mesh.vertices for s in samples])
    facets = np.concatenate([s.mesh.facets + start for s, start in zip(samples, vertex_offsets[:-1])])
    is_dense = dense.pop()
    labels = None
    if labelled.pop():
        if is_dense:
            labels = np.concatenate([np.asarray(s.label, dtype=np.int64) for s in samples])
        else:
            labels = np.asarray([s.label for s in samples], dtype=np.int64)
    texture = concat_textures([s.texture for s in samples]) if textured.pop() else None
    return HeteroBatch(
        TriMesh(vertices, facets),
        np.concatenate([s.geometrics for s in samples]),
        vertex_offsets,
        facet_offsets,
        labels,
        texture,
        is_dense,
    )


def split_batch(batch):
    """Recover the samples of a batch."""
    samples = []
    for s in range(batch.n_samples):
        v0, v1 = batch.vertex_offsets[s], batch.vertex_offsets[s + 1]
        f0, f1 = batch.facet_offsets[s], batch.facet_offsets[s + 1]
        mesh = TriMesh(batch.mesh.vertices[v0:v1], batch.mesh.facets[f0:f1] - v0)
        label = None
        if batch.labels is not None:
            if batch.dense:
                rows = len(batch.labels)
                a, b = (v0, v1) if rows == batch.mesh.n_vertices else (f0, f1)
                label = batch.labels[a:b]
            else:
                label = int(batch.labels[s])
        texture = None
        if batch.texture is not None:
            t0, t1 = batch.texture.offsets[f0], batch.texture.offsets[f1]
            texture = TextureField(
                batch.texture.colors[t0:t1], batch.texture.barycentric[t0:t1], batch.texture.offsets[f0:f1 + 1] - t0
            )
        samples.append(Sample(mesh, batch.geometrics[f0:f1], label, texture))
    return samples


def concat_cluster_maps(cluster_maps):
    """Block-diagonal union of per-sample ClusterMaps."""
    shift_out = 0
    vcluster, iomap = [], []
    for cmap in cluster_maps:
        vcluster.append(cmap.vcluster + shift_out)
        iomap.append(cmap.iomap + shift_out)
        shift_out += cmap.n_out
    if not iomap:
        return ClusterMap.identity(0)
    return ClusterMap(np.concatenate(vcluster), np.concatenate(iomap))


def concat_meshes(meshes):
    offsets = offsets_from_counts([m.n_vertices for m in meshes])
    facets = np.concatenate([m.facets + start for m, start in zip(meshes, offsets[:-1])])
    return TriMesh(np.concatenate([m.vertices for m in meshes]), facets), offsets


@dataclass
class BatchHierarchy:
    """Per-level concatenated meshes, their vertex offsets and the maps between levels."""

    meshes: list = field(default_factory=list)
    vertex_offsets: list = field(default_factory=list)
    cluster_maps: list = field(default_factory=list)

    @property
    def depth(self):
        return len(self.meshes)


def merge_hierarchies(hierarchies):
    """Concatenate per-sample hierarchies level by level."""
    depth = hierarchies[0].depth
    if any(h.depth != depth for h in hierarchies):
        raise ArgumentError("sample hierarchies differ in depth")
    merged = BatchHierarchy()
    for level in range(depth):
        mesh, offsets = concat_meshes([h.meshes[level] for h in hierarchies])
        merged.meshes.append(mesh)
        merged.vertex_offsets.append(offsets)
        if level < depth - 1:
            merged.cluster_maps.append(concat_cluster_maps([h.cluster_maps[level] for h in hierarchies]))
    return merged


def sample_hierarchies(meshes, strides, max_iters=8, method="qem"):
    """Decimate every mesh on its own, in parallel."""
    return parallel_map(lambda mesh: build_hierarchy(mesh, strides, max_iters, method), meshes)


def batch_hierarchy(batch, strides, max_iters=8, method="qem", cache=None):
    """Mesh pyramid of a batch built sample by sample, so clusters never cross samples.

    cache may hold a MeshHierarchy per sample (list aligned with the batch) to skip decimation.
    """
    if cache is None:
        meshes = [s.mesh for s in split_batch(batch)]
        cache = sample_hierarchies(meshes, strides, max_iters, method)
    if len(cache) != batch.n_samples or not all(isinstance(h, MeshHierarchy) for h in cache):
        raise ArgumentError("hierarchy cache does not match the batch")
    return merge_hierarchies(cache)
