"""Shape normalisation and random training augmentation of samples."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

from meshkit.errors import ArgumentError
from meshkit.helpers.batching import Sample
from meshkit.mesh.core import TriMesh, compute_facet_geometrics
from meshkit.mesh.texture import TextureField

logger = logging.getLogger(__name__)

MIN_VERTICES = 4
ROTATIONS = (None, "z", "free")


def normalize_shape(mesh):
    """Centre the vertex centroid at the origin and scale the largest vertex norm to 1."""
    vertices = mesh.vertices - mesh.vertices.mean(axis=0) if mesh.n_vertices else mesh.vertices.copy()
    radius = np.linalg.norm(vertices, axis=1).max() if mesh.n_vertices else 0.0
    if radius > 0:
        vertices = vertices / radius
    return TriMesh(vertices, mesh.facets.copy())


@dataclass
class AugmentConfig:
    """Random transforms applied to training samples; the defaults disable everything."""

    flip: bool = False
    scale: Optional[tuple] = None
    shift: float = 0.0
    rotation: Optional[str] = None
    vertex_dropout: float = 0.0
    facet_dropout: float = 0.0
    color_jitter: float = 0.0

    def __post_init__(self):
        if self.rotation not in ROTATIONS:
            raise ArgumentError(f"rotation must be one of {ROTATIONS}, got {self.rotation!r}")
        for name in ("vertex_dropout", "facet_dropout"):
            rate = getattr(self, name)
            if not 0.0 <= rate < 1.0:
                raise ArgumentError(f"{name} must be in [0, 1), got {rate}")
        if self.scale is not None:
            low, high = self.scale
            if not 0 < low <= high:
                raise ArgumentError(f"scale range must satisfy 0 < low <= high, got {self.scale}")
            self.scale = (float(low), float(high))
        if self.shift < 0 or self.color_jitter < 0:
            raise ArgumentError("shift and color_jitter must be >= 0")

    @property
    def enabled(self):
        return bool(
            self.flip
            or self.scale is not None
            or self.shift
            or self.rotation
            or self.vertex_dropout
            or self.facet_dropout
            or self.color_jitter
        )


def z_rotation(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _subset(sample, mesh, keep_vertices, keep_facets, flipped):
    """Rebuild a sample on a transformed mesh, carrying labels and texture along."""
    label = sample.label
    if sample.dense:
        label = np.asarray(label)
        if len(label) == sample.mesh.n_vertices and keep_vertices is not None:
            label = label[keep_vertices]
        elif len(label) == sample.mesh.n_facets and keep_facets is not None:
            label = label[keep_facets]
    texture = sample.texture
    if texture is not None:
        counts = texture.counts()
        rows = np.arange(texture.n_facets) if keep_facets is None else keep_facets
        starts = texture.offsets[rows]
        take = np.concatenate([np.arange(a, a + n) for a, n in zip(starts, counts[rows])]) if len(rows) else np.zeros(0, dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(counts[rows])])
        bary = texture.barycentric[take]
        if flipped:
            bary = bary[:, [0, 2, 1]]
        texture = TextureField(texture.colors[take], bary, offsets)
    with_height = sample.geometrics.shape[1] == 12
    return Sample(mesh, compute_facet_geometrics(mesh, with_height), label, texture)


def augment(sample, config, rng):
    """Random flip, scale, shift, rotation, dropout and colour jitter of one sample."""
    if not config.enabled:
        return sample
    vertices = sample.mesh.vertices.copy()
    facets = sample.mesh.facets.copy()
    flipped = False

    if config.flip:
        signs = np.where(rng.random(3) < 0.5, -1.0, 1.0)
        signs[2] = 1.0
        vertices *= signs
        # an odd number of mirrored axes turns facets inside out
        flipped = np.prod(signs) < 0
        if flipped:
            facets = facets[:, [0, 2, 1]]
    if config.scale is not None:
        vertices *= rng.uniform(config.scale[0], config.scale[1], size=3)
    if config.rotation == "z":
        vertices = vertices @ z_rotation(rng.uniform(0.0, 2.0 * np.pi)).T
    elif config.rotation == "free":
        vertices = Rotation.random(random_state=rng).apply(vertices)
    if config.shift:
        vertices += rng.uniform(-config.shift, config.shift, size=3)

    keep_vertices = keep_facets = None
    n = len(vertices)
    if config.vertex_dropout:
        mask = rng.random(n) >= config.vertex_dropout
        if mask.sum() < MIN_VERTICES:
            logger.debug("vertex dropout would leave %d vertices, skipped", int(mask.sum()))
        else:
            keep_vertices = np.flatnonzero(mask)
            keep_facets = np.flatnonzero(mask[facets].all(axis=1))
            remap = np.full(n, -1, dtype=np.int64)
            remap[keep_vertices] = np.arange(len(keep_vertices))
            vertices = vertices[keep_vertices]
            facets = remap[facets[keep_facets]]
    if config.facet_dropout:
        mask = rng.random(len(facets)) >= config.facet_dropout
        kept = np.flatnonzero(mask)
        keep_facets = kept if keep_facets is None else keep_facets[kept]
        facets = facets[kept]

    augmented = _subset(sample, TriMesh(vertices, facets), keep_vertices, keep_facets, flipped)
    if config.color_jitter and augmented.texture is not None:
        noise = rng.normal(0.0, config.color_jitter, size=augmented.texture.colors.shape)
        augmented.texture = augmented.texture.with_colors(np.clip(augmented.texture.colors + noise, 0.0, 1.0))
    return augmented
