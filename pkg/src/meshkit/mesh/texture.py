"""Barycentric texture lattices and per-facet colour samples."""
import logging
from dataclasses import dataclass

import numpy as np

from meshkit.errors import ArgumentError, StructuralError
from meshkit.helpers.utility import offsets_from_counts, segment_ids
from meshkit.mesh.core import compute_normals_areas

logger = logging.getLogger(__name__)


@dataclass
class TextureField:
    """Flat colour samples with barycentric coordinates, grouped per facet by offsets."""

    colors: np.ndarray
    barycentric: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        self.colors = np.asarray(self.colors, dtype=np.float64).reshape(-1, 3)
        self.barycentric = np.asarray(self.barycentric, dtype=np.float64).reshape(-1, 3)
        self.offsets = np.asarray(self.offsets, dtype=np.int64)
        if len(self.colors) != len(self.barycentric) or self.offsets[-1] != len(self.colors):
            raise StructuralError("texture offsets do not match the sample count")

    @property
    def n_facets(self):
        return len(self.offsets) - 1

    def counts(self):
        return np.diff(self.offsets)

    def facet_ids(self):
        return segment_ids(self.offsets)

    def with_colors(self, colors):
        return TextureField(colors, self.barycentric, self.offsets)


def texture_resolution(area, a_min, a_max, alpha, beta):
    """Lattice order gamma and sample count K of a facet from its area."""
    if alpha < 0 or beta < 0:
        raise ArgumentError(f"alpha and beta must be >= 0, got {alpha}, {beta}")
    area = np.asarray(area, dtype=np.float64)
    if a_max > a_min:
        gamma = np.floor(alpha * (area - a_min) / (a_max - a_min)).astype(np.int64) + beta
    else:
        gamma = np.full(area.shape, beta, dtype=np.int64)
    count = (gamma + 1) * (gamma + 2) // 2
    if gamma.ndim == 0:
        return int(gamma), int(count)
    return gamma, count


def barycentric_lattice(gamma):
    """All (i, j, gamma-i-j) / gamma points of the uniform simplex grid."""
    if gamma < 0:
        raise ArgumentError(f"lattice order must be >= 0, got {gamma}")
    if gamma == 0:
        return np.full((1, 3), 1.0 / 3.0)
    rows = [(i, j, gamma - i - j) for i in range(gamma, -1, -1) for j in range(gamma - i, -1, -1)]
    return np.asarray(rows, dtype=np.float64) / gamma


def build_texture_field(mesh, vertex_colors, alpha=3, beta=1, areas=None):
    """Interpolate vertex colours on the area-dependent lattice of every facet."""
    vertex_colors = np.asarray(vertex_colors, dtype=np.float64)
    if vertex_colors.shape != (mesh.n_vertices, 3):
        raise StructuralError(f"expected ({mesh.n_vertices}, 3) vertex colours, got {vertex_colors.shape}")
    if areas is None:
        areas = compute_normals_areas(mesh).areas
    if len(areas) == 0:
        return TextureField(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(1, dtype=np.int64))
    gammas, counts = texture_resolution(areas, areas.min(), areas.max(), alpha, beta)
    lattices = {int(g): barycentric_lattice(int(g)) for g in np.unique(gammas)}
    bary = np.concatenate([lattices[int(g)] for g in gammas])
    offsets = offsets_from_counts(counts)
    owner = segment_ids(offsets)
    corner_colors = vertex_colors[mesh.facets[owner]]
    colors = np.einsum("kj,kjc->kc", bary, corner_colors)
    return TextureField(colors, bary, offsets)


def concat_textures(textures):
    colors = np.concatenate([t.colors for t in textures])
    bary = np.concatenate([t.barycentric for t in textures])
    counts = np.concatenate([t.counts() for t in textures])
    return TextureField(colors, bary, offsets_from_counts(counts))
