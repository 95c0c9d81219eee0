"""Fixed-radius neighbour search on a uniform grid and the radial point convolution."""
import itertools
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from meshkit.conv.adjacency import segment_mean_matrix
from meshkit.conv.context import SavedContext, register_backward
from meshkit.errors import ArgumentError, StructuralError
from meshkit.harmonics.angles import direction_to_angles
from meshkit.harmonics.basis import real_sh_basis
from meshkit.harmonics.filters import radial_profile
from meshkit.helpers.utility import offsets_from_counts

logger = logging.getLogger(__name__)

_CELL_OFFSETS = np.array(list(itertools.product((-1, 0, 1), repeat=3)), dtype=np.int64)


@dataclass
class NeighborList:
    """All (query, point) pairs within radius, grouped by query, points ascending.

    displacement is point - query and distance its Euclidean norm.
    """

    query_ids: np.ndarray
    point_ids: np.ndarray
    displacement: np.ndarray
    distance: np.ndarray
    offsets: np.ndarray
    radius: float

    @property
    def n_queries(self):
        return len(self.offsets) - 1

    def counts(self):
        return np.diff(self.offsets)

    def neighbors_of(self, query):
        return self.point_ids[self.offsets[query]:self.offsets[query + 1]]


def radius_search(points, queries, radius):
    """Every point within distance radius of every query, via grid cells of edge radius."""
    if not radius > 0:
        raise ArgumentError(f"search radius must be > 0, got {radius}")
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    queries = np.asarray(queries, dtype=np.float64).reshape(-1, 3)
    n_queries = len(queries)
    if len(points) == 0 or n_queries == 0:
        empty = np.zeros(0, dtype=np.int64)
        return NeighborList(empty, empty.copy(), np.zeros((0, 3)), np.zeros(0), np.zeros(n_queries + 1, dtype=np.int64), radius)

    origin = np.minimum(points.min(axis=0), queries.min(axis=0))
    # one spare cell on each side keeps neighbour cells inside the grid
    point_cells = np.floor((points - origin) / radius).astype(np.int64) + 1
    query_cells = np.floor((queries - origin) / radius).astype(np.int64) + 1
    dims = np.maximum(point_cells.max(axis=0), query_cells.max(axis=0)) + 2

    def linear(cells):
        return cells[:, 0] + dims[0] * (cells[:, 1] + dims[1] * cells[:, 2])

    point_keys = linear(point_cells)
    order = np.argsort(point_keys, kind="stable")
    sorted_keys = point_keys[order]

    found_q, found_p = [], []
    for offset in _CELL_OFFSETS:
        keys = linear(query_cells + offset)
        lo = np.searchsorted(sorted_keys, keys, side="left")
        hi = np.searchsorted(sorted_keys, keys, side="right")
        counts = hi - lo
        total = int(counts.sum())
        if total == 0:
            continue
        q = np.repeat(np.arange(n_queries), counts)
        start = offsets_from_counts(counts)[:-1]
        slot = np.arange(total) - np.repeat(start, counts) + np.repeat(lo, counts)
        found_q.append(q)
        found_p.append(order[slot])

    if not found_q:
        q_ids = p_ids = np.zeros(0, dtype=np.int64)
    else:
        q_ids, p_ids = np.concatenate(found_q), np.concatenate(found_p)
    displacement = points[p_ids] - queries[q_ids]
    distance = np.sqrt(np.sum(displacement * displacement, axis=1))
    keep = distance <= radius
    q_ids, p_ids, displacement, distance = q_ids[keep], p_ids[keep], displacement[keep], distance[keep]
    ranking = np.lexsort((p_ids, q_ids))
    q_ids, p_ids = q_ids[ranking], p_ids[ranking]
    offsets = offsets_from_counts(np.bincount(q_ids, minlength=n_queries))
    return NeighborList(q_ids, p_ids, displacement[ranking], distance[ranking], offsets, radius)


def batched_radius_search(points, vertex_offsets, radius):
    """Radius search restricted to each sample of a concatenated point set."""
    points = np.asarray(points, dtype=np.float64)
    parts = []
    for start, stop in zip(vertex_offsets[:-1], vertex_offsets[1:]):
        local = points[start:stop]
        parts.append((start, radius_search(local, local, radius)))
    q_ids = np.concatenate([nl.query_ids + start for start, nl in parts]) if parts else np.zeros(0, dtype=np.int64)
    p_ids = np.concatenate([nl.point_ids + start for start, nl in parts]) if parts else np.zeros(0, dtype=np.int64)
    displacement = np.concatenate([nl.displacement for _, nl in parts]) if parts else np.zeros((0, 3))
    distance = np.concatenate([nl.distance for _, nl in parts]) if parts else np.zeros(0)
    offsets = offsets_from_counts(np.bincount(q_ids, minlength=len(points)))
    return NeighborList(q_ids, p_ids, displacement, distance, offsets, radius)


def _resolve_radius(neighbors, filt, radius):
    return radius or filt.radius or neighbors.radius


def pcloud_conv_forward(neighbors, point_feats, filt, radius=None):
    if filt.c0 is None:
        raise ArgumentError("point convolution needs a filter with a radial constant c0")
    radius = _resolve_radius(neighbors, filt, radius)
    point_feats = np.asarray(point_feats, dtype=np.float64)
    if point_feats.ndim != 2 or filt.coefficients.shape[1:] != point_feats.shape[1:]:
        raise ArgumentError(
            f"filter channels {filt.coefficients.shape[1:]} do not match features of shape {point_feats.shape}"
        )
    if len(neighbors.point_ids) and neighbors.point_ids.max() >= len(point_feats):
        raise StructuralError("neighbour index outside the point features")
    lonely = neighbors.counts() == 0
    if lonely.any():
        logger.warning("%d query point(s) without neighbours produce zeros", int(lonely.sum()))

    r = neighbors.distance
    at_query = r == 0.0
    directions = np.empty_like(neighbors.displacement)
    directions[~at_query] = neighbors.displacement[~at_query] / r[~at_query, None]
    directions[at_query] = (0.0, 0.0, 1.0)
    theta, phi = direction_to_angles(directions)
    basis = real_sh_basis(filt.degree, theta, phi)
    basis[at_query] = 0.0
    z, _ = radial_profile(r, radius)
    weights = (basis @ filt.coefficients) * z[:, None] + filt.c0 * (1.0 - z)[:, None]
    gathered = point_feats[neighbors.point_ids]
    mean = segment_mean_matrix(neighbors.offsets, np.arange(len(r)), len(r))
    out = np.asarray(mean @ (weights * gathered))
    ctx = SavedContext(
        "pcloud_conv",
        {
            "mean": mean,
            "basis": basis,
            "z": z,
            "weights": weights,
            "gathered": gathered,
            "point_ids": neighbors.point_ids,
            "n_points": len(point_feats),
        },
        out.shape,
    )
    return out, ctx


class PointConvOutput(NamedTuple):
    features: np.ndarray
    empty: np.ndarray
    clamped: np.ndarray


def pcloud_conv(neighbors, point_feats, filt, radius=None):
    """g_q = 1/|N(q)| sum_p F(theta_qp, phi_qp, r_qp) * h_p; a neighbour at r = 0 is weighted by c0.

    empty flags queries without neighbours (zero rows); clamped flags pairs beyond the radius.
    """
    features, _ = pcloud_conv_forward(neighbors, point_feats, filt, radius)
    clamped = neighbors.distance > _resolve_radius(neighbors, filt, radius)
    return PointConvOutput(features, neighbors.counts() == 0, clamped)


@register_backward("pcloud_conv")
def _pcloud_conv_backward(saved, upstream):
    spread = np.asarray(saved["mean"].T @ upstream)
    grad_feats = np.zeros((saved["n_points"], upstream.shape[1]))
    np.add.at(grad_feats, saved["point_ids"], saved["weights"] * spread)
    grad_weights = saved["gathered"] * spread
    z = saved["z"][:, None]
    return {
        "features": grad_feats,
        "coefficients": saved["basis"].T @ (grad_weights * z),
        "c0": (grad_weights * (1.0 - z)).sum(axis=0),
    }
