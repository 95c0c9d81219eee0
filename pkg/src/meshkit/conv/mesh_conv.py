"""facet2vertex, vertex2facet, facet2facet and vertex2vertex convolutions.

Filter angles are taken from the geometry and treated as constants: no
gradient flows into vertex positions, normals or barycentric coordinates.
"""
import logging

import numpy as np

from meshkit.conv.adjacency import VertexFacetAdjacency, segment_mean_matrix
from meshkit.conv.context import SavedContext, backward, register_backward
from meshkit.errors import ArgumentError, StructuralError
from meshkit.harmonics.angles import barycentric_to_angles, direction_to_angles
from meshkit.harmonics.basis import real_sh_basis
from meshkit.mesh.core import compute_normals_areas

logger = logging.getLogger(__name__)

# vertex anchors of a facet on the sphere: (pi/2, 0), (pi/2, pi/2), (0, 0)
ANCHOR_THETA = np.array([np.pi / 2, np.pi / 2, 0.0])
ANCHOR_PHI = np.array([0.0, np.pi / 2, 0.0])


def _check_depthwise(features, filt, rows, what):
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != rows:
        raise StructuralError(f"{what} features must have {rows} rows, got shape {features.shape}")
    if filt.coefficients.ndim != 2 or filt.coefficients.shape[1] != features.shape[1]:
        raise ArgumentError(
            f"filter channels {filt.coefficients.shape[1:]} do not match {features.shape[1]} feature channels"
        )
    return features


def facet2vertex_forward(adjacency, facet_feats, facet_normals, filt):
    facet_feats = _check_depthwise(facet_feats, filt, adjacency.n_facets, "facet")
    theta, phi = direction_to_angles(facet_normals)
    basis = real_sh_basis(filt.degree, theta, phi)
    weights = basis @ filt.coefficients
    mean = adjacency.mean_operator()
    out = np.asarray(mean @ (weights * facet_feats))
    ctx = SavedContext("facet2vertex", {"mean": mean, "basis": basis, "weights": weights, "features": facet_feats}, out.shape)
    return out, ctx


def facet2vertex(adjacency, facet_feats, facet_normals, filt):
    """g_v = 1/|N(v)| sum_f F(theta_f, phi_f) * h_f, angles from the facet normals."""
    return facet2vertex_forward(adjacency, facet_feats, facet_normals, filt)[0]


@register_backward("facet2vertex")
def _facet2vertex_backward(saved, upstream):
    spread = np.asarray(saved["mean"].T @ upstream)
    grad_weights = saved["features"] * spread
    return {
        "features": saved["weights"] * spread,
        "coefficients": saved["basis"].T @ grad_weights,
    }


def anchor_basis(degree):
    return real_sh_basis(degree, ANCHOR_THETA, ANCHOR_PHI)


def vertex2facet_forward(facets, vertex_feats, filt):
    facets = np.asarray(facets, dtype=np.int64).reshape(-1, 3)
    vertex_feats = np.asarray(vertex_feats, dtype=np.float64)
    if vertex_feats.ndim != 2:
        raise StructuralError(f"vertex features must be 2-D, got shape {vertex_feats.shape}")
    _check_depthwise(vertex_feats, filt, vertex_feats.shape[0], "vertex")
    if facets.size and (facets.min() < 0 or facets.max() >= len(vertex_feats)):
        raise StructuralError(f"facet index outside [0, {len(vertex_feats)})")
    basis = anchor_basis(filt.degree)
    weights = basis @ filt.coefficients
    out = np.zeros((len(facets), vertex_feats.shape[1]))
    for corner in range(3):
        out += weights[corner] * vertex_feats[facets[:, corner]]
    ctx = SavedContext(
        "vertex2facet",
        {"facets": facets, "basis": basis, "weights": weights, "features": vertex_feats},
        out.shape,
    )
    return out, ctx


def vertex2facet(facets, vertex_feats, filt):
    """g_f = F(pi/2, 0) h_1 + F(pi/2, pi/2) h_2 + F(0, 0) h_3."""
    return vertex2facet_forward(facets, vertex_feats, filt)[0]


@register_backward("vertex2facet")
def _vertex2facet_backward(saved, upstream):
    facets, weights, feats = saved["facets"], saved["weights"], saved["features"]
    grad_feats = np.zeros_like(feats)
    grad_weights = np.zeros_like(weights)
    for corner in range(3):
        np.add.at(grad_feats, facets[:, corner], weights[corner] * upstream)
        grad_weights[corner] = (feats[facets[:, corner]] * upstream).sum(axis=0)
    return {"features": grad_feats, "coefficients": saved["basis"].T @ grad_weights}


def facet2facet_forward(texture, kernel):
    """kernel: HarmonicFilter with coefficients (T, 3, C_out)."""
    coefficients = kernel.coefficients
    if coefficients.ndim != 3 or coefficients.shape[1] != 3:
        raise ArgumentError(f"facet2facet kernel must be (T, 3, C_out), got {coefficients.shape}")
    size, _, c_out = coefficients.shape
    empty = texture.counts() == 0
    if empty.any():
        logger.warning("%d facet(s) without texture samples produce zeros", int(empty.sum()))
    if len(texture.colors):
        theta, phi = barycentric_to_angles(texture.barycentric)
        basis = real_sh_basis(kernel.degree, theta, phi)
    else:
        basis = np.zeros((0, size))
    mean = segment_mean_matrix(texture.offsets, np.arange(len(texture.colors)), len(texture.colors))
    products = (basis[:, :, None] * texture.colors[:, None, :]).reshape(len(basis), size * 3)
    pooled = np.asarray(mean @ products)
    flat_kernel = coefficients.reshape(size * 3, c_out)
    out = pooled @ flat_kernel
    ctx = SavedContext(
        "facet2facet",
        {"mean": mean, "basis": basis, "pooled": pooled, "kernel": flat_kernel, "shape": coefficients.shape},
        out.shape,
    )
    return out, ctx


def facet2facet(texture, kernel):
    """g_f[c] = 1/K sum_k <F_c(theta_k, phi_k), h_k>, angles from the projected barycentric coordinates."""
    return facet2facet_forward(texture, kernel)[0]


@register_backward("facet2facet")
def _facet2facet_backward(saved, upstream):
    size = saved["shape"][0]
    grad_pooled = upstream @ saved["kernel"].T
    grad_products = np.asarray(saved["mean"].T @ grad_pooled).reshape(-1, size, 3)
    return {
        "colors": np.einsum("ktj,kt->kj", grad_products, saved["basis"]),
        "coefficients": (saved["pooled"].T @ upstream).reshape(saved["shape"]),
    }


def vertex2vertex_forward(mesh, vertex_feats, filter_v2f, filter_f2v, adjacency=None, normals=None):
    if adjacency is None:
        adjacency = VertexFacetAdjacency.from_facets(mesh.facets, mesh.n_vertices)
    if normals is None:
        normals = compute_normals_areas(mesh).normals
    facet_feats, ctx_v2f = vertex2facet_forward(mesh.facets, vertex_feats, filter_v2f)
    out, ctx_f2v = facet2vertex_forward(adjacency, facet_feats, normals, filter_f2v)
    ctx = SavedContext("vertex2vertex", {"v2f": ctx_v2f, "f2v": ctx_f2v, "facet_features": facet_feats}, out.shape)
    return out, ctx


def vertex2vertex(mesh, vertex_feats, filter_v2f, filter_f2v, adjacency=None, normals=None):
    """vertex2facet followed by facet2vertex."""
    return vertex2vertex_forward(mesh, vertex_feats, filter_v2f, filter_f2v, adjacency, normals)[0]


@register_backward("vertex2vertex")
def _vertex2vertex_backward(saved, upstream):
    grads_f2v = backward(saved["f2v"], upstream)
    grads_v2f = backward(saved["v2f"], grads_f2v["features"])
    return {
        "features": grads_v2f["features"],
        "facet_features": grads_f2v["features"],
        "coefficients_v2f": grads_v2f["coefficients"],
        "coefficients_f2v": grads_f2v["coefficients"],
    }
