"""Cluster-driven max/average pooling, unpooling and their gradients."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from meshkit.conv.context import SavedContext, register_backward
from meshkit.errors import ArgumentError, StateError

logger = logging.getLogger(__name__)

MODES = ("max", "avg")


@dataclass
class PoolContext:
    """What pool_backward needs: the map, the mode and, for max, the winning input rows."""

    cluster_map: object
    mode: str
    argmax: Optional[np.ndarray] = None
    output_shape: tuple = ()


def _check_rows(features, rows, what):
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != rows:
        raise ArgumentError(f"{what} expects {rows} feature rows, got shape {features.shape}")
    return features


def pool(features, cluster_map, mode="max"):
    """Per-cluster channel-wise max or mean; returns (pooled, PoolContext).

    Max ties go to the lowest input row.
    """
    if mode not in MODES:
        raise ArgumentError(f"unknown pooling mode {mode!r}, expected one of {MODES}")
    features = _check_rows(features, cluster_map.n_in, "pool")
    n_out, channels = cluster_map.n_out, features.shape[1]
    iomap = cluster_map.iomap
    if mode == "avg":
        out = np.zeros((n_out, channels))
        np.add.at(out, iomap, features)
        out /= cluster_map.sizes()[:, None]
        return out, PoolContext(cluster_map, mode, None, out.shape)

    out = np.full((n_out, channels), -np.inf)
    np.maximum.at(out, iomap, features)
    winners = features == out[iomap]
    rows = np.broadcast_to(np.arange(len(features))[:, None], features.shape)
    candidates = np.where(winners, rows, np.iinfo(np.int64).max)
    argmax = np.full((n_out, channels), np.iinfo(np.int64).max)
    np.minimum.at(argmax, iomap, candidates)
    return out, PoolContext(cluster_map, mode, argmax, out.shape)


def pool_backward(context, upstream):
    if not isinstance(context, PoolContext):
        raise StateError("pool_backward called without a pooling context")
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != tuple(context.output_shape):
        raise StateError(f"upstream gradient shape {upstream.shape} does not match pooled {context.output_shape}")
    cmap = context.cluster_map
    if context.mode == "avg":
        return upstream[cmap.iomap] / cmap.sizes()[cmap.iomap, None]
    grad = np.zeros((cmap.n_in, upstream.shape[1]))
    channels = np.broadcast_to(np.arange(upstream.shape[1]), upstream.shape)
    grad[context.argmax, channels] = upstream
    return grad


def unpool(features, cluster_map):
    """Every input vertex takes the features of its output vertex."""
    features = _check_rows(features, cluster_map.n_out, "unpool")
    return features[cluster_map.iomap]


def unpool_backward(cluster_map, upstream):
    """Per-cluster sum of the upstream rows."""
    upstream = _check_rows(upstream, cluster_map.n_in, "unpool_backward")
    grad = np.zeros((cluster_map.n_out, upstream.shape[1]))
    np.add.at(grad, cluster_map.iomap, upstream)
    return grad


def pool_forward(features, cluster_map, mode="max"):
    out, pctx = pool(features, cluster_map, mode)
    return out, SavedContext("pool", {"context": pctx}, out.shape)


def unpool_forward(features, cluster_map):
    out = unpool(features, cluster_map)
    return out, SavedContext("unpool", {"cluster_map": cluster_map}, out.shape)


@register_backward("pool")
def _pool_backward(saved, upstream):
    return {"features": pool_backward(saved["context"], upstream)}


@register_backward("unpool")
def _unpool_backward(saved, upstream):
    return {"features": unpool_backward(saved["cluster_map"], upstream)}
