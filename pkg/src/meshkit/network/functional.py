"""Differentiable network ops on Tensors; each records itself on an optional GradTape."""
import numpy as np

from meshkit.conv.adjacency import segment_mean_matrix
from meshkit.conv.context import SavedContext, register_backward
from meshkit.conv.mesh_conv import facet2facet_forward, facet2vertex_forward, vertex2facet_forward
from meshkit.conv.pcloud import pcloud_conv_forward
from meshkit.errors import ArgumentError
from meshkit.harmonics.filters import HarmonicFilter
from meshkit.network.tape import apply
from meshkit.pooling import pool_forward, unpool_forward

BN_MOMENTUM = 0.9
BN_EPS = 1e-5


def _dense_forward(x, weight, bias):
    out = x @ weight
    if bias is not None:
        out = out + bias
    return out, SavedContext("dense", {"x": x, "weight": weight}, out.shape)


@register_backward("dense")
def _dense_backward(saved, upstream):
    return {
        "features": upstream @ saved["weight"].T,
        "weight": saved["x"].T @ upstream,
        "bias": upstream.sum(axis=0),
    }


def dense(tape, x, weight, bias=None):
    """1x1 convolution: x @ W (+ b)."""
    if x.shape[1] != weight.shape[0]:
        raise ArgumentError(f"dense layer expects {weight.shape[0]} input channels, got {x.shape[1]}")
    b = None if bias is None else bias.value
    return apply(tape, _dense_forward, {"features": x, "weight": weight, "bias": bias}, x.value, weight.value, b)


def _batch_norm_forward(x, gamma, beta, mean, var):
    inv_std = 1.0 / np.sqrt(var + BN_EPS)
    xhat = (x - mean) * inv_std
    out = gamma * xhat + beta
    return out, xhat, inv_std


def _batch_norm_train(x, gamma, beta):
    mean, var = x.mean(axis=0), x.var(axis=0)
    out, xhat, inv_std = _batch_norm_forward(x, gamma, beta, mean, var)
    ctx = SavedContext("batch_norm", {"xhat": xhat, "inv_std": inv_std, "gamma": gamma, "training": True}, out.shape)
    return out, ctx


def _batch_norm_eval(x, gamma, beta, mean, var):
    out, xhat, inv_std = _batch_norm_forward(x, gamma, beta, mean, var)
    ctx = SavedContext("batch_norm", {"xhat": xhat, "inv_std": inv_std, "gamma": gamma, "training": False}, out.shape)
    return out, ctx


@register_backward("batch_norm")
def _batch_norm_backward(saved, upstream):
    xhat, inv_std, gamma = saved["xhat"], saved["inv_std"], saved["gamma"]
    dxhat = upstream * gamma
    if saved["training"]:
        n = len(upstream)
        dx = inv_std / n * (n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))
    else:
        dx = dxhat * inv_std
    return {"features": dx, "gamma": (upstream * xhat).sum(axis=0), "beta": upstream.sum(axis=0)}


def batch_norm(tape, x, gamma, beta, running_mean, running_var, training):
    """Batch statistics in training (updating the running buffers in place), running ones otherwise."""
    inputs = {"features": x, "gamma": gamma, "beta": beta}
    if not training:
        return apply(tape, _batch_norm_eval, inputs, x.value, gamma.value, beta.value, running_mean, running_var)
    out = apply(tape, _batch_norm_train, inputs, x.value, gamma.value, beta.value)
    if len(x.value):
        running_mean *= BN_MOMENTUM
        running_mean += (1.0 - BN_MOMENTUM) * x.value.mean(axis=0)
        running_var *= BN_MOMENTUM
        running_var += (1.0 - BN_MOMENTUM) * x.value.var(axis=0)
    return out


def _relu_forward(x):
    mask = x > 0
    out = np.where(mask, x, 0.0)
    return out, SavedContext("relu", {"mask": mask}, out.shape)


@register_backward("relu")
def _relu_backward(saved, upstream):
    return {"features": upstream * saved["mask"]}


def relu(tape, x):
    return apply(tape, _relu_forward, {"features": x}, x.value)


def _concat_forward(parts):
    out = np.concatenate(parts, axis=1)
    widths = [p.shape[1] for p in parts]
    return out, SavedContext("concat", {"bounds": np.cumsum(widths)[:-1]}, out.shape)


@register_backward("concat")
def _concat_backward(saved, upstream):
    pieces = np.split(upstream, saved["bounds"], axis=1)
    return {f"part{k}": piece for k, piece in enumerate(pieces)}


def concat(tape, tensors):
    """Channel-wise concatenation."""
    inputs = {f"part{k}": t for k, t in enumerate(tensors)}
    return apply(tape, _concat_forward, inputs, [t.value for t in tensors])


def _add_forward(a, b):
    out = a + b
    return out, SavedContext("add", {}, out.shape)


@register_backward("add")
def _add_backward(saved, upstream):
    return {"a": upstream, "b": upstream}


def add(tape, a, b):
    return apply(tape, _add_forward, {"a": a, "b": b}, a.value, b.value)


def _segment_mean_forward(x, offsets):
    mean = segment_mean_matrix(offsets, np.arange(len(x)), len(x))
    out = np.asarray(mean @ x)
    return out, SavedContext("segment_mean", {"mean": mean}, out.shape)


@register_backward("segment_mean")
def _segment_mean_backward(saved, upstream):
    return {"features": np.asarray(saved["mean"].T @ upstream)}


def global_average_pool(tape, x, offsets):
    """Mean of the rows of every sample, one output row per sample."""
    return apply(tape, _segment_mean_forward, {"features": x}, x.value, offsets)


def _xent_forward(logits, labels):
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    log_probs = shifted - log_z[:, None]
    rows = np.arange(len(labels))
    loss = np.asarray(-log_probs[rows, labels].mean())
    return loss, SavedContext("softmax_xent", {"probs": np.exp(log_probs), "labels": labels}, loss.shape)


@register_backward("softmax_xent")
def _xent_backward(saved, upstream):
    grad = saved["probs"].copy()
    rows = np.arange(len(saved["labels"]))
    grad[rows, saved["labels"]] -= 1.0
    return {"logits": grad * (upstream / len(rows))}


def softmax_cross_entropy(tape, logits, labels):
    """Mean negative log-likelihood of integer labels under softmax(logits)."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (logits.shape[0],):
        raise ArgumentError(f"expected {logits.shape[0]} labels, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= logits.shape[1]):
        raise ArgumentError(f"labels must lie in [0, {logits.shape[1]})")
    return apply(tape, _xent_forward, {"logits": logits}, logits.value, labels)


def facet2vertex(tape, adjacency, x, normals, coefficients):
    filt = HarmonicFilter(coefficients.value)
    return apply(
        tape, facet2vertex_forward, {"features": x, "coefficients": coefficients}, adjacency, x.value, normals, filt
    )


def vertex2facet(tape, facets, x, coefficients):
    filt = HarmonicFilter(coefficients.value)
    return apply(tape, vertex2facet_forward, {"features": x, "coefficients": coefficients}, facets, x.value, filt)


def facet2facet(tape, texture, kernel):
    filt = HarmonicFilter(kernel.value)
    return apply(tape, facet2facet_forward, {"coefficients": kernel}, texture, filt)


def pcloud_conv(tape, neighbors, x, coefficients, c0, radius):
    filt = HarmonicFilter(coefficients.value, c0.value, radius)
    return apply(
        tape,
        pcloud_conv_forward,
        {"features": x, "coefficients": coefficients, "c0": c0},
        neighbors,
        x.value,
        filt,
        radius,
    )


def pool(tape, x, cluster_map, mode="max"):
    return apply(tape, pool_forward, {"features": x}, x.value, cluster_map, mode)


def unpool(tape, x, cluster_map):
    return apply(tape, unpool_forward, {"features": x}, x.value, cluster_map)
