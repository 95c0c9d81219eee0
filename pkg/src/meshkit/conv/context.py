"""Saved forward state and reverse-mode dispatch for the differentiable kernels."""
from dataclasses import dataclass, field

from meshkit.errors import StateError

_BACKWARD = {}


@dataclass
class SavedContext:
    op: str
    saved: dict = field(default_factory=dict)
    output_shape: tuple = ()


def register_backward(op):
    def wrap(fn):
        _BACKWARD[op] = fn
        return fn

    return wrap


def backward(ctx, upstream):
    """Gradients of every input and filter coefficient of the op that produced ctx."""
    if ctx is None or not isinstance(ctx, SavedContext):
        raise StateError("backward called without a saved forward context")
    fn = _BACKWARD.get(ctx.op)
    if fn is None:
        raise StateError(f"no backward registered for op {ctx.op!r}")
    if tuple(upstream.shape) != tuple(ctx.output_shape):
        raise StateError(
            f"upstream gradient shape {tuple(upstream.shape)} does not match {ctx.op} output {tuple(ctx.output_shape)}"
        )
    return fn(ctx.saved, upstream)
