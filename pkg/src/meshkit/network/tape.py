"""Reverse-mode gradient tape over the closed set of meshkit ops."""
import logging

import numpy as np

from meshkit.conv.context import backward
from meshkit.errors import StateError

logger = logging.getLogger(__name__)


class Tensor:
    """An array that can receive a gradient from the tape."""

    __slots__ = ("value", "grad", "name")

    def __init__(self, value, name=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.name = name

    @property
    def shape(self):
        return self.value.shape

    def accumulate(self, grad):
        grad = np.asarray(grad, dtype=np.float64).reshape(self.value.shape)
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, shape={self.shape})"


class Parameter(Tensor):
    """A trainable tensor; group names the block it belongs to."""

    __slots__ = ("group",)

    def __init__(self, value, name=None, group=None):
        super().__init__(value, name)
        self.group = group

    @property
    def size(self):
        return self.value.size


class GradTape:
    """Ordered op records; backward replays them newest first.

    Each record keeps the op's SavedContext and the tensors its gradient keys
    flow into, so every parameter used once receives its gradient once.
    """

    def __init__(self):
        self.records = []
        self.done = False

    def record(self, value, ctx, inputs):
        out = Tensor(value)
        self.records.append((out, ctx, {k: t for k, t in inputs.items() if t is not None}))
        return out

    def backward(self, output, upstream=None):
        if self.done:
            raise StateError("tape was already replayed")
        if upstream is None:
            upstream = np.ones_like(output.value)
        output.accumulate(upstream)
        for out, ctx, inputs in reversed(self.records):
            if out.grad is None:
                continue
            grads = backward(ctx, out.grad)
            for key, tensor in inputs.items():
                tensor.accumulate(grads[key])
        self.done = True
        logger.debug("replayed %d tape records", len(self.records))


def apply(tape, forward, inputs, *args, **kwargs):
    """Run forward(*args, **kwargs) -> (value, ctx) and record it when a tape is given."""
    value, ctx = forward(*args, **kwargs)
    if tape is None:
        return Tensor(value)
    return tape.record(value, ctx, inputs)
