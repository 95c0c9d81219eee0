import numpy as np


def learning_rate(epoch, base=0.001, decay=0.98):
    """Exponential decay applied once per finished epoch."""
    return base * decay ** epoch


class Adam:
    """Adam with optional L2 weight decay added to the gradient."""

    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8, weight_decay=0.0):
        self.params = list(params)
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.weight_decay = weight_decay
        self.m = {p.name: np.zeros_like(p.value) for p in self.params}
        self.v = {p.name: np.zeros_like(p.value) for p in self.params}
        self.t = 0

    def step(self, lr):
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for p in self.params:
            if p.grad is None:
                continue
            grad = p.grad + self.weight_decay * p.value if self.weight_decay else p.grad
            m, v = self.m[p.name], self.v[p.name]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            p.value -= lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
