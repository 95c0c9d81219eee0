"""Real spherical-harmonic basis of degree L.

Per degree l the basis emits the zonal term Y_l^0, then the cosine terms
Y_l^m(theta, 0) cos(m phi) for m = 1..l, then the sine terms
Y_l^m(theta, 0) sin(m phi) for m = 1..l. Checkpoints depend on this order.
The m > 0 terms carry no extra sqrt(2), so their squared norm on the sphere
is 1/2.
"""
import math

import numpy as np

from meshkit.errors import ArgumentError
from meshkit.harmonics.legendre import legendre_table


def basis_size(L):
    if L < 0:
        raise ArgumentError(f"degree must be >= 0, got {L}")
    return (L + 1) ** 2


def basis_index(l, m, kind="cos"):
    """Column of (l, m) in the basis; kind is 'cos' or 'sin' and ignored for m = 0."""
    if m == 0:
        return l * l
    return l * l + m if kind == "cos" else l * l + l + m


def sh_normalization(l, m):
    return math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - m) / math.factorial(l + m))


def real_sh_basis(L, theta, phi):
    """Evaluate all (L+1)^2 basis functions; output shape (*theta.shape, T)."""
    size = basis_size(L)
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    theta, phi = np.broadcast_arrays(theta, phi)
    table = legendre_table(L, np.clip(np.cos(theta), -1.0, 1.0))
    out = np.empty(theta.shape + (size,))
    for l in range(L + 1):
        out[..., basis_index(l, 0)] = sh_normalization(l, 0) * table[l, 0]
        for m in range(1, l + 1):
            radial = sh_normalization(l, m) * table[l, m]
            out[..., basis_index(l, m, "cos")] = radial * np.cos(m * phi)
            out[..., basis_index(l, m, "sin")] = radial * np.sin(m * phi)
    return out
