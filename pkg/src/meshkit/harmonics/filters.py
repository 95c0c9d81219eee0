"""Continuous filters F(theta, phi) and F(theta, phi, r) as truncated harmonic expansions."""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from meshkit.errors import ArgumentError, StructuralError
from meshkit.harmonics.basis import basis_size, real_sh_basis

logger = logging.getLogger(__name__)


@dataclass
class HarmonicFilter:
    """Coefficients (T, ...) of one continuous kernel, one row per basis function.

    Depth-wise filters use (T, C); the facet2facet kernel uses (T, 3, C_out).
    The radial variant adds a constant c0 (one value per channel) and a radius rho.
    """

    coefficients: np.ndarray
    c0: Optional[np.ndarray] = None
    radius: Optional[float] = None

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=np.float64)
        if self.coefficients.ndim < 1:
            raise StructuralError("filter coefficients need a basis axis")
        degree = math.isqrt(self.coefficients.shape[0]) - 1
        if basis_size(degree) != self.coefficients.shape[0]:
            raise StructuralError(
                f"coefficient rows ({self.coefficients.shape[0]}) are not a square (L+1)^2"
            )
        self.degree = degree
        if self.c0 is not None:
            self.c0 = np.asarray(self.c0, dtype=np.float64)
            if self.c0.shape != self.coefficients.shape[1:]:
                raise StructuralError("c0 must have one value per channel")
        if self.radius is not None and not self.radius > 0:
            raise ArgumentError(f"radius must be > 0, got {self.radius}")

    @property
    def size(self):
        return self.coefficients.shape[0]

    @property
    def channels(self):
        return self.coefficients.shape[1:]

    @classmethod
    def zeros(cls, degree, channels, radial=False, radius=None):
        shape = (basis_size(degree),) + tuple(np.atleast_1d(channels))
        c0 = np.zeros(shape[1:]) if radial else None
        return cls(np.zeros(shape), c0, radius)


def weights_from_basis(basis, coefficients):
    """Contract basis values (..., T) with coefficients (T, ...)."""
    return np.tensordot(basis, coefficients, axes=([-1], [0]))


def eval_filter(filt, theta, phi):
    basis = real_sh_basis(filt.degree, theta, phi)
    return weights_from_basis(basis, filt.coefficients)


def radial_profile(r, radius):
    """Z(r) = r / rho, clamping r > rho to rho (returned as a flag mask)."""
    r = np.asarray(r, dtype=np.float64)
    clamped = r > radius
    if np.any(clamped):
        logger.warning("clamping %d radius value(s) above rho=%g", int(np.count_nonzero(clamped)), radius)
        r = np.minimum(r, radius)
    return r / radius, clamped


class RadialValues(NamedTuple):
    values: np.ndarray
    clamped: np.ndarray


def eval_radial_filter(filt, theta, phi, r):
    """F(theta, phi, r) = F(theta, phi) Z(r) + c0 (1 - Z(r)); clamped marks r > rho."""
    if filt.c0 is None or filt.radius is None:
        raise ArgumentError("radial evaluation needs a filter with c0 and radius")
    z, clamped = radial_profile(r, filt.radius)
    z = np.asarray(z)[(...,) + (None,) * filt.coefficients[0].ndim]
    return RadialValues(eval_filter(filt, theta, phi) * z + filt.c0 * (1.0 - z), clamped)
