import logging

import numpy as np

from meshkit.errors import ArgumentError

logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-6


def direction_to_angles(v):
    """Polar angle theta in [0, pi] and azimuth phi in [0, 2 pi) of unit vectors (..., 3).

    Non-unit inputs with norm in [0.5, 2] are normalised with a warning; at the
    poles phi is 0.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != 3:
        raise ArgumentError(f"expected 3-vectors, got shape {v.shape}")
    norm = np.linalg.norm(v, axis=-1)
    off = np.abs(norm - 1.0) > UNIT_TOLERANCE
    if np.any(off):
        if np.any((norm[off] < 0.5) | (norm[off] > 2.0)):
            raise ArgumentError("direction vector norm outside [0.5, 2]")
        logger.warning("normalising %d non-unit direction(s)", int(np.count_nonzero(off)))
        v = np.where(off[..., None], v / norm[..., None], v)
    z = np.clip(v[..., 2], -1.0, 1.0)
    theta = np.arccos(z)
    phi = np.arctan2(v[..., 1], v[..., 0])
    phi = np.where(phi < 0.0, phi + 2.0 * np.pi, phi)
    phi = np.where(phi >= 2.0 * np.pi, 0.0, phi)
    phi = np.where(np.abs(z) == 1.0, 0.0, phi)
    return theta, phi


def barycentric_to_angles(xi):
    """Project simplex points (..., 3) on the first octant of the unit sphere.

    The corners (1,0,0), (0,1,0), (0,0,1) land on (pi/2, 0), (pi/2, pi/2), (0, 0).
    """
    xi = np.asarray(xi, dtype=np.float64)
    norm = np.linalg.norm(xi, axis=-1)
    if np.any(norm == 0.0):
        raise ArgumentError("barycentric coordinates must not be all zero")
    return direction_to_angles(xi / norm[..., None])
