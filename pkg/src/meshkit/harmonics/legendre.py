"""Associated Legendre functions without the Condon-Shortley phase."""
import numpy as np

from meshkit.errors import ArgumentError


def assoc_legendre(l, m, x):
    """P_l^m(x) by upward recurrence in l, seeded by the double-factorial diagonal.

    P_m^m = (2m-1)!! (1-x^2)^(m/2), P_{m+1}^m = x (2m+1) P_m^m,
    (l-m) P_l^m = x (2l-1) P_{l-1}^m - (l+m-1) P_{l-2}^m.
    """
    if not 0 <= m <= l:
        raise ArgumentError(f"need 0 <= m <= l, got l={l}, m={m}")
    x = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(x) > 1.0):
        raise ArgumentError("|x| must be <= 1")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)

    somx2 = np.sqrt((1.0 - x) * (1.0 + x))
    pmm = np.ones_like(x)
    fact = 1.0
    for _ in range(m):
        pmm = pmm * fact * somx2
        fact += 2.0
    if l == m:
        result = pmm
    else:
        pmmp1 = x * (2 * m + 1) * pmm
        if l == m + 1:
            result = pmmp1
        else:
            for ll in range(m + 2, l + 1):
                pll = (x * (2 * ll - 1) * pmmp1 - (ll + m - 1) * pmm) / (ll - m)
                pmm, pmmp1 = pmmp1, pll
            result = pmmp1
    return float(result[0]) if scalar else result


def legendre_table(L, x):
    """All P_l^m(x) for 0 <= m <= l <= L, shape (L+1, L+1, *x.shape); entries with m > l are 0."""
    if L < 0:
        raise ArgumentError(f"degree must be >= 0, got {L}")
    x = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(x) > 1.0):
        raise ArgumentError("|x| must be <= 1")
    table = np.zeros((L + 1, L + 1) + x.shape)
    somx2 = np.sqrt((1.0 - x) * (1.0 + x))
    diag = np.ones_like(x)
    for m in range(L + 1):
        if m > 0:
            diag = diag * (2 * m - 1) * somx2
        table[m, m] = diag
        if m + 1 <= L:
            table[m + 1, m] = x * (2 * m + 1) * diag
        for l in range(m + 2, L + 1):
            table[l, m] = (x * (2 * l - 1) * table[l - 1, m] - (l + m - 1) * table[l - 2, m]) / (l - m)
    return table
