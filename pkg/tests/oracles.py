"""Independent brute-force references used to freeze expected values."""

import itertools

import numpy as np


def quantile_scan(positions, weights, q):
    """min{z : F(z) >= q} by walking the atoms in ascending order."""
    order = sorted(range(len(positions)), key=lambda i: positions[i])
    acc = 0.0
    for i in order:
        acc += weights[i]
        if acc >= q - 1e-15:
            return positions[i]
    return positions[order[-1]]


def w2_sq_quadrature(x, wx, y, wy, n=20_000):
    """Midpoint rule on the quantile-gap integral, independent of breakpoint merging.

    Accurate to O(range^2 * atoms / n); only for loose cross-checks.
    """
    u = (np.arange(n) + 0.5) / n
    qx = np.array([quantile_scan(x, wx, t) for t in u])
    qy = np.array([quantile_scan(y, wy, t) for t in u])
    return float(np.mean((qx - qy) ** 2))


def assignment_brute_force(a, b):
    """Minimal mean squared distance over all permutations (small m only)."""
    a = np.atleast_2d(np.asarray(a, dtype=float).T).T
    b = np.atleast_2d(np.asarray(b, dtype=float).T).T
    m = len(a)
    best = np.inf
    for perm in itertools.permutations(range(m)):
        best = min(best, float(np.mean(np.sum((a - b[list(perm)]) ** 2, axis=1))))
    return best
