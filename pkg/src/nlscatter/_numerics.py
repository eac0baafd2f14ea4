"""Composite Gauss-Legendre panels and nonuniform finite differences."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as leg


@lru_cache(maxsize=16)
def gauss_panel(order: int):
    """Nodes, weights and cumulative-integration matrix on [-1, 1].

    S[i, j] = integral_{-1}^{x_i} l_j(t) dt for the Lagrange basis l_j on the
    Gauss nodes, so S @ g integrates the panel interpolant of g from the left
    panel edge to each node.
    """
    x, w = leg.leggauss(order)
    vander = leg.legvander(x, order - 1)
    integ = np.empty((order, order))
    for k in range(order):
        e = np.zeros(order)
        e[k] = 1.0
        integ[:, k] = leg.legval(x, leg.legint(e, lbnd=-1.0))
    S = integ @ np.linalg.inv(vander)
    return x, w, S


def fornberg_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights for derivatives 0..m at ``z`` on nodes ``x``.

    Fornberg's recursion (Math. Comp. 51, 1988); returns array (m+1, len(x)).
    """
    n = len(x)
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def fd_stencils(nodes: np.ndarray, width: int = 7):
    """Banded first/second derivative operators on arbitrary nodes.

    Returns (index, d1, d2) with index[i] the stencil node indices and d1[i],
    d2[i] the matching weights.  Stencils are centred where possible and
    one-sided near the ends.
    """
    n = len(nodes)
    half = width // 2
    index = np.empty((n, width), dtype=int)
    d1 = np.empty((n, width))
    d2 = np.empty((n, width))
    for i in range(n):
        start = min(max(i - half, 0), n - width)
        idx = np.arange(start, start + width)
        c = fornberg_weights(nodes[i], nodes[idx], 2)
        index[i] = idx
        d1[i] = c[1]
        d2[i] = c[2]
    return index, d1, d2


def apply_stencil(index: np.ndarray, weights: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Apply banded weights along the last axis of ``values``."""
    return np.sum(values[..., index] * weights, axis=-1)


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inner = (t > 0) & (t < 1)
    ti = t[inner]
    a = np.exp(-1.0 / ti)
    b = np.exp(-1.0 / (1.0 - ti))
    out[inner] = a / (a + b)
    out[t >= 1] = 1.0
    return out
