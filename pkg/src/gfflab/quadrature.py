"""Fixed-node Gauss quadrature helpers shared across the package.

All rules are deterministic for a given node count; node/weight tables are
cached so repeated calls reuse the same arrays.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=128)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=32)
def _hermgauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.hermite.hermgauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    if n < 1:
        raise ValueError("need at least one quadrature node")
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def composite_legendre(
    a: float, b: float, panels: int, nodes_per_panel: int = 16
) -> tuple[np.ndarray, np.ndarray]:
    """Panel-wise Gauss-Legendre rule on [a, b] (nodes sorted ascending)."""
    edges = np.linspace(a, b, panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(lo, hi, nodes_per_panel)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def gauss_hermite(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for integrals against exp(-x^2) on the line."""
    return _hermgauss(n)


def gauss_hermite_unweighted(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite rule with the weight folded in, for plain integrals
    of functions that already decay like a Gaussian.

    The modified weights are w_i * exp(x_i^2); both factors stay inside
    double-precision range only for n <= 350, so larger requests are
    rejected rather than silently overflowing.
    """
    if n > 350:
        raise ValueError("unweighted Gauss-Hermite overflows beyond 350 nodes")
    x, w = _hermgauss(n)
    return x, w * np.exp(x * x)


def half_line_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule for integrals over (0, inf) via the map t = s / (1 - s)."""
    s, w = gauss_legendre(0.0, 1.0, n)
    t = s / (1.0 - s)
    return t, w / (1.0 - s) ** 2


def tensor_grid(axes: list[tuple[np.ndarray, np.ndarray]]) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product rule from per-axis (nodes, weights) pairs.

    Returns points of shape (n_total, d) and the combined weights.
    """
    mesh = np.meshgrid(*[x for x, _ in axes], indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=-1)
    w = axes[0][1]
    for _, wi in axes[1:]:
        w = np.multiply.outer(w, wi)
    return pts, w.reshape(-1)
