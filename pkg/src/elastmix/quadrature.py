"""Tensor-product Gauss-Legendre rules on the unit cube [0, 1]^d."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_01(npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1], exact for polynomials of degree 2*npts - 1."""
    if npts < 1:
        raise ValueError(f"need at least one quadrature point, got {npts}")
    x, w = np.polynomial.legendre.leggauss(npts)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=None)
def tensor_rule(npts: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product rule on [0, 1]^dim; weights sum to 1.

    Points have shape (npts**dim, dim) with axis 0 varying fastest, matching
    the grid module's entity enumeration.  dim == 0 yields the single-point
    rule with weight 1 so entity averages degenerate gracefully to point
    evaluation.
    """
    if dim < 0:
        raise ValueError(f"dim must be nonnegative, got {dim}")
    if dim == 0:
        pts = np.zeros((1, 0))
        wts = np.ones(1)
    else:
        nodes, weights = gauss_01(npts)
        axes = np.meshgrid(*([nodes] * dim), indexing="ij")
        pts = np.stack([a.reshape(-1, order="F") for a in axes], axis=-1)
        wts = np.ones(npts**dim)
        for a in np.meshgrid(*([weights] * dim), indexing="ij"):
            wts = wts * a.reshape(-1, order="F")
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts
