"""Tensor-product Gauss-Legendre rules on the unit cube."""
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = ["gauss_rule", "DEFAULT_POINTS"]

#: points per direction; exact through polynomial degree 9
DEFAULT_POINTS = 5


@lru_cache(maxsize=None)
def _rule(npts, dim):
    x, w = leggauss(npts)
    x, w = (x + 1) / 2, w / 2
    if dim == 0:
        return np.zeros((1, 0)), np.ones(1)
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    pts = np.stack([g.ravel(order="F") for g in grids], axis=1)
    wts = np.prod(np.stack([g.ravel(order="F") for g in wgrids], axis=1), axis=1)
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def gauss_rule(npts=DEFAULT_POINTS, dim=1):
    """Points (n, dim) and weights (n,) on [0, 1]^dim."""
    return _rule(int(npts), int(dim))
