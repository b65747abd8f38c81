"""Analytic fields evaluated on batches of physical points."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy as sp

__all__ = ["SmoothField", "symbols"]


def symbols(dim):
    return sp.symbols("x y z")[:dim]


def _lambdify_array(exprs, syms):
    """Vectorized evaluator of a sympy array; constant entries broadcast."""
    shape = tuple(exprs.shape)
    flat = [exprs[idx] for idx in np.ndindex(shape)] if shape else [exprs[()]]
    funcs = [sp.lambdify(syms, e, "numpy") for e in flat]

    def evaluate(points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        cols = [pts[:, a] for a in range(pts.shape[1])]
        vals = [np.broadcast_to(np.asarray(fn(*cols), dtype=float), (len(pts),)) for fn in funcs]
        return np.stack(vals, axis=-1).reshape((len(pts),) + shape)

    return evaluate


@dataclass(frozen=True, eq=False)
class SmoothField:
    """Scalar, vector or matrix field with first derivatives.

    ``value(points)`` returns ``(npts, *shape)`` and ``jacobian(points)``
    returns ``(npts, *shape, dim)``. Fields built with :meth:`from_sympy`
    keep their expressions so they can be differentiated symbolically.
    """

    dim: int
    shape: tuple
    value: callable = field(repr=False)
    jacobian: callable = field(repr=False, default=None)
    exprs: object = field(repr=False, default=None)

    def __call__(self, points):
        return self.value(points)

    def div(self, points):
        """Row-wise divergence, ``(npts, *shape[:-1])``."""
        if not self.shape or self.shape[-1] != self.dim:
            raise ValueError("divergence needs a vector or matrix field")
        return np.trace(self._jac(points), axis1=-2, axis2=-1)

    def _jac(self, points):
        if self.jacobian is not None:
            return self.jacobian(points)
        return fd_jacobian(self.value, points, self.dim)

    @classmethod
    def from_sympy(cls, exprs, dim):
        syms = symbols(dim)
        arr = exprs if isinstance(exprs, sp.NDimArray) else sp.Array(sp.sympify(exprs))
        jac = sp.derive_by_array(arr, syms)  # shape (dim, *shape)
        perm = list(range(1, len(arr.shape) + 1)) + [0]
        jac = sp.permutedims(jac, perm) if arr.shape else jac
        return cls(dim, tuple(arr.shape), _lambdify_array(arr, syms),
                   _lambdify_array(sp.Array(jac), syms), arr)

    @classmethod
    def from_poly(cls, poly):
        """Wrap a PolyField as a field on physical coordinates."""
        from .polyspace import GRAD, poly_diff

        grads = poly_diff(GRAD, poly) if not poly.shape else None

        def jac(points):
            if grads is not None:
                return grads.tabulate(points)
            parts = [poly.partial(a).tabulate(points) for a in range(poly.dim)]
            return np.stack(parts, axis=-1)

        return cls(poly.dim, poly.shape, poly.tabulate, jac)

    @classmethod
    def constant(cls, value, dim):
        value = np.asarray(value, dtype=float)

        def val(points):
            n = len(np.atleast_2d(points))
            return np.broadcast_to(value, (n,) + value.shape).copy()

        def jac(points):
            n = len(np.atleast_2d(points))
            return np.zeros((n,) + value.shape + (dim,))

        return cls(dim, value.shape, val, jac)


def fd_jacobian(func, points, dim, step=1e-6):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    cols = []
    for a in range(dim):
        e = np.zeros(dim)
        e[a] = step
        cols.append((func(pts + e) - func(pts - e)) / (2 * step))
    return np.stack(cols, axis=-1)
