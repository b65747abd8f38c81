"""Direct (and, for large systems, MINRES) solution of the saddle system."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sps
import scipy.sparse.linalg as spla

__all__ = ["Solution", "SingularSystemError", "solve", "residual", "ITERATIVE_THRESHOLD"]

ITERATIVE_THRESHOLD = 50_000
_DENSE_NULL_LIMIT = 5_000


class SingularSystemError(RuntimeError):
    """The global matrix is (numerically) singular.

    ``null_vector`` is an approximate kernel vector when one could be
    computed; its large entries point at the DOFs that are not controlled.
    """

    def __init__(self, message, null_vector=None):
        super().__init__(message)
        self.null_vector = null_vector


@dataclass(frozen=True, eq=False)
class Solution:
    sigma: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)
    residual: float
    method: str
    seconds: float
    iterations: int = 0

    @property
    def x(self):
        return np.concatenate([self.sigma, self.u, self.gamma])


def residual(system, x):
    """Relative residual ``|K x - b| / max(1, |b|)``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (system.n,):
        raise ValueError(f"expected a vector of length {system.n}, got {x.shape}")
    b = system.rhs()
    return float(np.linalg.norm(system.matrix() @ x - b) / max(1.0, np.linalg.norm(b)))


def _near_null(K):
    if K.shape[0] > _DENSE_NULL_LIMIT:
        return None
    _, s, vt = scipy.linalg.svd(K.toarray())
    return vt[-1] if s[-1] <= 1e-8 * s[0] else None


def _direct(K, b):
    try:
        lu = spla.splu(K, permc_spec="COLAMD")
    except RuntimeError as exc:  # exactly singular pivot
        raise SingularSystemError(f"factorization failed: {exc}", _near_null(K)) from None
    diag = np.abs(lu.U.diagonal())
    if diag.min() <= 1e-12 * diag.max():
        raise SingularSystemError(
            f"numerically singular system (pivot ratio {diag.min() / diag.max():.2e})",
            _near_null(K))
    return lu.solve(b), 0


def _iterative(K, b, tol):
    # Jacobi-type scaling keeps the operator symmetric
    d = np.abs(K.diagonal())
    d[d == 0] = 1.0
    s = 1.0 / np.sqrt(d)
    D = sps.diags(s)
    Ks = (D @ K @ D).tocsr()
    count = [0]

    def cb(_):
        count[0] += 1

    y, info = spla.minres(Ks, s * b, rtol=tol * 1e-2, maxiter=20 * K.shape[0], callback=cb)
    if info != 0:
        raise SingularSystemError(f"MINRES did not converge (info={info})")
    return s * y, count[0]


def solve(system, tol=1e-10, method="auto"):
    """Solve the saddle system; raise :class:`SingularSystemError` on failure.

    ``method`` is ``"direct"``, ``"minres"`` or ``"auto"`` (direct below
    :data:`ITERATIVE_THRESHOLD` unknowns).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    K = system.matrix()
    b = system.rhs()
    if method == "auto":
        method = "direct" if K.shape[0] <= ITERATIVE_THRESHOLD else "minres"
    t0 = time.perf_counter()
    if method == "direct":
        x, its = _direct(K, b)
    elif method == "minres":
        x, its = _iterative(K, b, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    seconds = time.perf_counter() - t0
    res = float(np.linalg.norm(K @ x - b) / max(1.0, np.linalg.norm(b)))
    if not np.isfinite(res) or res > tol:
        raise SingularSystemError(
            f"residual {res:.2e} exceeds tolerance {tol:.1e}",
            _near_null(K) if method == "direct" else None)
    s, u, g = system.split(x)
    return Solution(s.copy(), u.copy(), g.copy(), res, method, seconds, its)
