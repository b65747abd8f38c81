"""Global saddle-point system for the three-field elasticity formulation.

Unknowns are the stress ``sigma`` (row-wise H(div)), the displacement
``u`` and the rotation multiplier ``gamma``. The discrete equations are::

    (A sigma, tau) + (div tau, u) + (as tau, gamma) = <u_D, tau n>
    (div sigma, v)                                 = (f, v)
    (as sigma, q)                                  = 0

``<u_D, tau n>`` vanishes for clamped problems; it is assembled only when
boundary displacement data is supplied (interior-restriction runs).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sps

from .elements import make_element, nodal_basis, ref_facets
from .interpolation import s_inverse, s_operator
from .polyspace import CURL, DIV, PolyField, poly_diff
from .quadrature import DEFAULT_POINTS, gauss_rule
from .spaces import FESpace, build_space

__all__ = [
    "Material",
    "FESpace",
    "build_space",
    "SaddleSystem",
    "PAIRS",
    "build_spaces",
    "assemble",
    "asym_vector",
    "fundamental_relation",
    "s_operator",
    "s_inverse",
    "inf_sup_constant",
]

COMPLIANCE_FORMULAS = ("planar", "dim-aware")

# (stress, displacement, rotation, dim)
PAIRS = {
    "2d-bdm": ("BDM1_ROW_STRESS", "P0_VEC", "P0_ROT", 2),
    "2d-simplified": ("SIGMA_SIMPLIFIED", "P0_VEC", "P0_ROT", 2),
    "3d": ("BDM1_ROW_STRESS_3D", "P0_VEC", "P0_ROT", 3),
}


@dataclass(frozen=True)
class Material:
    """Isotropic Lame constants and the compliance formula in use.

    ``A sigma = (sigma - c tr(sigma) I) / (2 mu)`` with
    ``c = lam / (2 mu + 2 lam)`` (``"planar"``) or
    ``c = lam / (2 mu + dim lam)`` (``"dim-aware"``).
    """

    mu: float = 1.0
    lam: float = 1.0
    compliance: str = "planar"

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lambda must be non-negative, got {self.lam}")
        if self.compliance not in COMPLIANCE_FORMULAS:
            raise ValueError(f"compliance must be one of {COMPLIANCE_FORMULAS}")

    def trace_coefficient(self, dim):
        denom = 2 * self.mu + (2 if self.compliance == "planar" else dim) * self.lam
        return self.lam / denom

    def check(self, dim):
        """Reject materials whose compliance is not positive definite.

        The trace part scales ``tr`` by ``(1 - dim c) / (2 mu)``; this is only
        positive for ``dim c < 1`` (with the planar formula in 3D: ``lam < 2 mu``).
        """
        if 1 - dim * self.trace_coefficient(dim) <= 0:
            raise ValueError(
                f"compliance ({self.compliance}) is not positive definite in {dim}D "
                f"for mu={self.mu}, lambda={self.lam}")

    def apply(self, sigma):
        """``A sigma`` for arrays of shape (..., n, n)."""
        sigma = np.asarray(sigma, dtype=float)
        n = sigma.shape[-1]
        tr = np.trace(sigma, axis1=-2, axis2=-1)[..., None, None]
        return (sigma - self.trace_coefficient(n) * tr * np.eye(n)) / (2 * self.mu)

    def inverse(self, eps):
        """Stress ``2 mu eps + alpha tr(eps) I`` with ``A`` of it equal to ``eps``."""
        eps = np.asarray(eps, dtype=float)
        n = eps.shape[-1]
        return 2 * self.mu * eps + self.alpha(n) * np.trace(eps, axis1=-2, axis2=-1)[..., None, None] * np.eye(n)

    def alpha(self, dim):
        """Trace coefficient of the inverse map ``eps -> sigma``."""
        self.check(dim)
        c = self.trace_coefficient(dim)
        return 2 * self.mu * c / (1 - dim * c)


def asym_vector(tau):
    """``as tau``: scalar in 2D, 3-vector in 3D; batched over leading axes.

    PolyField matrices give PolyField results (exact coefficients).
    """
    if isinstance(tau, PolyField):
        if tau.shape == (2, 2):
            return tau[0, 1] - tau[1, 0]
        if tau.shape == (3, 3):
            return PolyField.vector([tau[2, 1] - tau[1, 2], tau[0, 2] - tau[2, 0],
                                     tau[1, 0] - tau[0, 1]])
        raise ValueError(f"as() needs a 2x2 or 3x3 matrix, got shape {tau.shape}")
    tau = np.asarray(tau)
    if tau.shape[-2:] == (2, 2):
        return tau[..., 0, 1] - tau[..., 1, 0]
    if tau.shape[-2:] == (3, 3):
        return np.stack([tau[..., 2, 1] - tau[..., 1, 2],
                         tau[..., 0, 2] - tau[..., 2, 0],
                         tau[..., 1, 0] - tau[..., 0, 1]], axis=-1)
    raise ValueError(f"as() needs a 2x2 or 3x3 matrix, got shape {tau.shape}")


def fundamental_relation(q):
    """Both sides of ``as curl q = -div S(q)`` for a PolyField ``q``.

    ``q`` is a vector field in 2D (where ``S`` is the identity) and a
    matrix field in 3D. Returns ``(as curl q, -div S q)``; equality is
    coefficient-exact.
    """
    if not isinstance(q, PolyField):
        raise TypeError("fundamental_relation works on PolyFields")
    if q.dim == 2 and q.shape != (2,) or q.dim == 3 and q.shape != (3, 3):
        raise ValueError(f"expected a {'vector' if q.dim == 2 else 'matrix'} field, got {q.shape}")
    lhs = asym_vector(poly_diff(CURL, q))
    sq = q if q.dim == 2 else s_operator(q)
    return lhs, -poly_diff(DIV, sq)


def build_spaces(mesh, pair):
    """Stress, displacement and rotation spaces of a named pair."""
    if pair not in PAIRS:
        raise ValueError(f"unknown element pair {pair!r}; choose from {sorted(PAIRS)}")
    s, v, q, dim = PAIRS[pair]
    if mesh.dim != dim:
        raise ValueError(f"pair {pair} is {dim}D but the mesh is {mesh.dim}D")
    return tuple(build_space(mesh, _nodal(name, dim)) for name in (s, v, q))


@lru_cache(maxsize=None)
def _nodal(name, dim):
    return nodal_basis(make_element(name, dim))


@dataclass(frozen=True, eq=False)
class SaddleSystem:
    """Sparse blocks and right-hand side of the saddle-point system."""

    spaces: tuple
    material: Material
    M: sps.csr_matrix = field(repr=False)
    B: sps.csr_matrix = field(repr=False)
    C: sps.csr_matrix = field(repr=False)
    load: np.ndarray = field(repr=False)
    boundary_load: np.ndarray = field(repr=False)

    @property
    def sizes(self):
        return (self.M.shape[0], self.B.shape[0], self.C.shape[0])

    @property
    def n(self):
        return sum(self.sizes)

    def matrix(self):
        """Global symmetric matrix ``[[M, B^T, C^T], [B, 0, 0], [C, 0, 0]]`` (CSC)."""
        return sps.bmat([[self.M, self.B.T, self.C.T],
                         [self.B, None, None],
                         [self.C, None, None]], format="csc")

    def rhs(self):
        return np.concatenate([self.boundary_load, self.load, np.zeros(self.sizes[2])])

    def split(self, x):
        ns, nu, _ = self.sizes
        return x[:ns], x[ns:ns + nu], x[ns + nu:]

    def dump(self, path):
        """Write the global matrix as ``row col value`` lines (0-based)."""
        coo = self.matrix().tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w") as fh:
            fh.write(f"% {self.n} {self.n} {coo.nnz}\n")
            for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
                fh.write(f"{r} {c} {v:.17g}\n")


# -- element-level kernels ------------------------------------------------------

@lru_cache(maxsize=None)
def _tables(name, dim, npts):
    """Reference tabulations at the cell quadrature points."""
    elem = _nodal(name, dim)
    pts, w = gauss_rule(npts, dim)
    vals = elem.tabulate(pts)
    div = elem.tabulate_div(pts) if elem.mapping == "contravariant" else None
    return pts, w, vals, div


def _stress_values(name, dim, h, npts):
    """Physical stress basis values, divergences and the Jacobian at cell points."""
    pts, w, vals, div = _tables(name, dim, npts)
    det = float(np.prod(h))
    return vals * (np.asarray(h) / det), div / det, det


def _cell_blocks(spaces, h, npts):
    """Element matrices on a cell of size ``h``: mass, trace mass, div, asym."""
    sig, vel, rot = (s.element for s in spaces)
    dim = sig.dim
    phi, dphi, det = _stress_values(sig.name, dim, h, npts)
    _, w, psi, _ = _tables(vel.name, dim, npts)
    _, _, chi, _ = _tables(rot.name, dim, npts)
    wq = w * det
    mass = np.einsum("iqab,jqab,q->ij", phi, phi, wq)
    tr = np.trace(phi, axis1=-2, axis2=-1)
    trace_mass = np.einsum("iq,jq,q->ij", tr, tr, wq)
    div = np.einsum("kqa,jqa,q->kj", psi, dphi, wq)
    asym = asym_vector(phi)
    if dim == 2:
        rot_block = np.einsum("lq,jq,q->lj", chi, asym, wq)
    else:
        rot_block = np.einsum("lqa,jqa,q->lj", chi, asym, wq)
    divdiv = np.einsum("iqa,jqa,q->ij", dphi, dphi, wq)
    return mass, trace_mass, div, rot_block, divdiv


def _blocks_by_size(spaces, npts):
    mesh = spaces[0].mesh
    sizes = np.round(mesh.cell_sizes, 14)
    keys, inverse = np.unique(sizes, axis=0, return_inverse=True)
    blocks = [_cell_blocks(spaces, tuple(k), npts) for k in keys]
    return [np.stack([b[i] for b in blocks])[inverse.ravel()] for i in range(5)]


def _scatter(rows, cols, local, shape):
    r = np.broadcast_to(rows[:, :, None], local.shape).ravel()
    c = np.broadcast_to(cols[:, None, :], local.shape).ravel()
    mat = sps.coo_matrix((local.ravel(), (r, c)), shape=shape).tocsr()
    mat.sum_duplicates()
    return mat


def _check_spaces(spaces):
    if len(spaces) != 3:
        raise ValueError("expected (stress, displacement, rotation) spaces")
    mesh = spaces[0].mesh
    if any(s.mesh is not mesh for s in spaces):
        raise ValueError("all spaces must be built on the same mesh")
    if spaces[0].element.mapping != "contravariant":
        raise ValueError("the stress space must be an H(div) space")
    return mesh


def _load_vector(space, f, npts):
    mesh, elem = space.mesh, space.element
    _, w, psi, _ = _tables(elem.name, mesh.dim, npts)
    pts, _ = gauss_rule(npts, mesh.dim)
    phys = mesh.cell_origins[:, None, :] + mesh.cell_sizes[:, None, :] * pts[None]
    fv = f(phys.reshape(-1, mesh.dim)).reshape((mesh.n_cells, len(w), mesh.dim))
    det = np.prod(mesh.cell_sizes, axis=1)
    local = np.einsum("cqa,kqa,q,c->ck", fv, psi, w, det)
    g = np.zeros(space.n_dofs)
    np.add.at(g, space.cell_dofs, local)
    return g


def _boundary_vector(space, u_bc, npts):
    """``<u_D, tau n>`` over the boundary facets, per stress DOF."""
    mesh, elem = space.mesh, space.element
    g = np.zeros(space.n_dofs)
    facets = {ent.index: ent for ent in ref_facets(mesh.dim)}
    s, w = gauss_rule(npts, mesh.dim - 1)
    for facet in mesh.boundary_facets():
        low_cell, high_cell = mesh.facet_cells[facet]
        a = int(mesh.facet_axis[facet])
        if low_cell >= 0:  # facet is the cell's high side
            cell, side, sign = int(low_cell), 1, 1.0
        else:
            cell, side, sign = int(high_cell), 0, -1.0
        ent = facets[2 * a + side]
        pts = np.zeros((len(w), mesh.dim))
        pts[:, list(ent.free)] = s
        pts[:, a] = side
        phi = elem.tabulate(pts)[..., a]  # reference normal columns (n, q, rows)
        phys = mesh.cell_origins[cell] + mesh.cell_sizes[cell] * pts
        ud = u_bc(phys)
        # tau n ds on the physical facet equals the reference normal column
        g[space.cell_dofs[cell]] += sign * np.einsum("iqa,qa,q->i", phi, ud, w)
    return g


def assemble(spaces, material, f, boundary_displacement=None, npts=DEFAULT_POINTS):
    """Assemble the saddle system for load ``f`` (a vector SmoothField).

    ``boundary_displacement`` (a vector field) adds ``<u_D, tau n>`` to
    the stress equation; leave it ``None`` for clamped problems.
    """
    mesh = _check_spaces(spaces)
    material.check(mesh.dim)
    sig, vel, rot = spaces
    mass, trace_mass, div, asym, _ = _blocks_by_size(spaces, npts)
    # the element matrices are scaled by cell volume already
    c = material.trace_coefficient(mesh.dim)
    local_M = (mass - c * trace_mass) / (2 * material.mu)
    local_M = 0.5 * (local_M + np.swapaxes(local_M, 1, 2))
    M = _scatter(sig.cell_dofs, sig.cell_dofs, local_M, (sig.n_dofs, sig.n_dofs))
    B = _scatter(vel.cell_dofs, sig.cell_dofs, div, (vel.n_dofs, sig.n_dofs))
    C = _scatter(rot.cell_dofs, sig.cell_dofs, asym, (rot.n_dofs, sig.n_dofs))
    load = _load_vector(vel, f, npts)
    if boundary_displacement is None:
        bload = np.zeros(sig.n_dofs)
    else:
        bload = _boundary_vector(sig, boundary_displacement, npts)
    return SaddleSystem(tuple(spaces), material, M, B, C, load, bload)


def _gram(space, npts):
    """L2 Gram matrix of an identity-mapped space."""
    mesh, elem = space.mesh, space.element
    _, w, vals, _ = _tables(elem.name, mesh.dim, npts)
    flat = vals.reshape(vals.shape[0], vals.shape[1], -1)
    ref = np.einsum("iqa,jqa,q->ij", flat, flat, w)
    det = np.prod(mesh.cell_sizes, axis=1)
    return _scatter(space.cell_dofs, space.cell_dofs, ref[None] * det[:, None, None],
                    (space.n_dofs, space.n_dofs))


def inf_sup_constant(spaces, npts=DEFAULT_POINTS):
    """Discrete inf-sup constant of ``tau -> ((div tau, .), (as tau, .))``.

    Returns ``beta = min_{(v,q)} sup_tau b(tau; v, q) / (|tau|_Hdiv |(v,q)|_L2)``,
    the square root of the smallest eigenvalue of ``G X^-1 G^T`` relative to
    the L2 Gram matrix ``Y`` of V x Q, where ``X`` is the H(div) Gram matrix of
    the stress space. Dense; meant for small meshes.
    """
    _check_spaces(spaces)
    sig, vel, rot = spaces
    mass, _, div, asym, divdiv = _blocks_by_size(spaces, npts)
    X = _scatter(sig.cell_dofs, sig.cell_dofs, mass + divdiv, (sig.n_dofs,) * 2).toarray()
    B = _scatter(vel.cell_dofs, sig.cell_dofs, div, (vel.n_dofs, sig.n_dofs))
    C = _scatter(rot.cell_dofs, sig.cell_dofs, asym, (rot.n_dofs, sig.n_dofs))
    G = sps.vstack([B, C]).toarray()
    Y = scipy.linalg.block_diag(_gram(vel, npts).toarray(), _gram(rot, npts).toarray())
    S = G @ scipy.linalg.cho_solve(scipy.linalg.cho_factor(X), G.T)
    S = 0.5 * (S + S.T)
    lam = scipy.linalg.eigh(S, Y, eigvals_only=True, subset_by_index=[0, 0])[0]
    return float(math.sqrt(max(lam, 0.0)))
