"""Piola maps, canonical interpolants and commuting-diagram residuals.

Physical DOFs follow the element's mapping so that each reference DOF is
invariant under push-forward:

* contravariant (row-wise H(div) Piola ``M -> M B^T / det B``): facet
  moments are physical integrals ``int_e (dir : f) w ds``;
* identity (``u -> u o F^-1``): moments are physical averages and point
  DOFs are point values.

Discontinuous spaces (P0) are interpolated by the cellwise L2 projection.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elements import make_element, ref_facets
from .fields import SmoothField
from .mesh import AffineMap
from .polyspace import PolyField
from .quadrature import DEFAULT_POINTS, gauss_rule
from .spaces import ENTITY_DIM, build_space

__all__ = [
    "PiolaMap",
    "SmoothField",
    "push_forward",
    "canonical_interpolant",
    "commuting_residual",
    "s_operator",
    "s_inverse",
    "wedge_flux_identity",
    "cell_average",
]

DIV_SIGMA, DIV_R, SURJECTIVITY = "DIV_SIGMA", "DIV_R", "SURJECTIVITY"


@dataclass(frozen=True)
class PiolaMap:
    affine: AffineMap
    variant: str = "contravariant"

    def __post_init__(self):
        if self.variant not in ("contravariant", "identity"):
            raise ValueError(f"unknown Piola variant {self.variant!r}")

    def apply(self, ref_values):
        """Transform reference values; the last axis is the column axis."""
        if self.variant == "identity":
            return np.asarray(ref_values)
        return np.asarray(ref_values) * (self.affine.scales / self.affine.det)

    def apply_div(self, ref_div):
        if self.variant == "identity":
            raise ValueError("divergence transform is defined for the contravariant map")
        return np.asarray(ref_div) / self.affine.det


def push_forward(piola, field):
    """Physical-cell evaluator of a reference PolyField (vector or matrix).

    Returns a :class:`SmoothField` on physical coordinates whose row-wise
    divergence is ``div_hat / det B`` for the contravariant map.
    """
    if piola.variant == "contravariant" and (not field.shape or field.shape[-1] != field.dim):
        raise ValueError("contravariant Piola needs vector or matrix fields")
    aff = piola.affine
    grads = [field.partial(a) for a in range(field.dim)]

    def value(points):
        return piola.apply(field.tabulate(aff.inverse(points)))

    def jacobian(points):
        ref = aff.inverse(points)
        parts = [piola.apply(g.tabulate(ref)) / aff.scales[a] for a, g in enumerate(grads)]
        return np.stack(parts, axis=-1)

    return SmoothField(field.dim, field.shape, value, jacobian)


# -- operators shared with assembly ---------------------------------------

def s_operator(q):
    """``S(q) = tr(q) I - q^T`` in 3D; identity in 2D (arrays or PolyFields)."""
    if isinstance(q, PolyField):
        return q if _square(q.shape) == 2 else _poly_s(q, 1)
    q = np.asarray(q, dtype=float)
    if _square(q.shape[-2:]) == 2:
        return q.copy()
    tr = np.trace(q, axis1=-2, axis2=-1)[..., None, None]
    return tr * np.eye(3) - np.swapaxes(q, -1, -2)


def s_inverse(q):
    """``S^-1(q) = tr(q) I / 2 - q^T`` in 3D; identity in 2D."""
    if isinstance(q, PolyField):
        n = _square(q.shape)
        return q if n == 2 else _poly_s(q, 0.5)
    q = np.asarray(q, dtype=float)
    n = _square(q.shape[-2:])
    if n == 2:
        return q.copy()
    tr = np.trace(q, axis1=-2, axis2=-1)[..., None, None]
    return 0.5 * tr * np.eye(3) - np.swapaxes(q, -1, -2)


def _poly_s(q, factor):
    tr = q.trace() * factor
    return PolyField.matrix(
        [[(tr if i == j else 0) - q[j, i] for j in range(3)] for i in range(3)]
    )


def _square(shape):
    shape = tuple(shape)
    if len(shape) != 2 or shape[0] != shape[1] or shape[0] not in (2, 3):
        raise ValueError(f"expected a 2x2 or 3x3 matrix, got shape {shape}")
    return shape[0]


def wedge_flux_identity(q, n):
    """Both sides of ``(S q) n`` written through the wedge ``q ^ n``.

    Returns ``(lhs, rhs)`` where lhs is ``S(q) n`` and rhs is
    ``(-(q^n)_22 + (q^n)_31, (q^n)_12 - (q^n)_33, -(q^n)_11 + (q^n)_23)``.
    """
    from .elements import wedge

    q = np.asarray(q, dtype=float)
    n = np.asarray(n, dtype=float)
    w = wedge(q, n)
    lhs = s_operator(q) @ n
    rhs = np.array([-w[1, 1] + w[2, 0], w[0, 1] - w[2, 2], -w[0, 0] + w[1, 2]])
    return lhs, rhs


# -- interpolation ------------------------------------------------------------

def _entity_points(entity, npts):
    """Reference-cell quadrature points and weights on an entity."""
    if not entity.free:
        pt = np.zeros((1, len(entity.fixed)))
        for a, v in entity.fixed:
            pt[0, a] = float(v)
        return pt, np.ones(1), np.zeros((1, 0))
    s, w = gauss_rule(npts, len(entity.free))
    dim = len(entity.fixed) + len(entity.free)
    pts = np.zeros((len(s), dim))
    for k, a in enumerate(entity.free):
        pts[:, a] = s[:, k]
    for a, v in entity.fixed:
        pts[:, a] = float(v)
    return pts, w, s


def _cell_maps(mesh):
    return mesh.cell_origins, mesh.cell_sizes


def local_dof_values(element, mesh, f, npts=DEFAULT_POINTS, cells=None):
    """Physical DOF values of ``f`` on each cell, shape (n_cells, n_dofs).

    Each value equals the reference DOF applied to the pull-back of ``f``,
    so it is the coefficient of ``f``'s interpolant in the nodal basis.
    """
    origins, scales = _cell_maps(mesh)
    if cells is not None:
        origins, scales = origins[cells], scales[cells]
    ncell = len(origins)
    pull = None
    if element.mapping == "contravariant":
        det = np.prod(scales, axis=1)
        pull = det[:, None] / scales  # inverse Piola scaling of the last axis
    out = np.zeros((ncell, element.n_dofs))
    cache = {}
    for i, dof in enumerate(element.dofs):
        ent = dof.entity
        key = (ent.kind, ent.index, ent.fixed)
        if key not in cache:
            pts, w, s = _entity_points(ent, npts)
            phys = origins[:, None, :] + scales[:, None, :] * pts[None, :, :]
            vals = f(phys.reshape(-1, mesh.dim)).reshape((ncell, len(pts)) + f.shape)
            if pull is not None:
                vals = vals * pull.reshape((ncell, 1) + (1,) * (vals.ndim - 3) + (mesh.dim,))
            cache[key] = (vals, w, s)
        vals, w, s = cache[key]
        direction = np.array(dof.direction, dtype=float)
        if direction.ndim:
            axes = tuple(range(2, vals.ndim))
            integrand = np.tensordot(vals, direction, axes=(axes, tuple(range(direction.ndim))))
        else:
            integrand = vals * direction
        if dof.kind == "point":
            out[:, i] = integrand[:, 0]
        else:
            out[:, i] = integrand @ (w * dof.weight.tabulate(s))
    return out


def _l2_projection(space, f, npts):
    elem, mesh = space.element, space.mesh
    pts, w = gauss_rule(npts, mesh.dim)
    phi = elem.tabulate(pts)
    phi = phi.reshape(phi.shape[0], phi.shape[1], -1)
    mass = np.einsum("iqa,jqa,q->ij", phi, phi, w)
    origins, scales = _cell_maps(mesh)
    phys = origins[:, None, :] + scales[:, None, :] * pts[None]
    vals = f(phys.reshape(-1, mesh.dim)).reshape(mesh.n_cells, len(pts), -1)
    rhs = np.einsum("cqa,iqa,q->ci", vals, phi, w)
    return np.linalg.solve(mass, rhs.T).T


def canonical_interpolant(space, f, variant="canonical", npts=DEFAULT_POINTS, atol=1e-10):
    """Global coefficient vector of the interpolant of ``f`` into ``space``.

    ``variant="canonical"`` matches every DOF of ``f``. ``variant="pi0"``
    sets DOFs on entities of dimension below ``dim - 1`` to zero (vertex
    values in 2D, edge moments in 3D) and matches facet DOFs. Spaces with
    only interior DOFs are interpolated by the cellwise L2 projection.
    Values written to shared DOFs from different cells must agree to
    ``atol`` (relative to their size).
    """
    if variant not in ("canonical", "pi0"):
        raise ValueError(f"unknown interpolant variant {variant!r}")
    elem, mesh = space.element, space.mesh
    if f.shape != elem.value_shape:
        raise ValueError(f"field shape {f.shape} does not match {elem.name} {elem.value_shape}")
    if elem.continuity == "discontinuous":
        local = _l2_projection(space, f, npts)
    else:
        local = local_dof_values(elem, mesh, f, npts)
        if variant == "pi0":
            low = [i for i, d in enumerate(elem.dofs)
                   if ENTITY_DIM.get(d.entity.kind, mesh.dim) < mesh.dim - 1]
            local[:, low] = 0.0
    coeffs = np.zeros(space.n_dofs)
    filled = np.zeros(space.n_dofs, dtype=bool)
    flat_dofs, flat_vals = space.cell_dofs.ravel(), local.ravel()
    coeffs[flat_dofs] = flat_vals
    filled[flat_dofs] = True
    mismatch = np.abs(coeffs[flat_dofs] - flat_vals)
    scale = np.maximum(1.0, np.abs(flat_vals))
    if np.any(mismatch > atol * scale):
        raise ValueError(f"shared DOF values disagree by {mismatch.max():.3e}")
    return coeffs


def evaluate_on_cells(space, coeffs, ref_points):
    """Values of a discrete field at reference points of every cell.

    Returns ``(n_cells, npts, *shape)`` with the element mapping applied.
    """
    elem, mesh = space.element, space.mesh
    phi = elem.tabulate(ref_points)
    local = np.asarray(coeffs)[space.cell_dofs]
    vals = np.tensordot(local, phi, axes=(1, 0))
    if elem.mapping == "contravariant":
        scales = mesh.cell_sizes
        det = np.prod(scales, axis=1)
        factor = scales / det[:, None]
        vals = vals * factor.reshape((mesh.n_cells, 1) + (1,) * (vals.ndim - 3) + (mesh.dim,))
    return vals


def divergence_on_cells(space, coeffs, ref_points):
    """Row-wise divergence of a discrete H(div) field, (n_cells, npts, ...)."""
    elem, mesh = space.element, space.mesh
    if elem.mapping != "contravariant":
        raise ValueError("divergence is only assembled for H(div) spaces")
    dphi = elem.tabulate_div(ref_points)
    local = np.asarray(coeffs)[space.cell_dofs]
    vals = np.tensordot(local, dphi, axes=(1, 0))
    det = np.prod(mesh.cell_sizes, axis=1)
    return vals / det.reshape((-1,) + (1,) * (vals.ndim - 1))


def cell_average(mesh, func, npts=DEFAULT_POINTS):
    """Cell averages of a batch function of physical points."""
    pts, w = gauss_rule(npts, mesh.dim)
    origins, scales = _cell_maps(mesh)
    phys = origins[:, None, :] + scales[:, None, :] * pts[None]
    vals = func(phys.reshape(-1, mesh.dim))
    vals = vals.reshape((mesh.n_cells, len(pts)) + vals.shape[1:])
    return np.tensordot(vals, w, axes=(1, 0)) if vals.ndim == 2 else np.einsum("cq...,q->c...", vals, w)


# -- commuting diagrams ---------------------------------------------------------

def _div_residual(space, f, npts):
    coeffs = canonical_interpolant(space, f, npts=npts)
    centre = np.full((1, space.mesh.dim), 0.5)
    interp_div = divergence_on_cells(space, coeffs, centre)[:, 0]
    exact_div = cell_average(space.mesh, f.div, npts)
    return float(np.max(np.abs(interp_div - exact_div)))


def _theta_element(dim):
    return make_element("THETA_SERENDIPITY" if dim == 2 else "THETA_UK", dim)


def surjectivity_residual(mesh, f, npts=DEFAULT_POINTS):
    """Max facet flux of ``S(f - Pi0 f)`` (3D) or ``(f - Pi0 f) . n`` (2D)."""
    space = build_space(mesh, _theta_element(mesh.dim))
    coeffs = canonical_interpolant(space, f, variant="pi0", npts=npts)
    origins, scales = _cell_maps(mesh)
    worst = 0.0
    for ent in ref_facets(mesh.dim):
        a = ent.fixed[0][0]
        pts, w, _ = _entity_points(ent, npts)
        phys = origins[:, None, :] + scales[:, None, :] * pts[None]
        exact = f(phys.reshape(-1, mesh.dim)).reshape((mesh.n_cells, len(pts)) + f.shape)
        disc = evaluate_on_cells(space, coeffs, pts)
        diff = exact - disc
        if mesh.dim == 3:
            diff = s_operator(diff)
        flux = diff[..., a]  # (S q) n for n = e_a
        measure = np.prod(np.delete(scales, a, axis=1), axis=1)
        integral = np.einsum("cq...,q->c...", flux, w) * measure.reshape((-1,) + (1,) * (flux.ndim - 2))
        worst = max(worst, float(np.max(np.abs(integral))))
    return worst


# the identities are exact only up to quadrature error in the moments of a
# transcendental field; on a single unit cell 5 points leave ~1e-7
RESIDUAL_POINTS = 10


def commuting_residual(which, mesh, f, npts=RESIDUAL_POINTS):
    """Residual of a commuting-diagram or surjectivity identity.

    * ``DIV_SIGMA``: ``max_K |avg_K div Pi_Sigma f - avg_K div f|`` for a
      matrix field ``f``;
    * ``DIV_R``: the same with the RT0 interpolant (2D vector field, 3D
      matrix field);
    * ``SURJECTIVITY``: ``max_facets |int (f - Pi0 f) . n|`` in 2D and
      ``max_faces |int S(f - Pi0 f) n|`` in 3D.
    """
    which = str(which).upper()
    dim = mesh.dim
    if which == DIV_SIGMA:
        fam = "BDM1_ROW_STRESS" if dim == 2 else "BDM1_ROW_STRESS_3D"
        return _div_residual(build_space(mesh, make_element(fam, dim)), f, npts)
    if which == DIV_R:
        fam = "RT0" if dim == 2 else "RT0_ROW_3D"
        return _div_residual(build_space(mesh, make_element(fam, dim)), f, npts)
    if which == SURJECTIVITY:
        return surjectivity_residual(mesh, f, npts)
    raise ValueError(f"unknown identity {which!r}")
