"""Manufactured solutions, error norms and convergence studies."""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .assembly import Material, asym_vector, assemble, build_spaces
from .fields import SmoothField, symbols
from .interpolation import cell_average, divergence_on_cells, evaluate_on_cells
from .mesh import build_mesh
from .quadrature import DEFAULT_POINTS, gauss_rule
from .solver import SingularSystemError, solve

__all__ = [
    "ManufacturedCase",
    "make_case",
    "default_case",
    "ErrorRecord",
    "error_norms",
    "solve_case",
    "ConvergenceReport",
    "convergence_study",
    "refined_identity_check",
    "weak_residual",
    "FAMILIES",
    "CSV_COLUMNS",
]

FAMILIES = {"2d-bdm": "2d-bdm", "2d-simplified": "2d-simplified", "3d": "3d"}
ERROR_KEYS = ("err_sigma_l2", "err_sigma_hdiv", "err_u_l2", "err_gamma_l2")
CSV_COLUMNS = ("h",) + ERROR_KEYS + tuple("rate_" + k[4:] for k in ERROR_KEYS) + ("solve_seconds",)


@dataclass(frozen=True, eq=False)
class ManufacturedCase:
    """Exact fields of an elasticity problem built from a displacement.

    ``interior`` cases skip the zero-boundary check; their displacement
    is imposed weakly as boundary data when solved.
    """

    dim: int
    material: Material
    u: SmoothField = field(repr=False)
    sigma: SmoothField = field(repr=False)
    gamma: SmoothField = field(repr=False)
    f: SmoothField = field(repr=False)
    interior: bool = False
    label: str = "custom"


def _rotation_exprs(grad, dim):
    skew = (grad - grad.T) / 2
    if dim == 2:
        return sp.Array(skew[0, 1])
    return sp.Array([skew[2, 1], skew[0, 2], skew[1, 0]])


def make_case(u_exprs, material=None, interior=False, label="custom", tol=1e-12, samples=11):
    """Derive ``sigma = A^-1 eps(u)``, the rotation ``gamma`` and ``f = div sigma``.

    ``u_exprs`` is a list of sympy expressions in ``x, y[, z]``. Unless
    ``interior`` is set, ``u`` must vanish on the boundary of the unit
    square/cube (checked on a sample grid to ``tol``).
    """
    material = material or Material()
    u_exprs = [sp.sympify(e) for e in u_exprs]
    dim = len(u_exprs)
    if dim not in (2, 3):
        raise ValueError("the displacement needs 2 or 3 components")
    material.check(dim)
    X = symbols(dim)
    extra = set().union(*(e.free_symbols for e in u_exprs)) - set(X)
    if extra:
        raise ValueError(f"unexpected symbols in u: {sorted(map(str, extra))}")
    grad = sp.Matrix(dim, dim, lambda i, j: sp.diff(u_exprs[i], X[j]))
    eps = (grad + grad.T) / 2
    alpha = sp.nsimplify(material.alpha(dim), rational=True) if material.lam else 0
    mu = sp.nsimplify(material.mu, rational=True)
    sigma = (2 * mu * eps + alpha * eps.trace() * sp.eye(dim)).applyfunc(sp.expand)
    f = [sp.expand(sum(sp.diff(sigma[i, j], X[j]) for j in range(dim))) for i in range(dim)]
    case = ManufacturedCase(
        dim, material,
        SmoothField.from_sympy(sp.Array(u_exprs), dim),
        SmoothField.from_sympy(sp.Array(sigma.tolist()), dim),
        SmoothField.from_sympy(_rotation_exprs(grad, dim), dim),
        SmoothField.from_sympy(sp.Array(f), dim),
        interior, label,
    )
    if not interior:
        _check_boundary(case.u, dim, tol, samples)
    _check_constitutive(case, eps, X)
    return case


def _check_boundary(u, dim, tol, samples):
    s = np.linspace(0.0, 1.0, samples)
    grid = np.stack(np.meshgrid(*([s] * (dim - 1)), indexing="ij"), axis=-1).reshape(-1, dim - 1)
    worst = 0.0
    for a in range(dim):
        for side in (0.0, 1.0):
            pts = np.insert(grid, a, side, axis=1)
            worst = max(worst, float(np.abs(u(pts)).max()))
    if worst > tol:
        raise ValueError(f"u does not vanish on the boundary (max |u| = {worst:.3e}); "
                         "use interior=True for cases with boundary data")


def _check_constitutive(case, eps, X):
    rng = np.random.default_rng(0)
    pts = rng.random((16, case.dim))
    strain = SmoothField.from_sympy(sp.Array(eps.tolist()), case.dim)(pts)
    back = case.material.apply(case.sigma(pts))
    if np.abs(back - strain).max() > 1e-10 * max(1.0, np.abs(strain).max()):
        raise AssertionError("constitutive inversion is inconsistent with the compliance")


def default_case(dim, material=None):
    """Smooth case vanishing on the boundary with every field non-trivial."""
    x, y, *rest = symbols(dim)
    pi = sp.pi
    if dim == 2:
        u = [sp.sin(pi * x) * sp.sin(pi * y), x * (1 - x) * y * (1 - y)]
    else:
        z = rest[0]
        u = [sp.sin(pi * x) * sp.sin(pi * y) * sp.sin(pi * z),
             x * (1 - x) * y * (1 - y) * z * (1 - z),
             sp.sin(pi * x) * y * (1 - y) * sp.sin(pi * z)]
    return make_case(u, material, label=f"default-{dim}d")


# -- errors -------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorRecord:
    err_sigma_l2: float
    err_sigma_hdiv: float
    err_u_l2: float
    err_gamma_l2: float

    def as_dict(self):
        return {k: getattr(self, k) for k in ERROR_KEYS}


def _physical_points(mesh, pts):
    return mesh.cell_origins[:, None, :] + mesh.cell_sizes[:, None, :] * pts[None]


def _l2(diff, w, det):
    sq = diff.reshape(diff.shape[0], diff.shape[1], -1) ** 2
    return float(math.sqrt(np.einsum("cqa,q,c->", sq, w, det)))


def error_norms(solution, case, spaces, npts=DEFAULT_POINTS, u_reference="exact"):
    """L2 / H(div) errors by cellwise Gauss quadrature with ``npts^dim`` points.

    ``u_reference="projection"`` measures ``u_h`` against the cell averages
    of ``u`` instead of ``u`` itself (the right target when the exact
    displacement is not in the discrete space but its projection is).
    """
    sig_space, u_space, g_space = spaces
    mesh = sig_space.mesh
    pts, w = gauss_rule(npts, mesh.dim)
    det = np.prod(mesh.cell_sizes, axis=1)
    phys = _physical_points(mesh, pts).reshape(-1, mesh.dim)
    shape = (mesh.n_cells, len(w))

    def exact(fld):
        return fld(phys).reshape(shape + fld.shape)

    s_err = exact(case.sigma) - evaluate_on_cells(sig_space, solution.sigma, pts)
    d_err = case.sigma.div(phys).reshape(shape + (mesh.dim,)) - \
        divergence_on_cells(sig_space, solution.sigma, pts)
    u_h = evaluate_on_cells(u_space, solution.u, pts)
    if u_reference == "projection":
        u_ref = cell_average(mesh, case.u, npts)[:, None, :]
    elif u_reference == "exact":
        u_ref = exact(case.u)
    else:
        raise ValueError(f"unknown u_reference {u_reference!r}")
    g_err = exact(case.gamma) - evaluate_on_cells(g_space, solution.gamma, pts)
    sl2 = _l2(s_err, w, det)
    return ErrorRecord(
        sl2,
        math.sqrt(sl2 ** 2 + _l2(d_err, w, det) ** 2),
        _l2(u_ref - u_h, w, det),
        _l2(g_err, w, det),
    )


def solve_case(case, pair, divisions, tol=1e-10, npts=DEFAULT_POINTS):
    """Build, assemble and solve one level; returns ``(spaces, system, solution)``."""
    mesh = build_mesh(case.dim, divisions)
    spaces = build_spaces(mesh, pair)
    system = assemble(spaces, case.material, case.f,
                      boundary_displacement=case.u if case.interior else None, npts=npts)
    return spaces, system, solve(system, tol=tol)


# -- convergence ----------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceReport:
    family: str
    h: tuple
    errors: tuple  # ErrorRecord per level
    seconds: tuple

    def rates(self, key):
        e = [getattr(r, key) for r in self.errors]
        out = [None]
        for k in range(1, len(e)):
            ratio = self.h[k - 1] / self.h[k]
            out.append(math.log(e[k - 1] / e[k]) / math.log(ratio) if e[k] > 0 and e[k - 1] > 0 else float("nan"))
        return out

    def final_rates(self):
        return {k: self.rates(k)[-1] for k in ERROR_KEYS}

    def rows(self, timings=True):
        rates = {k: self.rates(k) for k in ERROR_KEYS}
        for i, h in enumerate(self.h):
            row = {"h": h}
            row.update(self.errors[i].as_dict())
            for k in ERROR_KEYS:
                row["rate_" + k[4:]] = rates[k][i]
            row["solve_seconds"] = self.seconds[i] if timings else None
            yield row

    def to_csv(self, timings=True):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows(timings):
            writer.writerow(["" if row[c] is None else _fmt(row[c]) for c in CSV_COLUMNS])
        return buf.getvalue()


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def convergence_study(case, family, h_list, tol=1e-10, npts=DEFAULT_POINTS):
    """Run the full pipeline for each ``h`` (unit domain, ``1/h`` cells per axis)."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    h_list = [float(h) for h in h_list]
    if len(h_list) < 3:
        raise ValueError("a convergence study needs at least 3 mesh levels")
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ValueError("mesh sizes must be strictly decreasing")
    errors, seconds = [], []
    for level, h in enumerate(h_list):
        n = int(round(1.0 / h))
        if n < 1 or abs(n * h - 1.0) > 1e-9:
            raise ValueError(f"h={h} does not divide the unit domain")
        t0 = time.perf_counter()
        try:
            spaces, _, sol = solve_case(case, FAMILIES[family], (n,) * case.dim, tol, npts)
        except SingularSystemError as exc:
            raise SingularSystemError(f"level {level} (h={h}): {exc}", exc.null_vector) from exc
        seconds.append(time.perf_counter() - t0)
        errors.append(error_norms(sol, case, spaces, npts))
    return ConvergenceReport(family, tuple(h_list), tuple(errors), tuple(seconds))


# -- identities -------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityRecord:
    lhs: float
    rhs: float
    abs_mismatch: float
    rel_mismatch: float


def refined_identity_check(solution, case, spaces, npts=DEFAULT_POINTS):
    """Compare ``|div(sigma - sigma_h)|`` with ``|div sigma - Pi_V div sigma|``.

    The right side uses cell averages of ``f`` and never touches the
    discrete solution.
    """
    sig_space = spaces[0]
    mesh = sig_space.mesh
    pts, w = gauss_rule(npts, mesh.dim)
    det = np.prod(mesh.cell_sizes, axis=1)
    phys = _physical_points(mesh, pts).reshape(-1, mesh.dim)
    div_exact = case.f(phys).reshape(mesh.n_cells, len(w), mesh.dim)
    lhs = _l2(div_exact - divergence_on_cells(sig_space, solution.sigma, pts), w, det)
    proj = cell_average(mesh, case.f, npts)[:, None, :]
    rhs = _l2(div_exact - proj, w, det)
    mismatch = abs(lhs - rhs)
    return IdentityRecord(lhs, rhs, mismatch, mismatch / rhs if rhs > 0 else mismatch)


def weak_residual(case, pair, divisions=None, npts=10):
    """Max over stress basis functions of the first-equation residual.

    Evaluates ``(A sigma, tau) + (div tau, u) + (as tau, gamma) - <u, tau n>``
    with the exact fields; this is zero only with the right sign and scale
    of the rotation.
    """
    divisions = divisions or (2,) * case.dim
    mesh = build_mesh(case.dim, divisions)
    spaces = build_spaces(mesh, pair)
    sig = spaces[0]
    zero = SmoothField.constant(np.zeros(case.dim), case.dim)
    system = assemble(spaces, case.material, zero, boundary_displacement=case.u, npts=npts)
    pts, w = gauss_rule(npts, mesh.dim)
    det = np.prod(mesh.cell_sizes, axis=1)
    phys = _physical_points(mesh, pts).reshape(-1, mesh.dim)
    nq = len(w)
    sigma = case.sigma(phys).reshape(mesh.n_cells, nq, case.dim, case.dim)
    strain = case.material.apply(sigma)
    u = case.u(phys).reshape(mesh.n_cells, nq, case.dim)
    gamma = case.gamma(phys).reshape((mesh.n_cells, nq) + case.gamma.shape)
    elem = sig.element
    phi = elem.tabulate(pts)  # reference values
    dphi = elem.tabulate_div(pts)
    h = mesh.cell_sizes
    scale = (h / det[:, None])[:, None, None, None, :]
    phys_phi = phi[None] * scale  # (c, i, q, a, b)
    phys_div = dphi[None] / det[:, None, None, None]
    wq = w[None, :] * det[:, None]
    as_phi = asym_vector(phys_phi)
    if case.dim == 2:
        rot = np.einsum("ciq,cq,cq->ci", as_phi, gamma, wq)
    else:
        rot = np.einsum("ciqa,cqa,cq->ci", as_phi, gamma, wq)
    local = (np.einsum("ciqab,cqab,cq->ci", phys_phi, strain, wq)
             + np.einsum("ciqa,cqa,cq->ci", phys_div, u, wq) + rot)
    total = np.zeros(sig.n_dofs)
    np.add.at(total, sig.cell_dofs, local)
    return float(np.abs(total - system.boundary_load).max())
