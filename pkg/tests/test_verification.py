import dataclasses
import math

import numpy as np
import pytest
import sympy as sp

from weaksym.assembly import Material
from weaksym.checks import galerkin_cases
from weaksym.fields import SmoothField, symbols
from weaksym.solver import Solution
from weaksym.verification import (CSV_COLUMNS, ConvergenceReport, convergence_study, default_case,
                                  error_norms, make_case, refined_identity_check, solve_case,
                                  weak_residual)

x, y = symbols(2)


def field_values(fld, pts):
    return np.asarray(fld(pts), dtype=float)


def fine_l2(fld, blocks=8, order=8):
    """Composite tensor Gauss-Legendre norm on the unit square."""
    g, gw = np.polynomial.legendre.leggauss(order)
    g, gw = (g + 1) / (2 * blocks), gw / (2 * blocks)
    starts = np.arange(blocks) / blocks
    s = (starts[:, None] + g[None]).ravel()
    ws = np.tile(gw, blocks)
    X, Y = np.meshgrid(s, s, indexing="ij")
    W = np.outer(ws, ws).ravel()
    vals = field_values(fld, np.column_stack([X.ravel(), Y.ravel()]))
    return math.sqrt(np.einsum("qa,q->", vals.reshape(len(W), -1) ** 2, W))


def test_zero_displacement_gives_zero_fields():
    case = make_case([sp.Integer(0), sp.Integer(0)])
    pts = np.random.default_rng(1).random((5, 2))
    for fld in (case.u, case.sigma, case.gamma, case.f):
        assert not field_values(fld, pts).any()


def test_polynomial_example_against_hand_derivation():
    u1 = x * (1 - x) * y * (1 - y)
    case = make_case([u1, sp.Integer(0)], Material(1.0, 1.0))
    pts = np.random.default_rng(2).random((7, 2))
    gamma = sp.lambdify((x, y), x * (1 - x) * (1 - 2 * y) / 2)
    np.testing.assert_allclose(field_values(case.gamma, pts), gamma(pts[:, 0], pts[:, 1]), atol=1e-14)
    # mu = lam = 1: c = 1/4, so alpha = 1 and sigma = 2 eps + tr(eps) I
    e11, e12 = sp.diff(u1, x), sp.diff(u1, y) / 2
    s = sp.Matrix([[3 * e11, 2 * e12], [2 * e12, e11]])
    f = [sp.diff(s[0, 0], x) + sp.diff(s[0, 1], y), sp.diff(s[1, 0], x) + sp.diff(s[1, 1], y)]
    f_num = np.column_stack([sp.lambdify((x, y), e)(pts[:, 0], pts[:, 1]) for e in f])
    np.testing.assert_allclose(field_values(case.f, pts), f_num, atol=1e-12)


def test_rigid_rotation_has_zero_stress_and_positive_rotation():
    s = sp.Rational(3, 10)
    case = make_case([s * y, -s * x], interior=True)
    pts = np.random.default_rng(3).random((5, 2))
    assert not field_values(case.sigma, pts).any()
    np.testing.assert_allclose(field_values(case.gamma, pts), 0.3)


def test_rejects_boundary_violation_and_bad_input():
    with pytest.raises(ValueError):
        make_case([x * y, sp.Integer(0)])
    with pytest.raises(ValueError):
        make_case([sp.Symbol("t") * 0 + sp.Symbol("t"), sp.Integer(0)], interior=True)
    with pytest.raises(ValueError):
        make_case([x])
    X, Y, Z = symbols(3)
    with pytest.raises(ValueError):
        make_case([X * 0, Y * 0, Z * 0], Material(1.0, 3.0))


@pytest.mark.parametrize("dim,pair", [(2, "2d-bdm"), (3, "3d")])
def test_weak_residual_detects_rotation_sign(dim, pair):
    case = default_case(dim)
    assert weak_residual(case, pair) <= 1e-8
    flipped = dataclasses.replace(case, gamma=SmoothField.from_sympy(-case.gamma.exprs, dim))
    assert weak_residual(flipped, pair) > 1e-3


def test_zero_solution_error_equals_field_norm():
    case = default_case(2)
    spaces, _, sol = solve_case(case, "2d-bdm", (4, 4))
    zero = Solution(np.zeros_like(sol.sigma), np.zeros_like(sol.u), np.zeros_like(sol.gamma), 0.0, "none", 0.0)
    err = error_norms(zero, case, spaces, npts=8)
    assert err.err_sigma_l2 == pytest.approx(fine_l2(case.sigma), rel=1e-8)
    assert err.err_u_l2 == pytest.approx(fine_l2(case.u), rel=1e-8)
    assert err.err_gamma_l2 == pytest.approx(fine_l2(case.gamma), rel=1e-8)
    hdiv = math.sqrt(fine_l2(case.sigma) ** 2 + fine_l2(case.f) ** 2)
    assert err.err_sigma_hdiv == pytest.approx(hdiv, rel=1e-8)
    with pytest.raises(ValueError):
        error_norms(zero, case, spaces, u_reference="nodal")


@pytest.mark.parametrize("label,dim,u", galerkin_cases(), ids=[c[0] for c in galerkin_cases()])
def test_galerkin_exactness(label, dim, u):
    case = make_case(u, interior=True, label=label)
    pairs = ("2d-bdm", "2d-simplified") if dim == 2 else ("3d",)
    for pair in pairs:
        spaces, _, sol = solve_case(case, pair, (3, 2) if dim == 2 else (2, 1, 2))
        err = error_norms(sol, case, spaces, u_reference="projection")
        assert max(err.as_dict().values()) <= 1e-9


def test_refined_identity_constant_load():
    case = make_case([x ** 2 + x * y, y ** 2 - 2 * x * y], interior=True)
    spaces, _, sol = solve_case(case, "2d-bdm", (3, 3))
    rec = refined_identity_check(sol, case, spaces)
    assert rec.lhs <= 1e-9 and rec.rhs <= 1e-9


@pytest.mark.parametrize("dim,pair,div,tol", [
    (2, "2d-bdm", (4, 4), 1e-8), (2, "2d-simplified", (4, 4), 1e-8), (3, "3d", (2, 2, 2), 1e-7)])
def test_refined_identity_smooth(dim, pair, div, tol):
    case = default_case(dim)
    spaces, _, sol = solve_case(case, pair, div)
    rec = refined_identity_check(sol, case, spaces)
    assert rec.rhs > 1e-3
    assert rec.rel_mismatch <= tol


def test_error_ratio_monotone_and_quadrature_stable():
    case = default_case(2)
    errs = []
    for n in (4, 8, 16):
        spaces, _, sol = solve_case(case, "2d-bdm", (n, n))
        errs.append(error_norms(sol, case, spaces).as_dict())
    for k in ("err_sigma_hdiv", "err_u_l2", "err_gamma_l2"):
        assert errs[0][k] > errs[1][k] > errs[2][k]
        assert 1.7 <= errs[1][k] / errs[2][k] <= 2.3
    spaces, _, sol = solve_case(case, "2d-bdm", (8, 8))
    a = error_norms(sol, case, spaces, npts=5).as_dict()
    b = error_norms(sol, case, spaces, npts=10).as_dict()
    for k in a:
        assert abs(a[k] - b[k]) <= 1e-3 * b[k]


def test_convergence_study_validation_and_csv():
    case = default_case(2)
    with pytest.raises(ValueError):
        convergence_study(case, "2d-bdm", [0.5, 0.25])
    with pytest.raises(ValueError):
        convergence_study(case, "2d-bdm", [0.25, 0.5, 0.125])
    with pytest.raises(ValueError):
        convergence_study(case, "2d-bdm", [0.5, 0.3, 0.25])
    with pytest.raises(ValueError):
        convergence_study(case, "q2", [0.5, 0.25, 0.125])
    rep = convergence_study(case, "2d-bdm", [0.5, 0.25, 0.125])
    assert isinstance(rep, ConvergenceReport)
    lines = rep.to_csv(timings=False).splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 4
    first = lines[1].split(",")
    assert first[CSV_COLUMNS.index("rate_u_l2")] == "" and first[-1] == ""
    assert rep.to_csv(timings=False) == convergence_study(case, "2d-bdm", [0.5, 0.25, 0.125]).to_csv(timings=False)
