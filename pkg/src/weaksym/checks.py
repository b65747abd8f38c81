"""Named numerical checks with tolerances, shared by the CLI and tests."""
from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np
import sympy as sp

from .assembly import Material, build_spaces, fundamental_relation, inf_sup_constant
from .fields import SmoothField, symbols
from .interpolation import commuting_residual, wedge_flux_identity
from .mesh import build_mesh
from .polyspace import PolyField, constant
from .verification import (default_case, error_norms, make_case, refined_identity_check,
                           solve_case)

__all__ = ["CheckResult", "identity_checks", "random_poly", "smooth_test_fields",
           "galerkin_cases", "INF_SUP_MAX_DROP"]

INF_SUP_MAX_DROP = 0.20


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool

    @classmethod
    def upper(cls, name, value, tol):
        return cls(name, float(value), float(tol), bool(value <= tol))


def random_poly(rng, dim, degree=3, terms=6, bound=5):
    """Random integer-coefficient scalar polynomial of total degree <= ``degree``."""
    p = constant(dim, 0)
    for _ in range(terms):
        exps = [0] * dim
        for _ in range(rng.randint(0, degree)):
            exps[rng.randrange(dim)] += 1
        p = p + PolyField.monomial(tuple(exps)) * rng.randint(-bound, bound)
    return p


def smooth_test_fields(dim):
    """Vector and matrix test fields for the commuting-diagram checks."""
    X = symbols(dim)
    pi = sp.pi
    if dim == 2:
        x, y = X
        vec = [sp.sin(pi * x) * sp.sin(pi * y), x ** 2 * y ** 3]
        mat = [vec, [sp.cos(pi * x) * y, sp.exp(x) * y ** 2]]
        return SmoothField.from_sympy(sp.Array(vec), 2), SmoothField.from_sympy(sp.Array(mat), 2)
    x, y, z = X
    mat = [[sp.sin(pi * x) * y, z ** 2 * x, x * y * z],
           [sp.exp(z) * y, sp.cos(pi * y) * x, y ** 3],
           [x ** 2 * z, sp.sin(y + z), z * sp.exp(x)]]
    f = SmoothField.from_sympy(sp.Array(mat), 3)
    return f, f


def random_cubic_matrix(seed=0):
    rng = random.Random(seed)
    return SmoothField.from_poly(
        PolyField.matrix([[random_poly(rng, 3) for _ in range(3)] for _ in range(3)]))


def galerkin_cases():
    """Exact solutions whose stress and rotation lie in the discrete spaces."""
    x, y = symbols(2)
    X, Y, Z = symbols(3)
    half = sp.Rational(1, 2)
    return [
        ("2d affine", 2, [1 + 2 * x - y, 3 * x + y]),
        ("2d rigid rotation", 2, [sp.Rational(7, 10) * (y - half), sp.Rational(7, 10) * (half - x)]),
        ("2d translation", 2, [sp.Integer(2), sp.Integer(-1)]),
        ("3d affine", 3, [X + 2 * Y - Z, 3 * Z - X, Y + X + 2 * Z]),
    ]


def _refined(dim, pair, divisions):
    case = default_case(dim)
    spaces, _, sol = solve_case(case, pair, divisions)
    return refined_identity_check(sol, case, spaces).rel_mismatch


def identity_checks(dim, material=None, fundamental_samples=100):
    """Run every identity check for one dimension; returns CheckResults."""
    material = material or Material()
    out = []
    vec, mat = smooth_test_fields(dim)
    if dim == 2:
        mesh = build_mesh(2, (4, 4))
        out.append(CheckResult.upper("commuting div Pi_Sigma (4x4)",
                                     commuting_residual("DIV_SIGMA", mesh, mat), 1e-9))
        out.append(CheckResult.upper("commuting div Pi_R (4x4)",
                                     commuting_residual("DIV_R", mesh, vec), 1e-9))
        out.append(CheckResult.upper("surjectivity Pi_R Pi0 (4x4)",
                                     commuting_residual("SURJECTIVITY", mesh, vec), 1e-9))
    else:
        mesh = build_mesh(3, (2, 2, 2))
        out.append(CheckResult.upper("commuting div Pi_Sigma (2x2x2)",
                                     commuting_residual("DIV_SIGMA", mesh, mat), 1e-9))
        out.append(CheckResult.upper("commuting div Pi_R (2x2x2)",
                                     commuting_residual("DIV_R", mesh, mat), 1e-9))
        out.append(CheckResult.upper("surjectivity S face flux (2x2x2)",
                                     commuting_residual("SURJECTIVITY", mesh, random_cubic_matrix()), 1e-9))
        rng = np.random.default_rng(0)
        worst = 0.0
        for _ in range(100):
            n = rng.normal(size=3)
            lhs, rhs = wedge_flux_identity(rng.normal(size=(3, 3)), n / np.linalg.norm(n))
            worst = max(worst, float(np.abs(lhs - rhs).max()))
        out.append(CheckResult.upper("(Sq)n from q^n (100 random)", worst, 1e-12))

    rng = random.Random(dim)
    failures = 0
    for _ in range(fundamental_samples):
        if dim == 2:
            q = PolyField.vector([random_poly(rng, 2) for _ in range(2)])
        else:
            q = PolyField.matrix([[random_poly(rng, 3) for _ in range(3)] for _ in range(3)])
        lhs, rhs = fundamental_relation(q)
        failures += lhs != rhs
    out.append(CheckResult.upper(f"as curl q = -div S q ({fundamental_samples} random, exact)",
                                 failures, 0))

    if dim == 2:
        out.append(CheckResult.upper("refined identity 2d-bdm (4x4)", _refined(2, "2d-bdm", (4, 4)), 1e-8))
        out.append(CheckResult.upper("refined identity 2d-simplified (4x4)",
                                     _refined(2, "2d-simplified", (4, 4)), 1e-8))
        beta = [inf_sup_constant(build_spaces(build_mesh(2, (n, n)), "2d-bdm")) for n in (2, 4, 8)]
    else:
        out.append(CheckResult.upper("refined identity 3d (2x2x2)", _refined(3, "3d", (2, 2, 2)), 1e-7))
        beta = [inf_sup_constant(build_spaces(build_mesh(3, (n,) * 3), "3d")) for n in (1, 2, 4)]
    drop = 1 - min(beta) / beta[0]
    label = "2x2->8x8" if dim == 2 else "1->4 per axis"
    out.append(CheckResult.upper(f"inf-sup relative drop ({label})", drop, INF_SUP_MAX_DROP))

    for label, d, u in galerkin_cases():
        if d != dim:
            continue
        case = make_case(u, material, interior=True, label=label)
        pairs = ("2d-bdm", "2d-simplified") if dim == 2 else ("3d",)
        for pair in pairs:
            spaces, _, sol = solve_case(case, pair, (3, 2) if dim == 2 else (2, 1, 2))
            err = error_norms(sol, case, spaces, u_reference="projection")
            out.append(CheckResult.upper(f"Galerkin exactness {label} {pair}",
                                         max(err.as_dict().values()), 1e-9))
    return out
