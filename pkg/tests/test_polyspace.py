from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import to_sympy
from weaksym.polyspace import (CURL, DIV, GRAD, PolyField, constant, coordinates, exact_det,
                               exact_inverse, exact_kernel, exact_rank, poly_diff, span_rank)

X2 = sp.symbols("x y")
X3 = sp.symbols("x y z")

coef = st.integers(-6, 6)


@st.composite
def scalar_poly(draw, dim, max_deg=3):
    p = constant(dim, 0)
    for _ in range(draw(st.integers(0, 6))):
        exps = tuple(draw(st.integers(0, max_deg)) for _ in range(dim))
        p = p + PolyField.monomial(exps) * draw(coef)
    return p


@st.composite
def int_matrix(draw, n):
    return [[draw(coef) for _ in range(n)] for _ in range(n)]


def test_arithmetic_matches_sympy():
    x, y = coordinates(2)
    p = (1 + 2 * x - y) * (x * y - 3) ** 2 / 4
    X, Y = X2
    assert sp.expand(to_sympy(p) - (1 + 2 * X - Y) * (X * Y - 3) ** 2 / 4) == 0


@settings(max_examples=40, deadline=None)
@given(scalar_poly(2), scalar_poly(2))
def test_product_and_partial_against_sympy(p, q):
    assert sp.expand(to_sympy(p * q) - to_sympy(p) * to_sympy(q)) == 0
    for a in range(2):
        assert sp.expand(to_sympy(p.partial(a)) - sp.diff(to_sympy(p), X2[a])) == 0


@settings(max_examples=30, deadline=None)
@given(scalar_poly(3))
def test_integrate_unit_cube_against_sympy(p):
    expr = to_sympy(p)
    exact = sp.integrate(expr, (X3[0], 0, 1), (X3[1], 0, 1), (X3[2], 0, 1))
    got = p.integrate()
    got = got[()] if isinstance(got, np.ndarray) else got
    assert sp.Rational(got.numerator, got.denominator) == exact


def test_restrict_and_contract():
    x, y = coordinates(2)
    v = PolyField.vector([x * y + 1, x - y])
    r = v.restrict({0: 1})  # x = 1, free variable y
    assert r.dim == 1
    assert r.contract(np.array([1, 0], dtype=object)) == PolyField.monomial((1,)) + 1
    m = PolyField.matrix([[x, y], [1, x * y]])
    assert m.trace() == x + x * y
    assert m.transpose()[0, 1] == constant(2, 1)


@settings(max_examples=30, deadline=None)
@given(scalar_poly(2))
def test_2d_div_curl_is_zero(p):
    assert poly_diff(DIV, poly_diff(CURL, p)).is_zero()


@settings(max_examples=20, deadline=None)
@given(scalar_poly(3, 2))
def test_3d_curl_grad_and_div_curl_are_zero(p):
    assert poly_diff(CURL, poly_diff(GRAD, p)).is_zero()
    v = PolyField.vector([p, p * 2 + 1, p.partial(0)])
    assert poly_diff(DIV, poly_diff(CURL, v)).is_zero()


def test_row_wise_operators():
    x, y = coordinates(2)
    q = PolyField.vector([x ** 2 * y, x * y ** 2])
    c = poly_diff(CURL, q)
    assert c.shape == (2, 2)
    assert c[0, 0] == x ** 2 and c[0, 1] == -2 * x * y
    assert poly_diff(DIV, c).is_zero()
    with pytest.raises(ValueError):
        poly_diff(CURL, PolyField.vector([x, y, x]))


def test_tabulate_matches_exact_evaluation():
    x, y, z = coordinates(3)
    p = PolyField.vector([x * y * z + 2, z ** 2 - x, Fraction(1, 3) * y])
    pts = np.array([[0.2, 0.5, 0.9], [1.0, 0.0, 0.25]])
    for row, pt in zip(p.tabulate(pts), pts):
        np.testing.assert_allclose(row, p(*pt).astype(float))
    exact = p(Fraction(1, 2), 1, 0)
    assert exact[0] == 2 and exact[1] == Fraction(-1, 2)


@settings(max_examples=40, deadline=None)
@given(int_matrix(4))
def test_exact_det_and_inverse_against_sympy(m):
    M = sp.Matrix(m)
    assert exact_det(m) == M.det()
    if M.det() != 0:
        inv = exact_inverse(m)
        assert sp.Matrix(inv) == M.inv()
    else:
        with pytest.raises(ZeroDivisionError):
            exact_inverse(m)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_rank_nullity_and_kernel(rows, cols, data):
    m = [[data.draw(st.integers(-2, 2)) for _ in range(cols)] for _ in range(rows)]
    rank = exact_rank(m)
    kernel = exact_kernel(m)
    assert rank == sp.Matrix(m).rank()
    assert rank + len(kernel) == cols
    for v in kernel:
        assert all(sum(Fraction(a) * b for a, b in zip(r, v)) == 0 for r in m)


def test_span_rank_detects_dependency():
    x, y = coordinates(2)
    fields = [PolyField.vector([x, y]), PolyField.vector([constant(2, 1), 0]), PolyField.vector([x + 2, y])]
    rank, kernel = span_rank(fields)
    assert rank == 2
    assert len(kernel) == 1
    combo = sum((f * c for f, c in zip(fields, kernel[0])), PolyField(2, (2,)))
    assert combo.is_zero()
