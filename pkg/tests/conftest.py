import sympy as sp

ACCEPTANCE_LINES = []


def to_sympy(p):
    """Independent oracle: a PolyField as a sympy expression array."""
    X = sp.symbols("x y z")[: p.dim]
    out = sp.MutableDenseNDimArray.zeros(*p.shape) if p.shape else None
    total = {}
    for comp, poly in p.terms.items():
        total[comp] = sum(sp.Rational(c.numerator, c.denominator) * sp.Mul(*[x ** e for x, e in zip(X, m)])
                          for m, c in poly.items())
    if not p.shape:
        return sp.sympify(total.get((), 0))
    for comp, expr in total.items():
        out[comp] = expr
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
