"""Exact polynomial fields on the reference cell [0, 1]^dim.

A :class:`PolyField` is a scalar, vector or matrix valued polynomial stored
as a table of rational coefficients indexed by component and monomial
exponent tuple. Arithmetic, differentiation, restriction to faces and
integration over the unit cube are exact; conversion to floating point only
happens in :meth:`PolyField.tabulate`.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product
from numbers import Number, Rational

import numpy as np

__all__ = [
    "PolyField",
    "coordinates",
    "constant",
    "poly_eval",
    "poly_diff",
    "span_rank",
    "exact_rank",
    "exact_kernel",
    "exact_det",
    "exact_inverse",
]

GRAD, CURL, DIV = "GRAD", "CURL", "DIV"


def _frac(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, float) and c.is_integer():
        return Fraction(int(c))
    if isinstance(c, float):
        return Fraction(c).limit_denominator(10**12)
    raise TypeError(f"unsupported coefficient {c!r}")


def _components(shape):
    return list(product(*(range(n) for n in shape)))


class PolyField:
    """Polynomial field with exact rational coefficients.

    Parameters
    ----------
    dim : int
        Number of variables (0 is allowed for restrictions to vertices).
    shape : tuple
        ``()`` for scalars, ``(n,)`` for vectors, ``(n, n)`` for matrices.
    terms : dict, optional
        ``{component: {exponents: coefficient}}``. Zero entries are dropped.
    """

    __slots__ = ("dim", "shape", "_terms")

    def __init__(self, dim, shape=(), terms=None):
        self.dim = int(dim)
        self.shape = tuple(shape)
        clean = {}
        for comp, poly in (terms or {}).items():
            comp = tuple(comp)
            if len(comp) != len(self.shape) or any(
                not 0 <= i < n for i, n in zip(comp, self.shape)
            ):
                raise ValueError(f"component {comp} outside shape {self.shape}")
            table = {}
            for mono, c in poly.items():
                mono = tuple(int(e) for e in mono)
                if len(mono) != self.dim or min(mono, default=0) < 0:
                    raise ValueError(f"bad monomial {mono} for dim {self.dim}")
                c = _frac(c)
                if c:
                    table[mono] = table.get(mono, 0) + c
            table = {m: c for m, c in table.items() if c}
            if table:
                clean[comp] = table
        self._terms = clean

    # -- construction -------------------------------------------------
    @classmethod
    def monomial(cls, exponents, coefficient=1):
        exponents = tuple(exponents)
        return cls(len(exponents), (), {(): {exponents: coefficient}})

    @classmethod
    def vector(cls, entries):
        entries = [_as_scalar(e) for e in entries]
        dim = _common_dim(entries)
        entries = [_coerce(e, dim) if e is not None else None for e in entries]
        terms = {(i,): e.component(()) for i, e in enumerate(entries) if e is not None}
        return cls(dim, (len(entries),), terms)

    @classmethod
    def matrix(cls, rows):
        rows = [[_as_scalar(e) for e in row] for row in rows]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix fields must be square")
        dim = _common_dim([e for r in rows for e in r])
        rows = [[_coerce(e, dim) if e is not None else None for e in r] for r in rows]
        terms = {}
        for i, row in enumerate(rows):
            for j, e in enumerate(row):
                if e is not None:
                    terms[(i, j)] = e.component(())
        return cls(dim, (n, n), terms)

    @classmethod
    def stack(cls, fields):
        """Stack equally shaped fields along a new leading axis."""
        fields = list(fields)
        if not fields:
            raise ValueError("nothing to stack")
        dim, shape = fields[0].dim, fields[0].shape
        terms = {}
        for i, f in enumerate(fields):
            if f.dim != dim or f.shape != shape:
                raise ValueError("stacked fields must share dim and shape")
            for comp, poly in f._terms.items():
                terms[(i,) + comp] = poly
        return cls(dim, (len(fields),) + shape, terms)

    # -- access -------------------------------------------------------
    @property
    def terms(self):
        return {c: dict(p) for c, p in self._terms.items()}

    def component(self, comp):
        """Raw monomial table of one component (empty dict if zero)."""
        return dict(self._terms.get(tuple(comp), {}))

    def __getitem__(self, comp):
        if not isinstance(comp, tuple):
            comp = (comp,)
        if len(comp) == len(self.shape):
            return PolyField(self.dim, (), {(): self._terms.get(comp, {})})
        # partial index: a row of a matrix
        sub = {c[len(comp):]: p for c, p in self._terms.items() if c[: len(comp)] == comp}
        return PolyField(self.dim, self.shape[len(comp):], sub)

    def is_zero(self):
        return not self._terms

    def monomials(self):
        return sorted({m for p in self._terms.values() for m in p})

    def degree(self):
        """Maximal exponent per variable over all components."""
        degs = [0] * self.dim
        for m in self.monomials():
            degs = [max(a, b) for a, b in zip(degs, m)]
        return tuple(degs)

    def total_degree(self):
        return max((sum(m) for m in self.monomials()), default=0)

    # -- arithmetic ---------------------------------------------------
    def _binary(self, other, sign):
        other = _coerce(other, self.dim)
        if other.shape != self.shape or other.dim != self.dim:
            raise ValueError("shape mismatch in polynomial addition")
        terms = {c: dict(p) for c, p in self._terms.items()}
        for comp, poly in other._terms.items():
            table = terms.setdefault(comp, {})
            for m, c in poly.items():
                table[m] = table.get(m, 0) + sign * c
        return PolyField(self.dim, self.shape, terms)

    def __add__(self, other):
        return self._binary(other, 1)

    def __radd__(self, other):
        return self._binary(other, 1)

    def __sub__(self, other):
        return self._binary(other, -1)

    def __rsub__(self, other):
        return (-self)._binary(other, 1)

    def __neg__(self):
        return self * -1

    def __mul__(self, other):
        if isinstance(other, Number):
            c = _frac(other)
            return PolyField(
                self.dim, self.shape,
                {comp: {m: c * v for m, v in p.items()} for comp, p in self._terms.items()},
            )
        if not isinstance(other, PolyField):
            return NotImplemented
        if self.dim != other.dim:
            raise ValueError("dimension mismatch in polynomial product")
        if self.shape and other.shape:
            raise ValueError("only scalar-by-field products are supported")
        scalar, field = (self, other) if not self.shape else (other, self)
        s = scalar._terms.get((), {})
        terms = {}
        for comp, poly in field._terms.items():
            table = terms.setdefault(comp, {})
            for m1, c1 in s.items():
                for m2, c2 in poly.items():
                    m = tuple(a + b for a, b in zip(m1, m2))
                    table[m] = table.get(m, 0) + c1 * c2
        return PolyField(self.dim, field.shape, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Number):
            return NotImplemented
        return self * (1 / _frac(other))

    def __pow__(self, n):
        if self.shape or not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers of scalars")
        out = constant(self.dim, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Number):
            other = _coerce(other, self.dim)
        if not isinstance(other, PolyField):
            return NotImplemented
        return (self.dim, self.shape, self._terms) == (other.dim, other.shape, other._terms)

    def __hash__(self):
        items = tuple(sorted((c, tuple(sorted(p.items()))) for c, p in self._terms.items()))
        return hash((self.dim, self.shape, items))

    def __repr__(self):
        names = "xyz"[: self.dim] if self.dim <= 3 else [f"x{i}" for i in range(self.dim)]

        def fmt(poly):
            parts = []
            for m, c in sorted(poly.items(), reverse=True):
                mono = "*".join(
                    (v if e == 1 else f"{v}**{e}") for v, e in zip(names, m) if e
                )
                parts.append(f"{c}" if not mono else (mono if c == 1 else f"{c}*{mono}"))
            return " + ".join(parts) or "0"

        if not self.shape:
            return f"PolyField({fmt(self._terms.get((), {}))})"
        body = ", ".join(f"{c}: {fmt(p)}" for c, p in sorted(self._terms.items()))
        return f"PolyField(shape={self.shape}, {{{body}}})"

    # -- calculus -----------------------------------------------------
    def partial(self, axis):
        terms = {}
        for comp, poly in self._terms.items():
            table = {}
            for m, c in poly.items():
                if m[axis]:
                    d = list(m)
                    d[axis] -= 1
                    table[tuple(d)] = c * m[axis]
            terms[comp] = table
        return PolyField(self.dim, self.shape, terms)

    def restrict(self, fixed):
        """Substitute ``{axis: value}`` and drop those variables."""
        fixed = {int(a): _frac(v) for a, v in dict(fixed).items()}
        free = [a for a in range(self.dim) if a not in fixed]
        terms = {}
        for comp, poly in self._terms.items():
            table = {}
            for m, c in poly.items():
                for a, v in fixed.items():
                    c = c * v ** m[a] if m[a] else c
                if c:
                    key = tuple(m[a] for a in free)
                    table[key] = table.get(key, 0) + c
            terms[comp] = table
        return PolyField(len(free), self.shape, terms)

    def integrate(self):
        """Exact integral over the unit cube, one value per component."""
        out = np.zeros(self.shape, dtype=object)
        out[...] = Fraction(0)
        for comp, poly in self._terms.items():
            total = Fraction(0)
            for m, c in poly.items():
                w = Fraction(1)
                for e in m:
                    w /= e + 1
                total += c * w
            out[comp] = total
        return out if self.shape else out[()]

    def contract(self, direction):
        """Scalar field ``sum_c direction[c] * self[c]``."""
        direction = np.asarray(direction, dtype=object)
        if direction.shape != self.shape:
            raise ValueError("direction must match the field shape")
        out = PolyField(self.dim)
        for comp in _components(self.shape):
            w = direction[comp] if comp else direction[()]
            if w and comp in self._terms:
                out = out + PolyField(self.dim, (), {(): self._terms[comp]}) * _frac(w)
        return out

    def transpose(self):
        if len(self.shape) != 2:
            raise ValueError("transpose needs a matrix field")
        return PolyField(self.dim, self.shape, {(j, i): p for (i, j), p in self._terms.items()})

    def trace(self):
        if len(self.shape) != 2:
            raise ValueError("trace needs a matrix field")
        return sum((self[i, i] for i in range(self.shape[0])), PolyField(self.dim))

    # -- evaluation ---------------------------------------------------
    def __call__(self, *point):
        return poly_eval(self, point)

    def coefficient_table(self, index):
        """Dense coefficient vector over ``index = [(component, monomial), ...]``."""
        pos = {key: k for k, key in enumerate(index)}
        vec = [Fraction(0)] * len(index)
        for comp, poly in self._terms.items():
            for m, c in poly.items():
                vec[pos[(comp, m)]] = c
        return vec

    def keys(self):
        return [(comp, m) for comp, poly in self._terms.items() for m in poly]

    def tabulate(self, points):
        """Float values at ``points`` of shape (npts, dim) -> (npts, *shape)."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        out = np.zeros((pts.shape[0],) + self.shape)
        for comp, poly in self._terms.items():
            acc = np.zeros(pts.shape[0])
            for m, c in poly.items():
                acc += float(c) * np.prod(pts ** np.array(m, dtype=float), axis=1)
            out[(slice(None),) + comp] = acc
        return out


def _as_scalar(e):
    if e is None or isinstance(e, Number):
        return e
    if not isinstance(e, PolyField) or e.shape:
        raise ValueError("entries must be scalar PolyFields or numbers")
    return e


def _common_dim(entries):
    dims = {e.dim for e in entries if isinstance(e, PolyField)}
    if len(dims) != 1:
        raise ValueError("entries must share a single dimension")
    return dims.pop()


def _coerce(other, dim):
    if isinstance(other, PolyField):
        return other
    if isinstance(other, Number):
        return constant(dim, other)
    raise TypeError(f"cannot combine PolyField with {type(other).__name__}")


def coordinates(dim):
    """The coordinate functions ``x, y[, z]`` as scalar fields."""
    return [PolyField.monomial(tuple(int(i == a) for i in range(dim))) for a in range(dim)]


def constant(dim, c, shape=()):
    if not shape:
        return PolyField(dim, (), {(): {(0,) * dim: c}})
    return PolyField(dim, shape, {comp: {(0,) * dim: c} for comp in _components(shape)})


def poly_eval(p, point):
    """Evaluate ``p`` at a point; exact if the coordinates are rationals."""
    point = tuple(point)
    if len(point) != p.dim:
        raise ValueError(f"point has {len(point)} coordinates, field has dim {p.dim}")
    exact = all(isinstance(v, (int, Fraction)) for v in point)
    zero = Fraction(0) if exact else 0.0
    out = np.zeros(p.shape, dtype=object if exact else float)
    for comp, poly in p._terms.items():
        acc = zero
        for m, c in poly.items():
            term = c if exact else float(c)
            for v, e in zip(point, m):
                if e:
                    term = term * v ** e
            acc = acc + term
        out[comp] = acc
    if not p.shape:
        return out[()]
    return out


def _scalar_curl_2d(q):
    return PolyField.vector([q.partial(1), -q.partial(0)])


def _vector_curl_3d(v):
    d = lambda i, a: v[i].partial(a)  # noqa: E731
    return PolyField.vector([
        d(2, 1) - d(1, 2),
        -d(2, 0) + d(0, 2),
        d(1, 0) - d(0, 1),
    ])


def poly_diff(op, p):
    """Apply GRAD, CURL or DIV to ``p``, row-wise on vector/matrix fields.

    * GRAD: scalar -> vector, vector -> matrix (row i is grad of component i).
    * CURL: 2D scalar -> vector ``(d_y q, -d_x q)``, 2D vector -> matrix;
      3D vector -> vector, 3D matrix -> matrix.
    * DIV: vector -> scalar, matrix -> vector.
    """
    op = str(op).upper()
    rank = len(p.shape)
    if op == GRAD:
        if rank == 0:
            return PolyField.vector([p.partial(a) for a in range(p.dim)])
        if rank == 1:
            return PolyField.stack([poly_diff(GRAD, p[i]) for i in range(p.shape[0])])
    elif op == DIV:
        if rank == 1 and p.shape[0] == p.dim:
            return sum((p[a].partial(a) for a in range(p.dim)), PolyField(p.dim))
        if rank == 2 and p.shape == (p.dim, p.dim):
            return PolyField.stack([poly_diff(DIV, p[i]) for i in range(p.dim)])
    elif op == CURL:
        if p.dim == 2 and rank == 0:
            return _scalar_curl_2d(p)
        if p.dim == 2 and rank == 1 and p.shape == (2,):
            return PolyField.stack([_scalar_curl_2d(p[i]) for i in range(2)])
        if p.dim == 3 and rank == 1 and p.shape == (3,):
            return _vector_curl_3d(p)
        if p.dim == 3 and p.shape == (3, 3):
            return PolyField.stack([_vector_curl_3d(p[i]) for i in range(3)])
    raise ValueError(f"{op} not defined for dim={p.dim}, shape={p.shape}")


# -- exact linear algebra over the rationals ------------------------------

def _rref(rows, ncols):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    rows = [[_frac(v) for v in r] for r in rows]
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][col]
        lead = [v * inv if v else v for v in rows[r]]
        rows[r] = lead
        nz = [j for j in range(col, len(lead)) if lead[j]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                f = rows[i][col]
                row = rows[i]
                for j in nz:
                    row[j] -= f * lead[j]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def exact_rank(matrix):
    matrix = [list(r) for r in matrix]
    if not matrix:
        return 0
    return len(_rref(matrix, len(matrix[0]))[1])


def exact_kernel(matrix, ncols=None):
    """Basis of the right null space of ``matrix`` (list of Fraction lists)."""
    matrix = [list(r) for r in matrix]
    n = ncols if ncols is not None else len(matrix[0])
    red, pivots = _rref(matrix, n) if matrix else ([], [])
    free = [j for j in range(n) if j not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def exact_det(matrix):
    a = [[_frac(v) for v in r] for r in matrix]
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("determinant needs a square matrix")
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det *= p
        nz = [j for j in range(col + 1, n) if a[col][j]]
        for i in range(col + 1, n):
            if a[i][col]:
                f = a[i][col] / p
                for j in nz:
                    a[i][j] -= f * a[col][j]
    return det


def exact_inverse(matrix):
    n = len(matrix)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(matrix)]
    red, pivots = _rref(aug, n)
    if pivots != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in red]


def span_rank(fields):
    """Rank of a list of fields and the kernel of ``c -> sum_j c_j fields[j]``.

    Returns ``(rank, kernel)`` with kernel vectors as lists of Fractions in
    the coordinates of ``fields``.
    """
    fields = list(fields)
    if not fields:
        raise ValueError("span_rank needs at least one field")
    dim, shape = fields[0].dim, fields[0].shape
    if any(f.dim != dim or f.shape != shape for f in fields):
        raise ValueError("all fields must share dim and shape")
    index = sorted({k for f in fields for k in f.keys()})
    if not index:
        return 0, [[Fraction(int(i == j)) for j in range(len(fields))] for i in range(len(fields))]
    cols = [f.coefficient_table(index) for f in fields]
    rows = [[cols[j][i] for j in range(len(fields))] for i in range(len(index))]
    kernel = exact_kernel(rows, len(fields))
    return len(fields) - len(kernel), kernel
