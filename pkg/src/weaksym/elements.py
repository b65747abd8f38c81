"""Reference elements on [0, 1]^dim: shape spaces, DOFs, nodal bases.

Every element is a Ciarlet triple: a list of shape fields spanning the
polynomial space, a list of :class:`DofFunctional` of the same length, and
(after :func:`nodal_basis`) the coefficient matrix of the dual basis. The
generalized Vandermonde matrix is assembled in exact rational arithmetic so
unisolvency is certified, not assumed.

Facet DOFs always use the positive axis direction as normal and, where a
tangent is needed, the positive direction of the remaining axis (2D) or the
edge axis (3D). Edge and face weights are polynomials in the entity's free
reference coordinates taken in increasing axis order.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product

import numpy as np

from .polyspace import (
    CURL,
    DIV,
    GRAD,
    PolyField,
    constant,
    coordinates,
    exact_det,
    exact_inverse,
    exact_kernel,
    poly_diff,
    span_rank,
)

__all__ = [
    "ElementFamily",
    "RefEntity",
    "DofFunctional",
    "ReferenceElement",
    "UnisolvencyError",
    "make_element",
    "vandermonde",
    "nodal_basis",
    "exact_sequence_check",
    "SequenceReport",
    "ref_vertices",
    "ref_facets",
    "ref_edges",
    "wedge",
    "certify",
    "standard_sequences",
]

HALF = Fraction(1, 2)


class ElementFamily(str, Enum):
    P0 = "P0"
    P0_VEC = "P0_VEC"
    P0_ROT = "P0_ROT"
    BDM1 = "BDM1"
    BDM1_ROW_STRESS = "BDM1_ROW_STRESS"
    BDM1_ROW_STRESS_3D = "BDM1_ROW_STRESS_3D"
    RT0 = "RT0"
    RT0_ROW_3D = "RT0_ROW_3D"
    SERENDIPITY2 = "SERENDIPITY2"
    SERENDIPITY2_3D = "SERENDIPITY2_3D"
    THETA_SERENDIPITY = "THETA_SERENDIPITY"
    THETA_SIMPLIFIED = "THETA_SIMPLIFIED"
    SIGMA_SIMPLIFIED = "SIGMA_SIMPLIFIED"
    UK = "UK"
    THETA_UK = "THETA_UK"
    SIGMA_HIGHER = "SIGMA_HIGHER"
    THETA_HIGHER = "THETA_HIGHER"


class UnisolvencyError(ValueError):
    """Raised when the DOFs do not determine the shape space uniquely."""

    def __init__(self, message, kernel=None):
        super().__init__(message)
        self.kernel = kernel


# -- reference entities ----------------------------------------------------

@dataclass(frozen=True)
class RefEntity:
    kind: str  # "vertex" | "edge" | "face" | "interior"
    index: int
    fixed: tuple  # ((axis, value), ...)
    free: tuple  # free axes, increasing

    @property
    def measure(self):
        return 1


def ref_vertices(dim):
    return [
        RefEntity("vertex", v, tuple((a, (v >> a) & 1) for a in range(dim)), ())
        for v in range(2 ** dim)
    ]


def ref_facets(dim):
    kind = "edge" if dim == 2 else "face"
    out = []
    for a in range(dim):
        for side in (0, 1):
            out.append(RefEntity(kind, 2 * a + side, ((a, side),),
                                 tuple(b for b in range(dim) if b != a)))
    return out


def ref_edges(dim):
    if dim == 2:
        return ref_facets(2)
    out = []
    for a in range(3):
        b1, b2 = [b for b in range(3) if b != a]
        for s1, s2 in product((0, 1), repeat=2):
            out.append(RefEntity("edge", 4 * a + 2 * s1 + s2, ((b1, s1), (b2, s2)), (a,)))
    return out


def ref_interior(dim):
    return RefEntity("interior", 0, (), tuple(range(dim)))


def ref_barycenter(dim):
    return RefEntity("interior", 0, tuple((a, HALF) for a in range(dim)), ())


def facet_axis(entity):
    return entity.fixed[0][0]


# -- DOF functionals ------------------------------------------------------

@dataclass(frozen=True)
class DofFunctional:
    """``kind='point'``: value of ``direction : field`` at the (fully fixed)
    entity. ``kind='moment'``: integral over the entity of
    ``(direction : field) * weight``."""

    entity: RefEntity
    kind: str
    trace: str
    direction: tuple
    weight: PolyField = field(default=None, compare=False)

    def __post_init__(self):
        if self.weight is None:
            object.__setattr__(self, "weight", constant(len(self.entity.free), 1))
        if self.kind == "point" and self.entity.free:
            raise ValueError("point DOFs need a fully fixed entity")

    def __call__(self, p):
        r = p.restrict(dict(self.entity.fixed)).contract(np.array(self.direction, dtype=object))
        if self.kind == "point":
            return r.integrate()
        return (r * self.weight).integrate()

    def lifted(self, row, n):
        """The same functional acting on row ``row`` of a stacked field."""
        d = np.zeros((n,) + np.shape(self.direction), dtype=object)
        d[...] = 0
        src = np.array(self.direction, dtype=object)
        d[row] = src if src.shape else src[()]
        return dataclasses.replace(
            self, direction=_nested(d), trace=f"row{row}:{self.trace}"
        )


def _nested(a):
    a = np.asarray(a, dtype=object)
    return a.tolist() if a.shape else a[()]


def _tuple_dir(shape, comp, value=1):
    d = np.zeros(shape, dtype=object)
    d[...] = 0
    d[comp] = value
    return _nested(d)


def wedge(v, n):
    """Row-wise ``v ^ n`` in the component order used for face DOFs.

    For a vector ``v`` and normal ``n`` this is
    ``(v3 n1 - v1 n3, v1 n2 - v2 n1, v2 n3 - v3 n2)``; matrices are
    treated row by row.
    """
    v = np.asarray(v)
    n = np.asarray(n)
    v1, v2, v3 = v[..., 0], v[..., 1], v[..., 2]
    n1, n2, n3 = n[..., 0], n[..., 1], n[..., 2]
    return np.stack([v3 * n1 - v1 * n3, v1 * n2 - v2 * n1, v2 * n3 - v3 * n2], axis=-1)


def _wedge_directions(axis):
    """Linear functionals v -> (v ^ e_axis)_c for the two nonzero c."""
    out = []
    for c in range(3):
        d = [0, 0, 0]
        for j in range(3):
            e = [0, 0, 0]
            e[j] = 1
            n = [0, 0, 0]
            n[axis] = 1
            d[j] = int(wedge(np.array(e), np.array(n))[c])
        if any(d):
            out.append((c, d))
    return out


# -- reference element ----------------------------------------------------

_DIMS = {
    "P0": (2, 3), "P0_VEC": (2, 3), "P0_ROT": (2, 3), "BDM1": (2, 3), "RT0": (2, 3),
    "BDM1_ROW_STRESS": (2,), "BDM1_ROW_STRESS_3D": (3,), "RT0_ROW_3D": (3,),
    "SERENDIPITY2": (2,), "SERENDIPITY2_3D": (3,), "THETA_SERENDIPITY": (2,),
    "THETA_SIMPLIFIED": (2,), "SIGMA_SIMPLIFIED": (2,), "UK": (3,), "THETA_UK": (3,),
    "SIGMA_HIGHER": (2,), "THETA_HIGHER": (2,),
}

_HDIV = {"BDM1", "RT0", "BDM1_ROW_STRESS", "BDM1_ROW_STRESS_3D", "RT0_ROW_3D",
         "SIGMA_SIMPLIFIED", "SIGMA_HIGHER"}
_CONTINUITY = {
    "P0": "discontinuous", "P0_VEC": "discontinuous", "P0_ROT": "discontinuous",
    "SERENDIPITY2": "c0", "SERENDIPITY2_3D": "c0", "THETA_SERENDIPITY": "c0",
    "THETA_HIGHER": "c0", "THETA_SIMPLIFIED": "vertex-normal", "UK": "tangential",
    "THETA_UK": "tangential",
}


@dataclass(frozen=True, eq=False)
class ReferenceElement:
    name: str
    family: ElementFamily
    dim: int
    value_shape: tuple
    basis: tuple
    dofs: tuple
    continuity: str
    mapping: str  # "contravariant" (row-wise H(div) Piola) or "identity"
    order: int = None
    coefficients: np.ndarray = field(default=None, repr=False)
    coefficients_exact: tuple = field(default=None, repr=False)

    @property
    def space_dim(self):
        return len(self.basis)

    @property
    def n_dofs(self):
        return len(self.dofs)

    @property
    def nodal(self):
        """Nodal basis fields ``phi_k = sum_j C[j, k] psi_j`` (exact)."""
        if self.coefficients_exact is None:
            raise ValueError(f"{self.name}: nodal basis not computed")
        out = []
        for k in range(self.n_dofs):
            f = PolyField(self.dim, self.value_shape)
            for j, psi in enumerate(self.basis):
                c = self.coefficients_exact[j][k]
                if c:
                    f = f + psi * c
            out.append(f)
        return out

    def tabulate(self, points):
        """Nodal basis values at reference points, (n_dofs, npts, *shape)."""
        raw = np.stack([b.tabulate(points) for b in self.basis])
        return np.tensordot(self._coeffs().T, raw, axes=1)

    def tabulate_div(self, points):
        """Row-wise divergence of the nodal basis, (n_dofs, npts, *shape[:-1])."""
        raw = np.stack([poly_diff(DIV, b).tabulate(points) for b in self.basis])
        return np.tensordot(self._coeffs().T, raw, axes=1)

    def _coeffs(self):
        if self.coefficients is None:
            raise ValueError(f"{self.name}: call nodal_basis() first")
        return self.coefficients

    def entity_dofs(self):
        """``{(kind, local index): [dof numbers]}`` in DOF order."""
        out = {}
        for i, d in enumerate(self.dofs):
            out.setdefault((d.entity.kind, d.entity.index), []).append(i)
        return out


def _stack_element(basis, dofs, n):
    """Fields with ``n`` independent rows/components, each in ``basis``."""
    zero = PolyField(basis[0].dim, basis[0].shape)
    out_basis = []
    for i in range(n):
        for b in basis:
            out_basis.append(PolyField.stack([b if r == i else zero for r in range(n)]))
    out_dofs = [d.lifted(i, n) for i in range(n) for d in dofs]
    return out_basis, out_dofs


def _vec(dim, comp, p):
    return PolyField.vector([p if a == comp else 0 for a in range(dim)])


def _mono(dim, exps):
    return PolyField.monomial(exps)


# -- families ---------------------------------------------------------------

def _p0(dim, ncomp):
    shape = () if ncomp == 0 else (ncomp,)
    ent = ref_barycenter(dim)
    if ncomp == 0:
        return [constant(dim, 1)], [DofFunctional(ent, "point", "value", 1)]
    basis = [PolyField(dim, shape, {(c,): {(0,) * dim: 1}}) for c in range(ncomp)]
    dofs = [DofFunctional(ent, "point", f"value[{c}]", _tuple_dir(shape, c)) for c in range(ncomp)]
    return basis, dofs


def _facet_weights(dim, degree):
    """Monomial weights of total degree <= degree on a facet."""
    nfree = dim - 1
    exps = [e for e in product(range(degree + 1), repeat=nfree) if sum(e) <= degree]
    exps.sort(key=lambda e: (sum(e), tuple(reversed(e))))
    return [PolyField.monomial(e) for e in exps]


def _normal_moment_dofs(dim, degree):
    dofs = []
    for ent in ref_facets(dim):
        a = facet_axis(ent)
        for w in _facet_weights(dim, degree):
            dofs.append(DofFunctional(ent, "moment", "normal", _tuple_dir((dim,), a), w))
    return dofs


def _bdm1(dim):
    X = coordinates(dim)
    one = constant(dim, 1)
    basis = [_vec(dim, c, m) for c in range(dim) for m in [one] + X]
    if dim == 2:
        x, y = X
        basis += [poly_diff(CURL, x ** 2 * y), poly_diff(CURL, x * y ** 2)]
    else:
        x, y, z = X
        extra = [
            _vec(3, 2, x * y ** 2), _vec(3, 2, x ** 2 * y),
            _vec(3, 0, y ** 2 * z), _vec(3, 0, y * z ** 2),
            _vec(3, 1, x * z ** 2), _vec(3, 1, x ** 2 * z),
        ]
        basis += [poly_diff(CURL, e) for e in extra]
    return basis, _normal_moment_dofs(dim, 1)


def _rt0(dim):
    X = coordinates(dim)
    basis = []
    for a in range(dim):
        basis += [_vec(dim, a, constant(dim, 1)), _vec(dim, a, X[a])]
    return basis, _normal_moment_dofs(dim, 0)


def _serendipity(dim):
    exps = [e for e in product(range(3), repeat=dim) if sum(e) <= 2]
    if dim == 2:
        exps += [(2, 1), (1, 2)]
    else:
        exps += [(2, 1, 0), (2, 0, 1), (1, 2, 0), (1, 0, 2), (0, 2, 1), (0, 1, 2),
                 (1, 1, 1), (2, 1, 1), (1, 2, 1), (1, 1, 2)]
    basis = [PolyField.monomial(e) for e in exps]
    dofs = [DofFunctional(v, "point", "value", 1) for v in ref_vertices(dim)]
    dofs += [DofFunctional(e, "moment", "average", 1) for e in ref_edges(dim)]
    return basis, dofs


def _theta_simplified():
    x, y = coordinates(2)
    basis = [_vec(2, c, m) for c in range(2) for m in [constant(2, 1), x, y, x * y]]
    basis += _simplified_bubbles()
    dofs = [DofFunctional(v, "point", f"value[{c}]", _tuple_dir((2,), c))
            for v in ref_vertices(2) for c in range(2)]
    # edge averages of the tangential component: each bubble is tangential
    # on exactly one edge and vanishes in the normal direction everywhere
    dofs += [DofFunctional(e, "moment", "tangential", _tuple_dir((2,), 1 - facet_axis(e)))
             for e in ref_facets(2)]
    return basis, dofs


def _simplified_bubbles():
    x, y = coordinates(2)
    return [
        _vec(2, 0, -x * (1 - x) * (1 - y)),
        _vec(2, 1, -y * (1 - y) * (1 - x)),
        _vec(2, 0, x * (1 - x) * y),
        _vec(2, 1, x * y * (1 - y)),
    ]


def _matrix_unit(dim, i, j, p):
    return PolyField(dim, (dim, dim), {(i, j): p.component(())})


def _sigma_simplified():
    x, y = coordinates(2)
    one = constant(2, 1)
    basis = []
    for i in range(2):
        basis += [_matrix_unit(2, i, 0, m) for m in (one, x)]
        basis += [_matrix_unit(2, i, 1, m) for m in (one, y)]
    basis += [poly_diff(CURL, p) for p in _simplified_bubbles()]
    dofs = []
    for e in ref_facets(2):
        a = facet_axis(e)
        t = 1 - a
        dofs.append(DofFunctional(e, "moment", "normal-normal", _tuple_dir((2, 2), (a, a))))
        for w in _facet_weights(2, 1):
            dofs.append(DofFunctional(e, "moment", "normal-tangent", _tuple_dir((2, 2), (t, a)), w))
    return basis, dofs


def _uk():
    x, y, z = coordinates(3)
    one = constant(3, 1)
    q111 = [m for m in (one, x, y, z, x * y, x * z, y * z, x * y * z)]
    basis = [_vec(3, c, m) for c in range(3) for m in q111]
    basis += [_vec(3, 0, m) for m in (y ** 2 * z, y * z ** 2, y ** 2, z ** 2)]
    basis += [_vec(3, 1, m) for m in (x ** 2 * z, x * z ** 2, x ** 2, z ** 2)]
    basis += [_vec(3, 2, m) for m in (x ** 2 * y, x * y ** 2, x ** 2, y ** 2)]
    dofs = []
    for e in ref_edges(3):
        a = e.free[0]
        for w in _facet_weights(2, 1):
            dofs.append(DofFunctional(e, "moment", "tangential", _tuple_dir((3,), a), w))
    for f in ref_facets(3):
        for c, d in _wedge_directions(facet_axis(f)):
            dofs.append(DofFunctional(f, "moment", f"wedge[{c}]", d))
    return basis, dofs


def _sigma_higher_row(k):
    basis = [_vec(2, 0, _mono(2, (a, b))) for b in range(k + 1) for a in range(k + 2)]
    basis += [_vec(2, 1, _mono(2, (a, b))) for b in range(k + 2) for a in range(k + 1)]
    dofs = _normal_moment_dofs(2, k)
    inner = ref_interior(2)
    # interior weights P_{k-1,k} x P_{k,k-1}; the transposed pairing is singular
    dofs += [DofFunctional(inner, "moment", "interior[0]", _tuple_dir((2,), 0), _mono(2, (a, b)))
             for b in range(k + 1) for a in range(k)]
    dofs += [DofFunctional(inner, "moment", "interior[1]", _tuple_dir((2,), 1), _mono(2, (a, b)))
             for b in range(k) for a in range(k + 1)]
    return basis, dofs


def _q_scalar(k):
    """Continuous Q_{k+1} scalar: vertex values, edge and interior moments."""
    basis = [_mono(2, (a, b)) for b in range(k + 2) for a in range(k + 2)]
    dofs = [DofFunctional(v, "point", "value", 1) for v in ref_vertices(2)]
    dofs += [DofFunctional(e, "moment", "value", 1, PolyField.monomial((m,)))
             for e in ref_edges(2) for m in range(k)]
    inner = ref_interior(2)
    dofs += [DofFunctional(inner, "moment", "value", 1, _mono(2, (a, b)))
             for b in range(k) for a in range(k)]
    return basis, dofs


def make_element(family, dim=2, k=None):
    """Build the reference element ``family`` (shape space + DOFs).

    ``k`` is required for SIGMA_HIGHER / THETA_HIGHER and must be 1 or 2.
    The returned element has no nodal basis yet; see :func:`nodal_basis`.
    """
    try:
        family = ElementFamily(str(getattr(family, "value", family)).upper())
    except ValueError:
        raise ValueError(f"unknown element family {family!r}") from None
    name = family.value
    if dim not in _DIMS[name]:
        raise ValueError(f"{name} is not defined for dim={dim}")
    if name in ("SIGMA_HIGHER", "THETA_HIGHER"):
        if k not in (1, 2):
            raise ValueError(f"{name} needs k in {{1, 2}}, got {k}")
    elif k is not None:
        raise ValueError(f"{name} takes no order parameter")

    if name == "P0":
        basis, dofs = _p0(dim, 0)
    elif name == "P0_VEC":
        basis, dofs = _p0(dim, dim)
    elif name == "P0_ROT":
        basis, dofs = _p0(dim, 0 if dim == 2 else 3)
    elif name == "BDM1":
        basis, dofs = _bdm1(dim)
    elif name in ("BDM1_ROW_STRESS", "BDM1_ROW_STRESS_3D"):
        basis, dofs = _stack_element(*_bdm1(dim), dim)
    elif name == "RT0":
        basis, dofs = _rt0(dim)
    elif name == "RT0_ROW_3D":
        basis, dofs = _stack_element(*_rt0(3), 3)
    elif name in ("SERENDIPITY2", "SERENDIPITY2_3D"):
        basis, dofs = _serendipity(dim)
    elif name == "THETA_SERENDIPITY":
        basis, dofs = _stack_element(*_serendipity(2), 2)
    elif name == "THETA_SIMPLIFIED":
        basis, dofs = _theta_simplified()
    elif name == "SIGMA_SIMPLIFIED":
        basis, dofs = _sigma_simplified()
    elif name == "UK":
        basis, dofs = _uk()
    elif name == "THETA_UK":
        basis, dofs = _stack_element(*_uk(), 3)
    elif name == "SIGMA_HIGHER":
        basis, dofs = _stack_element(*_sigma_higher_row(k), 2)
    else:  # THETA_HIGHER
        basis, dofs = _stack_element(*_q_scalar(k), 2)

    label = name if k is None else f"{name}(k={k})"
    return ReferenceElement(
        name=label, family=family, dim=dim, value_shape=basis[0].shape,
        basis=tuple(basis), dofs=tuple(dofs),
        continuity="hdiv" if name in _HDIV else _CONTINUITY[name],
        mapping="contravariant" if name in _HDIV else "identity", order=k,
    )


def vandermonde(elem, exact=True):
    """Matrix ``V[i, j] = dof_i(basis_j)``; Fractions if ``exact`` else floats."""
    V = [[dof(b) for b in elem.basis] for dof in elem.dofs]
    if exact:
        return V
    return np.array([[float(v) for v in row] for row in V])


def nodal_basis(elem):
    """Return a copy of ``elem`` with the dual (nodal) basis coefficients.

    Raises :class:`UnisolvencyError` carrying a kernel vector when the
    Vandermonde matrix is singular or not square.
    """
    if elem.space_dim != elem.n_dofs:
        raise UnisolvencyError(
            f"{elem.name}: {elem.space_dim} shape functions but {elem.n_dofs} DOFs")
    V = vandermonde(elem)
    try:
        inv = exact_inverse(V)
    except ZeroDivisionError:
        kernel = exact_kernel(V)
        raise UnisolvencyError(f"{elem.name}: DOFs are not unisolvent", kernel[0]) from None
    coeffs = np.array([[float(c) for c in row] for row in inv])
    return dataclasses.replace(
        elem, coefficients=coeffs, coefficients_exact=tuple(tuple(r) for r in inv))


def certify(elem):
    """Exact determinant and float condition number of the Vandermonde matrix."""
    V = vandermonde(elem)
    square = elem.space_dim == elem.n_dofs
    det = exact_det(V) if square else Fraction(0)
    cond = float(np.linalg.cond(np.array(V, dtype=float))) if square else float("inf")
    return {
        "family": elem.name, "dim": elem.dim, "space_dim": elem.space_dim,
        "n_dofs": elem.n_dofs, "det": det, "cond": cond,
        "unisolvent": bool(square and det != 0),
    }


# -- exact sequences ------------------------------------------------------------

@dataclass
class SequenceReport:
    names: list
    dims: list
    ranks: list
    inclusions: list
    defects: list

    @property
    def alternating_sum(self):
        return sum((-1) ** i * d for i, d in enumerate(self.dims))

    @property
    def exact(self):
        return all(self.inclusions) and not any(self.defects)


_OPS = {"INCLUSION": lambda p: p, "GRAD": lambda p: poly_diff(GRAD, p),
        "CURL": lambda p: poly_diff(CURL, p), "DIV": lambda p: poly_diff(DIV, p)}


def exact_sequence_check(steps):
    """Check a finite sequence of polynomial spaces and maps.

    Parameters
    ----------
    steps : list of (name, basis, op)
        ``op`` maps the space into the next one (``"INCLUSION"``, ``"GRAD"``,
        ``"CURL"``, ``"DIV"`` or a callable); the last ``op`` is ``None`` and
        stands for the zero map.

    The defect at space ``j`` is ``dim ker(op_j) - rank(op_{j-1})``; the
    sequence is exact iff every image lies in the next space and every
    defect vanishes.
    """
    steps = list(steps)
    if not steps or steps[-1][2] is not None:
        raise ValueError("last step must carry op=None (map to zero)")
    dims, ranks, kernels, inclusions = [], [], [], []
    for j, (name, basis, op) in enumerate(steps):
        basis = list(basis)
        dims.append(span_rank(basis)[0])
        if op is None:
            ranks.append(0)
            kernels.append(dims[-1])
            continue
        fn = _OPS[op.upper()] if isinstance(op, str) else op
        images = [fn(b) for b in basis]
        nxt = list(steps[j + 1][1])
        if any(im.shape != nxt[0].shape or im.dim != nxt[0].dim for im in images):
            raise ValueError(f"{name}: image shape does not match {steps[j + 1][0]}")
        r = span_rank(images)[0]
        ranks.append(r)
        kernels.append(dims[-1] - r)
        inclusions.append(span_rank(nxt + images)[0] == span_rank(nxt)[0])
    defects = [kernels[j] - (ranks[j - 1] if j else 0) for j in range(len(steps))]
    return SequenceReport([s[0] for s in steps], dims, ranks, inclusions, defects)


def standard_sequences():
    """The sequences whose exactness underpins the construction.

    Returns ``{label: steps}`` for the 2D serendipity/BDM1 sequence, the 3D
    serendipity/U_K/BDM1 sequence and the higher-order 2D sequences.
    """
    out = {}
    s2 = make_element("SERENDIPITY2", 2).basis
    out["2d"] = [("R", [constant(2, 1)], "INCLUSION"), ("S_K", s2, "CURL"),
                 ("BDM1", make_element("BDM1", 2).basis, "DIV"),
                 ("P0", make_element("P0", 2).basis, None)]
    out["3d"] = [("R", [constant(3, 1)], "INCLUSION"),
                 ("S_K", make_element("SERENDIPITY2_3D", 3).basis, "GRAD"),
                 ("U_K", make_element("UK", 3).basis, "CURL"),
                 ("BDM1", make_element("BDM1", 3).basis, "DIV"),
                 ("P0", make_element("P0", 3).basis, None)]
    for k in (1, 2):
        q = [_mono(2, (a, b)) for b in range(k + 2) for a in range(k + 2)]
        out[f"2d-higher-k{k}"] = [
            ("R", [constant(2, 1)], "INCLUSION"), ("Q_k+1", q, "CURL"),
            ("RT_row", _sigma_higher_row(k)[0], "DIV"),
            ("Q_k", [_mono(2, (a, b)) for b in range(k + 1) for a in range(k + 1)], None),
        ]
    return out
