"""Axis-aligned tensor-product meshes of rectangles (2D) and boxes (3D).

Entity numbering is deterministic. Vertices use x-fastest ordering of the
grid index. Facets and 3D edges are sorted lexicographically by their
lowest-corner grid index (slowest axis first) and then by axis label.

Local numbering inside a cell, shared with :mod:`weaksym.elements`:

* vertex ``v``: bit ``a`` of ``v`` is the side (0 low, 1 high) along axis ``a``;
* facet ``2*a + side``: the facet normal to axis ``a`` at that side;
* 3D edge ``4*a + 2*s1 + s2``: tangent axis ``a``, sides ``s1, s2`` along the
  two remaining axes in increasing order.

Every facet normal is the positive axis direction ``+e_a``, on both sides.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product

import numpy as np

__all__ = ["Mesh", "AffineMap", "build_mesh", "cell_affine", "facet_geometry", "FacetGeometry"]


@dataclass(frozen=True)
class AffineMap:
    """``F(xhat) = B xhat + b`` with ``B`` diagonal and positive."""

    B: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        if B.ndim != 2 or not np.allclose(B, np.diag(np.diag(B))) or np.any(np.diag(B) <= 0):
            raise ValueError("B must be diagonal with positive entries")

    @property
    def scales(self):
        return np.diag(self.B).copy()

    @property
    def det(self):
        return float(np.prod(np.diag(self.B)))

    @property
    def Binv(self):
        return np.diag(1.0 / np.diag(self.B))

    def __call__(self, xhat):
        xhat = np.asarray(xhat, dtype=float)
        return xhat * np.diag(self.B) + self.b

    def inverse(self, x):
        x = np.asarray(x, dtype=float)
        return (x - self.b) / np.diag(self.B)


@dataclass(frozen=True)
class FacetGeometry:
    normal_axis: int
    normal: np.ndarray
    measure: float
    origin: np.ndarray
    tangent_axes: tuple
    lengths: tuple

    def __call__(self, s):
        """Map reference facet coordinates (npts, dim-1) onto the facet."""
        s = np.atleast_2d(np.asarray(s, dtype=float))
        x = np.repeat(self.origin[None, :], s.shape[0], axis=0)
        for k, a in enumerate(self.tangent_axes):
            x[:, a] += s[:, k] * self.lengths[k]
        return x


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable structured mesh; see module docstring for numbering."""

    dim: int
    extents: tuple
    divisions: tuple
    vertices: np.ndarray = field(repr=False)
    cells: np.ndarray = field(repr=False)
    facets: np.ndarray = field(repr=False)
    facet_axis: np.ndarray = field(repr=False)
    cell_facets: np.ndarray = field(repr=False)
    facet_cells: np.ndarray = field(repr=False)
    edges: np.ndarray = field(repr=False)
    edge_axis: np.ndarray = field(repr=False)
    cell_edges: np.ndarray = field(repr=False)
    grid: tuple = field(repr=False)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_facets(self):
        return len(self.facets)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def h(self):
        """Largest cell diameter."""
        widths = [np.max(np.diff(g)) for g in self.grid]
        return float(np.sqrt(np.sum(np.square(widths))))

    @property
    def cell_sizes(self):
        """Per-cell edge lengths, shape (n_cells, dim)."""
        lo = self.vertices[self.cells[:, 0]]
        hi = self.vertices[self.cells[:, -1]]
        return hi - lo

    @property
    def cell_origins(self):
        return self.vertices[self.cells[:, 0]].copy()

    def boundary_facets(self):
        return np.flatnonzero((self.facet_cells < 0).any(axis=1))

    def interior_facets(self):
        return np.flatnonzero((self.facet_cells >= 0).all(axis=1))

    def to_json(self):
        """Debug dump: vertices, cells, facets with their normal axes."""
        return json.dumps({
            "dim": self.dim,
            "extents": [list(map(float, e)) for e in self.extents],
            "divisions": list(self.divisions),
            "vertices": self.vertices.tolist(),
            "cells": self.cells.tolist(),
            "facets": self.facets.tolist(),
            "facet_normal_axis": self.facet_axis.tolist(),
            "facet_cells": self.facet_cells.tolist(),
            "edges": self.edges.tolist(),
            "edge_tangent_axis": self.edge_axis.tolist(),
        })


def build_mesh(dim, divisions, extents=None):
    """Uniform tensor grid of ``prod(divisions)`` cells.

    Parameters
    ----------
    dim : {2, 3}
    divisions : int or sequence of int
        Cells per axis.
    extents : sequence of (lo, hi), optional
        Domain interval per axis; defaults to the unit square/cube.
    """
    if dim not in (2, 3):
        raise ValueError("dim must be 2 or 3")
    if np.isscalar(divisions):
        divisions = (int(divisions),) * dim
    divisions = tuple(int(n) for n in divisions)
    if len(divisions) != dim or any(n < 1 for n in divisions):
        raise ValueError(f"need {dim} positive divisions, got {divisions}")
    if extents is None:
        extents = ((0.0, 1.0),) * dim
    extents = tuple((float(lo), float(hi)) for lo, hi in extents)
    if len(extents) != dim or any(not hi > lo for lo, hi in extents):
        raise ValueError(f"need {dim} nondegenerate intervals, got {extents}")

    grid = tuple(np.linspace(lo, hi, n + 1) for (lo, hi), n in zip(extents, divisions))
    npts = tuple(n + 1 for n in divisions)

    def vid(idx):
        return int(np.ravel_multi_index(tuple(idx), npts, order="F"))

    vertices = np.array(
        [[grid[a][idx[a]] for a in range(dim)]
         for idx in (np.unravel_index(k, npts, order="F") for k in range(int(np.prod(npts))))]
    )

    cell_index = [np.unravel_index(k, divisions, order="F") for k in range(int(np.prod(divisions)))]
    corners = list(product((0, 1), repeat=dim))
    corners = sorted(corners, key=lambda c: sum(b << a for a, b in enumerate(c)))
    cells = np.array([[vid([i + c for i, c in zip(ci, cor)]) for cor in corners] for ci in cell_index])

    # facets normal to axis a: low corner idx with idx[a] in 0..n_a, others in 0..n_b-1
    facet_keys = []
    for a in range(dim):
        ranges = [range(npts[b]) if b == a else range(divisions[b]) for b in range(dim)]
        for idx in product(*ranges):
            facet_keys.append((tuple(reversed(idx)), a, idx))
    facet_keys.sort()
    facet_id = {(k[1], k[2]): n for n, k in enumerate(facet_keys)}
    facet_axis = np.array([k[1] for k in facet_keys], dtype=int)
    facets = []
    for _, a, idx in facet_keys:
        others = [b for b in range(dim) if b != a]
        verts = []
        for bits in product((0, 1), repeat=dim - 1):
            v = list(idx)
            for b, s in zip(others, bits):
                v[b] += s
            verts.append(vid(v))
        facets.append(sorted(verts))
    facets = np.array(facets, dtype=int)

    n_cells = len(cells)
    cell_facets = np.zeros((n_cells, 2 * dim), dtype=int)
    facet_cells = -np.ones((len(facets), 2), dtype=int)
    for c, ci in enumerate(cell_index):
        for a in range(dim):
            for side in (0, 1):
                idx = list(ci)
                idx[a] += side
                f = facet_id[(a, tuple(idx))]
                cell_facets[c, 2 * a + side] = f
                # side 1 of the cell is the low side of the facet's normal
                facet_cells[f, 1 - side] = c

    if dim == 3:
        edge_keys = []
        for a in range(3):
            ranges = [range(divisions[b]) if b == a else range(npts[b]) for b in range(3)]
            for idx in product(*ranges):
                edge_keys.append((tuple(reversed(idx)), a, idx))
        edge_keys.sort()
        edge_id = {(k[1], k[2]): n for n, k in enumerate(edge_keys)}
        edge_axis = np.array([k[1] for k in edge_keys], dtype=int)
        edges = []
        for _, a, idx in edge_keys:
            v1 = list(idx)
            v1[a] += 1
            edges.append([vid(idx), vid(v1)])
        edges = np.array(edges, dtype=int)
        cell_edges = np.zeros((n_cells, 12), dtype=int)
        for c, ci in enumerate(cell_index):
            for a in range(3):
                b1, b2 = [b for b in range(3) if b != a]
                for s1, s2 in product((0, 1), repeat=2):
                    idx = list(ci)
                    idx[b1] += s1
                    idx[b2] += s2
                    cell_edges[c, 4 * a + 2 * s1 + s2] = edge_id[(a, tuple(idx))]
    else:
        edges, edge_axis = facets, facet_axis
        cell_edges = cell_facets

    return Mesh(
        dim=dim, extents=extents, divisions=divisions, vertices=vertices, cells=cells,
        facets=facets, facet_axis=facet_axis, cell_facets=cell_facets,
        facet_cells=facet_cells, edges=edges, edge_axis=edge_axis,
        cell_edges=cell_edges, grid=grid,
    )


def cell_affine(mesh, cell):
    """Affine map from the reference cell [0,1]^dim onto ``cell``."""
    if not 0 <= cell < mesh.n_cells:
        raise IndexError(f"cell {cell} out of range [0, {mesh.n_cells})")
    lo = mesh.vertices[mesh.cells[cell, 0]]
    hi = mesh.vertices[mesh.cells[cell, -1]]
    return AffineMap(np.diag(hi - lo), lo.copy())


def facet_geometry(mesh, facet):
    """Normal, measure and parametrization ``[0,1]^(dim-1) -> facet``."""
    if not 0 <= facet < mesh.n_facets:
        raise IndexError(f"facet {facet} out of range [0, {mesh.n_facets})")
    a = int(mesh.facet_axis[facet])
    verts = mesh.vertices[mesh.facets[facet]]
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    tangent = tuple(b for b in range(mesh.dim) if b != a)
    lengths = tuple(float(hi[b] - lo[b]) for b in tangent)
    normal = np.zeros(mesh.dim)
    normal[a] = 1.0
    return FacetGeometry(a, normal, float(np.prod(lengths)), lo, tangent, lengths)
