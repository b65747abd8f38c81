"""Global finite element spaces: a reference element replicated over a mesh."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elements import ReferenceElement, nodal_basis

__all__ = ["FESpace", "build_space", "ENTITY_DIM"]

ENTITY_DIM = {"vertex": 0, "edge": 1, "face": 2}
_KIND_ORDER = {"vertex": 0, "edge": 1, "face": 2, "interior": 3}


@dataclass(frozen=True, eq=False)
class FESpace:
    mesh: object
    element: ReferenceElement
    n_dofs: int
    cell_dofs: np.ndarray = field(repr=False)
    dof_keys: tuple = field(repr=False)

    @property
    def name(self):
        return self.element.name


def _global_entity(mesh, kind, local, cell):
    if kind == "vertex":
        return int(mesh.cells[cell, local])
    if kind == "edge":
        return int(mesh.cell_edges[cell, local])
    if kind == "face":
        return int(mesh.cell_facets[cell, local])
    return cell


def build_space(mesh, element):
    """Number the DOFs of ``element`` over ``mesh``.

    DOFs attached to vertices, edges or faces are shared by every cell
    containing that entity (the k-th DOF on an entity is the same
    functional from both sides because normals, tangents and entity
    parametrizations are global). Interior DOFs are cell-local. Global
    numbers are sorted by (entity kind, global entity id, position).
    """
    if element.dim != mesh.dim:
        raise ValueError(f"{element.name} is {element.dim}D but the mesh is {mesh.dim}D")
    if element.coefficients is None:
        element = nodal_basis(element)
    local_keys = []
    for cell in range(mesh.n_cells):
        seen = {}
        row = []
        for d in element.dofs:
            ent = d.entity
            slot = (ent.kind, ent.index)
            k = seen.get(slot, 0)
            seen[slot] = k + 1
            gid = _global_entity(mesh, ent.kind, ent.index, cell)
            row.append((_KIND_ORDER[ent.kind], gid, k))
        local_keys.append(row)
    keys = sorted({key for row in local_keys for key in row})
    number = {key: n for n, key in enumerate(keys)}
    cell_dofs = np.array([[number[key] for key in row] for row in local_keys], dtype=np.int64)
    return FESpace(mesh, element, len(keys), cell_dofs, tuple(keys))
