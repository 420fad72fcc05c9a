"""Sections, global sections and the coboundary operator.

Global sections are computed over *node assignments*: one vector per maximal
cell.  Every other cell gets its value by restriction from above, so a node
assignment is global exactly when all restrictions into a shared cell agree,
i.e. when it lies in the kernel of the coboundary matrix.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InconsistentAssignment,
    MissingCellValue,
    UnknownCell,
    UnsupportedShape,
)
from .numerics import DEFAULT_REL_TOL, TolerancedBasis, nullspace_basis, project_onto
from .sheaf import Sheaf, composite, default_tolerance


@dataclass(frozen=True)
class Section:
    """One vector per cell.  Need not be consistent."""

    values: Mapping[str, np.ndarray]

    def __getitem__(self, cell_id: str) -> np.ndarray:
        return self.values[cell_id]


@dataclass(frozen=True)
class NodeAssignment:
    """One vector per maximal cell."""

    values: Mapping[str, np.ndarray]

    def __getitem__(self, cell_id: str) -> np.ndarray:
        return self.values[cell_id]


@dataclass(frozen=True)
class FlatRelation:
    """A maximal cell restricted all the way down to ``lower``."""

    upper: str
    lower: str
    slot: str
    matrix: np.ndarray


@dataclass(frozen=True)
class CoboundaryOperator:
    matrix: np.ndarray
    column_cells: tuple[str, ...]
    column_slices: Mapping[str, slice]
    row_cells: tuple[str, ...]
    row_slices: Mapping[str, slice]
    orientation: Mapping[str, tuple[FlatRelation, ...]]


@dataclass(frozen=True)
class SectionViolation:
    upper: str
    lower: str
    slot: str
    residual: np.ndarray
    norm: float


@dataclass(frozen=True)
class ConsistencyReport:
    violations: tuple[SectionViolation, ...] = ()

    @property
    def consistent(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.consistent


@dataclass(frozen=True)
class GlobalSectionBasis:
    basis: TolerancedBasis
    column_cells: tuple[str, ...]
    sections: tuple[Section, ...]

    @property
    def dim(self) -> int:
        return self.basis.dim


def _values(obj) -> Mapping:
    return obj.values if isinstance(obj, (Section, NodeAssignment)) else obj


def _checked_values(sheaf: Sheaf, obj, cells: tuple[str, ...], what: str) -> dict[str, np.ndarray]:
    raw = _values(obj)
    wanted = set(cells)
    for key in raw:
        if key not in wanted:
            raise UnknownCell(f"{what} has a value for {key!r}, which is not one of its cells")
    out = {}
    for cid in cells:
        if cid not in raw:
            raise MissingCellValue(f"{what} has no value for cell {cid!r}")
        vec = np.asarray(raw[cid], dtype=float)
        if vec.shape != (sheaf.dim(cid),):
            raise DimensionMismatch(
                f"{what} value at {cid!r} has shape {vec.shape}, stalk is R^{sheaf.dim(cid)}"
            )
        out[cid] = vec
    return out


def flat_relations(sheaf: Sheaf, cell_id: str) -> tuple[FlatRelation, ...]:
    """Restrictions into ``cell_id`` from each maximal cell above it.

    A maximal cell that covers ``cell_id`` directly contributes one entry per
    covering relation (two for a self-loop); otherwise it contributes the
    composite along its first chain.  Ordered by ``(upper, slot)``.
    """
    cx = sheaf.complex
    out = []
    for top in cx.maximal_ancestors(cell_id):
        if top == cell_id:
            continue
        direct = [r for r in cx.relations_above(cell_id) if r.upper == top]
        if direct:
            out.extend(FlatRelation(top, cell_id, r.slot, sheaf.maps[r]) for r in direct)
        else:
            out.append(FlatRelation(top, cell_id, "", composite(sheaf, top, cell_id)))
    out.sort(key=lambda f: (f.upper, f.slot))
    return tuple(out)


def _constraint(sheaf: Sheaf, cell_id: str) -> tuple[FlatRelation, ...]:
    # The relations whose images must agree at cell_id; empty if none.
    flat = flat_relations(sheaf, cell_id)
    if len(flat) > 2:
        raise UnsupportedShape(
            f"cell {cell_id!r} lies below {len(flat)} restrictions from maximal cells; at most 2 are supported"
        )
    if len(flat) == 2:
        return flat
    if len(flat) == 1:
        cx = sheaf.complex
        # A dangling edge: a minimal cell hanging off a single maximal cell.
        # Its image is pinned to zero.
        if cell_id in cx.minimal_cells and len(cx.relations_above(cell_id)) == 1 \
                and cx.relations_above(cell_id)[0].upper == flat[0].upper:
            return flat
    return ()


def assemble_coboundary(sheaf: Sheaf) -> CoboundaryOperator:
    """Block matrix whose kernel is the space of global node assignments.

    The row block of a constrained cell holds ``+M`` for the first restriction
    into it and ``-M`` for the second, ordered by ``(upper id, slot)``.
    """
    cx = sheaf.complex
    columns = cx.maximal_cells
    col_slices, offset = {}, 0
    for cid in columns:
        col_slices[cid] = slice(offset, offset + sheaf.dim(cid))
        offset += sheaf.dim(cid)
    n_cols = offset

    orientation = {}
    row_slices, offset = {}, 0
    for cid in cx.cell_ids:
        if cid in col_slices:
            continue
        pair = _constraint(sheaf, cid)
        if pair:
            orientation[cid] = pair
            row_slices[cid] = slice(offset, offset + sheaf.dim(cid))
            offset += sheaf.dim(cid)

    delta = np.zeros((offset, n_cols))
    for cid, pair in orientation.items():
        rows = row_slices[cid]
        for sign, rel in zip((1.0, -1.0), pair):
            delta[rows, col_slices[rel.upper]] += sign * rel.matrix
    return CoboundaryOperator(delta, columns, col_slices, tuple(orientation), row_slices, orientation)


def stack(cob: CoboundaryOperator, values: Mapping[str, np.ndarray]) -> np.ndarray:
    parts = [np.asarray(values[c], dtype=float) for c in cob.column_cells]
    return np.concatenate(parts) if parts else np.zeros(0)


def unstack(cob: CoboundaryOperator, vec: np.ndarray) -> dict[str, np.ndarray]:
    return {c: vec[cob.column_slices[c]].copy() for c in cob.column_cells}


def is_section_consistent(sheaf: Sheaf, s, tol: float = 0.0) -> ConsistencyReport:
    """Check every covering relation ``(u, l)`` against ``s``.

    A relation fails when ``max|M s[u] - s[l]| > tol``; the report lists
    failures in ``(upper, lower, slot)`` order.
    """
    cx = sheaf.complex
    values = _checked_values(sheaf, s, cx.cell_ids, "section")
    violations = []
    for rel in cx.relations:
        residual = sheaf.maps[rel] @ values[rel.upper] - values[rel.lower]
        norm = float(np.abs(residual).max()) if residual.size else 0.0
        if norm > tol:
            violations.append(SectionViolation(rel.upper, rel.lower, rel.slot, residual, norm))
    return ConsistencyReport(tuple(violations))


def _extend(sheaf: Sheaf, values: Mapping[str, np.ndarray], tol: float | None) -> Section:
    cx = sheaf.complex
    full = dict(values)
    for cid in cx.cell_ids:
        if cid in full:
            continue
        flat = flat_relations(sheaf, cid)
        first = flat[0]
        full[cid] = first.matrix @ values[first.upper]
        if tol is None:
            continue
        pair = _constraint(sheaf, cid)
        if len(pair) == 2:
            residual = pair[0].matrix @ values[pair[0].upper] - pair[1].matrix @ values[pair[1].upper]
        elif pair:
            residual = full[cid]
        else:
            continue
        norm = float(np.linalg.norm(residual))
        if norm > tol:
            raise InconsistentAssignment(cid, norm)
    return Section(full)


def extend_to_section(sheaf: Sheaf, a, tol: float | None = None) -> Section:
    """Push a node assignment down to every cell.

    Each constrained cell's residual (Euclidean norm of the difference of the
    two images, or of the single image for a dangling edge) must be at most
    ``tol``; otherwise :class:`InconsistentAssignment` names the first
    offending cell.  ``tol`` defaults to :func:`default_tolerance`.
    """
    if tol is None:
        tol = default_tolerance(sheaf)
    values = _checked_values(sheaf, a, sheaf.complex.maximal_cells, "assignment")
    return _extend(sheaf, values, tol)


def global_sections(sheaf: Sheaf, rel_tol: float = DEFAULT_REL_TOL) -> GlobalSectionBasis:
    cob = assemble_coboundary(sheaf)
    basis = nullspace_basis(cob.matrix, rel_tol)
    sections = tuple(_extend(sheaf, unstack(cob, basis.columns[:, j]), None) for j in range(basis.dim))
    return GlobalSectionBasis(basis, cob.column_cells, sections)


def consistency_radius(sheaf: Sheaf, a) -> float:
    """Euclidean norm of the coboundary applied to the stacked assignment."""
    cob = assemble_coboundary(sheaf)
    values = _checked_values(sheaf, a, cob.column_cells, "assignment")
    return float(np.linalg.norm(cob.matrix @ stack(cob, values)))


def nearest_global_section(sheaf: Sheaf, a, rel_tol: float = DEFAULT_REL_TOL) -> NodeAssignment:
    """Orthogonal projection of ``a`` onto the global node assignments."""
    cob = assemble_coboundary(sheaf)
    values = _checked_values(sheaf, a, cob.column_cells, "assignment")
    basis = nullspace_basis(cob.matrix, rel_tol)
    return NodeAssignment(unstack(cob, project_onto(basis, stack(cob, values))))


def sheaf_laplacian(sheaf: Sheaf) -> np.ndarray:
    delta = assemble_coboundary(sheaf).matrix
    lap = delta.T @ delta
    return 0.5 * (lap + lap.T)
