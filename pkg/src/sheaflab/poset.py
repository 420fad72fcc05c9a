"""Finite posets of cells.

A :class:`Complex` stores cells with explicit ranks and the covering
relations between them.  Graphs are two-level posets: nodes sit at rank 1,
edges at rank 0, and an edge lies *below* each of its endpoints.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from graphlib import CycleError, TopologicalSorter

from .errors import (
    CycleDetected,
    DanglingRelation,
    DuplicateEdgeId,
    DuplicateId,
    DuplicateRelation,
    RankViolation,
    UnknownCell,
    UnknownEndpoint,
)

NODE_RANK = 1
EDGE_RANK = 0

LOOP_SLOTS = ("0", "1")


@dataclass(frozen=True, order=True)
class Cell:
    id: str
    rank: int


@dataclass(frozen=True, order=True)
class CoveringRelation:
    """``upper`` covers ``lower``.

    ``slot`` is empty for ordinary relations.  The two incidences of a
    self-loop share ``upper`` and ``lower`` and are told apart by the slots
    ``"0"`` and ``"1"``.
    """

    upper: str
    lower: str
    slot: str = ""

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.upper, self.lower, self.slot)

    def __str__(self) -> str:
        tag = f"#{self.slot}" if self.slot else ""
        return f"({self.upper},{self.lower}{tag})"


@dataclass(frozen=True)
class Complex:
    """A validated finite poset given by its covering relations.

    Cells are kept sorted by id and relations by ``(upper, lower, slot)`` so
    every matrix assembled downstream has a reproducible layout.
    """

    cells: tuple[Cell, ...] = ()
    relations: tuple[CoveringRelation, ...] = ()
    _ranks: dict = field(init=False, repr=False, compare=False)
    _down: dict = field(init=False, repr=False, compare=False)
    _up: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cells = tuple(sorted(self.cells, key=lambda c: c.id))
        relations = tuple(sorted(self.relations, key=lambda r: r.key))
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "relations", relations)

        ranks: dict[str, int] = {}
        for cell in cells:
            if not isinstance(cell.rank, int) or cell.rank < 0:
                raise RankViolation(f"cell {cell.id!r} has invalid rank {cell.rank!r}")
            if cell.id in ranks:
                raise DuplicateId(f"duplicate cell id {cell.id!r}")
            ranks[cell.id] = cell.rank

        down: dict[str, list[CoveringRelation]] = {c.id: [] for c in cells}
        up: dict[str, list[CoveringRelation]] = {c.id: [] for c in cells}
        seen = set()
        for rel in relations:
            for end in (rel.upper, rel.lower):
                if end not in ranks:
                    raise DanglingRelation(f"relation {rel} refers to unknown cell {end!r}")
            if rel.key in seen:
                raise DuplicateRelation(f"duplicate relation {rel}")
            seen.add(rel.key)
            down[rel.upper].append(rel)
            up[rel.lower].append(rel)

        # Cycles are reported before rank problems: a 2-cycle always breaks
        # the rank rule too, and the cycle is the more useful diagnosis.
        sorter = TopologicalSorter({cid: {r.upper for r in up[cid]} for cid in ranks})
        try:
            order = tuple(sorter.static_order())
        except CycleError as exc:
            raise CycleDetected(f"covering relations contain a cycle through {exc.args[1]}") from None

        for rel in relations:
            if ranks[rel.upper] <= ranks[rel.lower]:
                raise RankViolation(
                    f"relation {rel}: rank {ranks[rel.upper]} of upper cell is not above "
                    f"rank {ranks[rel.lower]} of lower cell"
                )

        object.__setattr__(self, "_ranks", ranks)
        object.__setattr__(self, "_down", {k: tuple(v) for k, v in down.items()})
        object.__setattr__(self, "_up", {k: tuple(v) for k, v in up.items()})
        object.__setattr__(self, "_order", order)

    def __len__(self) -> int:
        return len(self.cells)

    def __contains__(self, cell_id: object) -> bool:
        return cell_id in self._ranks

    @property
    def cell_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.cells)

    def rank(self, cell_id: str) -> int:
        self._require(cell_id)
        return self._ranks[cell_id]

    def relations_below(self, cell_id: str) -> tuple[CoveringRelation, ...]:
        """Relations whose upper end is ``cell_id``."""
        self._require(cell_id)
        return self._down[cell_id]

    def relations_above(self, cell_id: str) -> tuple[CoveringRelation, ...]:
        """Relations whose lower end is ``cell_id``."""
        self._require(cell_id)
        return self._up[cell_id]

    def topological_order(self) -> tuple[str, ...]:
        """Cell ids ordered so every upper cell precedes the cells it covers."""
        return self._order

    @cached_property
    def maximal_cells(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.cells if not self._up[c.id])

    @cached_property
    def minimal_cells(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.cells if not self._down[c.id])

    @cached_property
    def _descendants(self) -> dict[str, frozenset[str]]:
        desc: dict[str, frozenset[str]] = {}
        for cid in reversed(self._order):
            acc = {cid}
            for rel in self._down[cid]:
                acc |= desc[rel.lower]
            desc[cid] = frozenset(acc)
        return desc

    def leq(self, lower: str, upper: str) -> bool:
        """True when ``lower`` is below or equal to ``upper`` in the order."""
        self._require(lower)
        self._require(upper)
        return lower in self._descendants[upper]

    def maximal_ancestors(self, cell_id: str) -> tuple[str, ...]:
        self._require(cell_id)
        return tuple(m for m in self.maximal_cells if cell_id in self._descendants[m])

    def _require(self, cell_id: str) -> None:
        if cell_id not in self._ranks:
            raise UnknownCell(f"unknown cell {cell_id!r}")


def build_complex(cells: Iterable[Cell], relations: Iterable[CoveringRelation]) -> Complex:
    """Validate cells and covering relations and return a :class:`Complex`.

    Raises DuplicateId, DanglingRelation, CycleDetected or RankViolation.
    """
    return Complex(tuple(cells), tuple(relations))


def from_graph(nodes: Sequence[str], edges: Sequence[tuple[str, str, str]]) -> Complex:
    """Encode an undirected multigraph as a two-level poset.

    ``edges`` holds ``(edge_id, endpoint, endpoint)`` triples.  Parallel
    edges are fine as long as their ids differ; a self-loop yields two
    relations tagged with the slots ``"0"`` and ``"1"``.
    """
    node_set = set(nodes)
    cells = [Cell(n, NODE_RANK) for n in nodes]
    relations = []
    edge_ids: set[str] = set()
    for edge_id, a, b in edges:
        if edge_id in edge_ids:
            raise DuplicateEdgeId(f"duplicate edge id {edge_id!r}")
        if edge_id in node_set:
            raise DuplicateId(f"edge id {edge_id!r} is already a node id")
        edge_ids.add(edge_id)
        for end in (a, b):
            if end not in node_set:
                raise UnknownEndpoint(f"edge {edge_id!r} has unknown endpoint {end!r}")
        cells.append(Cell(edge_id, EDGE_RANK))
        if a == b:
            relations.extend(CoveringRelation(a, edge_id, s) for s in LOOP_SLOTS)
        else:
            relations.append(CoveringRelation(a, edge_id))
            relations.append(CoveringRelation(b, edge_id))
    return build_complex(cells, relations)


def chains_between(complex: Complex, upper: str, lower: str) -> list[list[str]]:
    """Every descending chain of covering steps from ``upper`` to ``lower``.

    Chains are lists of cell ids in lexicographic order.  Parallel relations
    (the two slots of a self-loop) give the same id sequence and are reported
    once.  Returns ``[]`` when ``lower`` is not below ``upper``.
    """
    complex._require(upper)
    complex._require(lower)
    if not complex.leq(lower, upper):
        return []

    chains: list[list[str]] = []

    def walk(path: list[str]) -> None:
        head = path[-1]
        if head == lower:
            chains.append(list(path))
            return
        for nxt in sorted({r.lower for r in complex.relations_below(head)}):
            if complex.leq(lower, nxt):
                path.append(nxt)
                walk(path)
                path.pop()

    walk([upper])
    return sorted(chains)
