"""Sampled sheaf of functions over a finite open cover of an interval.

Each open interval of the cover becomes a rank-1 cell whose stalk holds a
function's values at the grid points strictly inside it.  Each nonempty
pairwise intersection becomes a rank-0 cell, and restriction just selects
the shared samples.  Local data that agree on every overlap glue to one
sampled function on the covered part of the grid.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGrid, EmptyCover, GlueConflict, InvalidCover
from .poset import EDGE_RANK, NODE_RANK, Cell, CoveringRelation, build_complex
from .sections import NodeAssignment, _checked_values
from .sheaf import Sheaf, build_sheaf

_DIVIDE_TOL = 1e-12


@dataclass(frozen=True)
class GridCover:
    domain: tuple[float, float]
    step: float
    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        a, b = (float(v) for v in self.domain)
        object.__setattr__(self, "domain", (a, b))
        object.__setattr__(self, "step", float(self.step))
        object.__setattr__(self, "intervals", tuple((float(l), float(r)) for l, r in self.intervals))
        if not a < b:
            raise DegenerateGrid(f"domain [{a}, {b}] is empty")
        if not self.step > 0:
            raise DegenerateGrid(f"grid step must be positive, got {self.step}")
        n = (b - a) / self.step
        if abs(n - round(n)) > _DIVIDE_TOL * max(1.0, n):
            raise DegenerateGrid(f"step {self.step} does not divide [{a}, {b}] evenly")
        if not self.intervals:
            raise EmptyCover("cover has no intervals")
        eps = self.eps
        for l, r in self.intervals:
            if not l < r:
                raise InvalidCover(f"interval ({l}, {r}) is empty")
            if l < a - eps or r > b + eps:
                raise InvalidCover(f"interval ({l}, {r}) leaves the domain [{a}, {b}]")
        if len(set(self.intervals)) != len(self.intervals):
            raise InvalidCover("cover lists the same interval twice")
        for k, x in enumerate(self.points):
            if not any(l - eps <= x <= r + eps for l, r in self.intervals):
                raise InvalidCover(f"grid point {x:.12g} is not in the closure of any interval")

    @property
    def eps(self) -> float:
        return _DIVIDE_TOL * (self.domain[1] - self.domain[0])

    @property
    def n_points(self) -> int:
        a, b = self.domain
        return int(round((b - a) / self.step)) + 1

    @property
    def points(self) -> np.ndarray:
        return self.domain[0] + self.step * np.arange(self.n_points)

    def samples_in(self, lo: float, hi: float) -> tuple[int, ...]:
        """Grid indices strictly inside the open interval ``(lo, hi)``."""
        eps = self.eps
        return tuple(k for k, x in enumerate(self.points) if lo + eps < x < hi - eps)


@dataclass(frozen=True)
class IntervalSheaf(Sheaf):
    """A :class:`Sheaf` that remembers its cover and sample index sets."""

    cover: GridCover
    samples: Mapping[str, tuple[int, ...]]

    @property
    def interval_cells(self) -> tuple[str, ...]:
        return self.complex.maximal_cells


@dataclass(frozen=True)
class GluedSamples:
    grid_indices: tuple[int, ...]
    points: np.ndarray
    values: np.ndarray


def interval_cell_ids(count: int) -> list[str]:
    width = len(str(max(count - 1, 0)))
    return [f"U{i:0{width}d}" for i in range(count)]


def _selector(sub: Sequence[int], full: Sequence[int]) -> np.ndarray:
    pos = {k: i for i, k in enumerate(full)}
    sel = np.zeros((len(sub), len(full)))
    for row, k in enumerate(sub):
        sel[row, pos[k]] = 1.0
    return sel


def build_interval_sheaf(cover: GridCover) -> IntervalSheaf:
    ids = interval_cell_ids(len(cover.intervals))
    cells, relations, samples = [], [], {}
    for cid, (l, r) in zip(ids, cover.intervals):
        idx = cover.samples_in(l, r)
        if not idx:
            raise DegenerateGrid(f"interval ({l:.12g}, {r:.12g}) contains no grid points")
        cells.append(Cell(cid, NODE_RANK))
        samples[cid] = idx

    for i, (li, ri) in enumerate(cover.intervals):
        for j in range(i + 1, len(cover.intervals)):
            lj, rj = cover.intervals[j]
            lo, hi = max(li, lj), min(ri, rj)
            if not lo < hi:
                continue
            cid = f"{ids[i]}&{ids[j]}"
            cells.append(Cell(cid, EDGE_RANK))
            samples[cid] = tuple(sorted(set(samples[ids[i]]) & set(samples[ids[j]])))
            relations += [CoveringRelation(ids[i], cid), CoveringRelation(ids[j], cid)]

    cx = build_complex(cells, relations)
    maps = {rel: _selector(samples[rel.lower], samples[rel.upper]) for rel in relations}
    base = build_sheaf(cx, {c: len(s) for c, s in samples.items()}, maps)
    return IntervalSheaf(base.complex, base.stalks, base.maps, cover, samples)


def sample_function(sheaf: IntervalSheaf, f: Callable[[np.ndarray], np.ndarray]) -> NodeAssignment:
    """Local data obtained by sampling ``f`` on each interval."""
    points = sheaf.cover.points
    return NodeAssignment({
        cid: np.asarray(f(points[list(sheaf.samples[cid])]), dtype=float)
        for cid in sheaf.interval_cells
    })


def localize(sheaf: IntervalSheaf, glued: GluedSamples) -> NodeAssignment:
    """Restrict a glued function back to each interval."""
    lookup = dict(zip(glued.grid_indices, glued.values))
    return NodeAssignment({
        cid: np.array([lookup[k] for k in sheaf.samples[cid]], dtype=float)
        for cid in sheaf.interval_cells
    })


def glue(sheaf: IntervalSheaf, locals_, tol: float = 0.0) -> GluedSamples:
    """Glue local samples into one vector over the covered grid points.

    At every grid point the local values must span at most ``tol``;
    otherwise :class:`GlueConflict` reports the first conflicting point.
    The glued value is taken from the first interval containing the point.
    """
    cells = sheaf.interval_cells
    values = _checked_values(sheaf, locals_, cells, "local data")
    at: dict[int, list[float]] = {}
    for cid in cells:
        for k, v in zip(sheaf.samples[cid], values[cid]):
            at.setdefault(k, []).append(float(v))

    indices = tuple(sorted(at))
    points = sheaf.cover.points
    out = []
    for k in indices:
        vals = at[k]
        spread = max(vals) - min(vals)
        if spread > tol:
            raise GlueConflict(k, float(points[k]), tuple(vals), spread)
        out.append(vals[0])
    return GluedSamples(indices, points[list(indices)], np.array(out, dtype=float))
