"""Cellular sheaves of real vector spaces on a :class:`~sheaflab.poset.Complex`.

A sheaf attaches a stalk ``R^dim`` to every cell and a restriction matrix of
shape ``(dim(lower), dim(upper))`` to every covering relation.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import (
    DimensionMismatch,
    IncomparableCells,
    MissingMap,
    MissingStalk,
    NonFiniteEntry,
    ShapeMismatch,
    UnknownCell,
    UnknownRelation,
)
from .poset import Complex, CoveringRelation, chains_between

MISSING_STALK = "MissingStalk"
MISSING_MAP = "MissingMap"
SHAPE_MISMATCH = "ShapeMismatch"
COMMUTATIVITY_FAILURE = "CommutativityFailure"

_STRUCTURAL_ERRORS = {
    MISSING_STALK: MissingStalk,
    MISSING_MAP: MissingMap,
    SHAPE_MISMATCH: ShapeMismatch,
}


@dataclass(frozen=True)
class Violation:
    """One failed check.

    ``location`` is ``(cell,)`` for stalk problems, ``(upper, lower, slot)``
    for map problems and a pair of chains for commutativity failures.
    """

    kind: str
    location: tuple
    magnitude: float | None = None

    def describe(self) -> str:
        if self.kind == COMMUTATIVITY_FAILURE:
            a, b = self.location
            return f"{self.kind} {'>'.join(a)} vs {'>'.join(b)} magnitude={self.magnitude:.12g}"
        if self.kind == MISSING_STALK:
            return f"{self.kind} {self.location[0]}"
        return f"{self.kind} {CoveringRelation(*self.location)}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class Sheaf:
    complex: Complex
    stalks: Mapping[str, int]
    maps: Mapping[CoveringRelation, np.ndarray]
    _by_pair: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_pair: dict[tuple[str, str], CoveringRelation] = {}
        for rel in sorted(self.maps, key=lambda r: r.key):
            by_pair.setdefault((rel.upper, rel.lower), rel)
        object.__setattr__(self, "_by_pair", by_pair)

    def dim(self, cell_id: str) -> int:
        try:
            return self.stalks[cell_id]
        except KeyError:
            if cell_id in self.complex:
                raise MissingStalk(f"cell {cell_id!r} has no stalk") from None
            raise UnknownCell(f"unknown cell {cell_id!r}") from None

    def map(self, upper: str, lower: str, slot: str | None = None) -> np.ndarray:
        """Restriction matrix of one covering relation.

        Without ``slot`` the lexicographically first slot is used, which only
        matters for self-loops.
        """
        if slot is None:
            rel = self._by_pair.get((upper, lower))
        else:
            rel = CoveringRelation(upper, lower, slot)
        if rel is None or rel not in self.maps:
            raise MissingMap(f"no restriction map for ({upper},{lower})")
        return self.maps[rel]

    @property
    def max_abs_entry(self) -> float:
        return max((float(np.abs(m).max()) for m in self.maps.values() if m.size), default=0.0)


def default_tolerance(sheaf: Sheaf) -> float:
    """Commutativity tolerance scaled by the largest matrix entry."""
    return 1e-9 * max(1.0, sheaf.max_abs_entry)


def _as_relation(key) -> CoveringRelation:
    if isinstance(key, CoveringRelation):
        return key
    return CoveringRelation(*key)


def _as_matrix(rel: CoveringRelation, value) -> np.ndarray:
    mat = np.array(value, dtype=float)
    if mat.ndim != 2:
        raise ShapeMismatch(f"restriction map {rel} must be a 2-d matrix, got {mat.ndim}-d")
    if not np.all(np.isfinite(mat)):
        raise NonFiniteEntry(f"restriction map {rel} has non-finite entries")
    mat.setflags(write=False)
    return mat


def structural_violations(complex: Complex, stalks: Mapping[str, int],
                          maps: Mapping[CoveringRelation, np.ndarray]) -> list[Violation]:
    out = []
    for cid in complex.cell_ids:
        if cid not in stalks:
            out.append(Violation(MISSING_STALK, (cid,)))
    for rel in complex.relations:
        mat = maps.get(rel)
        if mat is None:
            out.append(Violation(MISSING_MAP, rel.key))
        elif rel.upper in stalks and rel.lower in stalks:
            if mat.shape != (stalks[rel.lower], stalks[rel.upper]):
                out.append(Violation(SHAPE_MISMATCH, rel.key))
    return out


def build_sheaf(complex: Complex, stalks: Mapping[str, int], maps: Mapping, *,
                check: bool = True) -> Sheaf:
    """Assemble a sheaf from stalk dimensions and restriction matrices.

    ``maps`` may be keyed by :class:`CoveringRelation` or by ``(upper, lower)``
    / ``(upper, lower, slot)`` tuples.  Coverage and shapes are checked here;
    commutativity is left to :func:`validate` so a broken sheaf can still be
    loaded and inspected.  ``check=False`` skips the coverage and shape checks
    as well, for diagnostic use.
    """
    dims: dict[str, int] = {}
    for cid, dim in stalks.items():
        if cid not in complex:
            raise UnknownCell(f"stalk given for unknown cell {cid!r}")
        dim = int(dim)
        if dim < 0:
            raise ShapeMismatch(f"stalk of {cid!r} has negative dimension {dim}")
        dims[cid] = dim

    known = {r.key for r in complex.relations}
    mats: dict[CoveringRelation, np.ndarray] = {}
    for key, value in maps.items():
        rel = _as_relation(key)
        if rel.key not in known:
            for end in (rel.upper, rel.lower):
                if end not in complex:
                    raise UnknownCell(f"restriction map {rel} refers to unknown cell {end!r}")
            raise UnknownRelation(f"restriction map given for {rel}, which is not a covering relation")
        mats[rel] = _as_matrix(rel, value)

    if check:
        problems = structural_violations(complex, dims, mats)
        if problems:
            first = problems[0]
            raise _STRUCTURAL_ERRORS[first.kind](first.describe())
    return Sheaf(complex, dims, mats)


def _chain_matrix(sheaf: Sheaf, chain: list[str]) -> np.ndarray:
    out = np.eye(sheaf.dim(chain[0]))
    for upper, lower in zip(chain, chain[1:]):
        out = sheaf.map(upper, lower) @ out
    return out


def composite(sheaf: Sheaf, upper: str, lower: str) -> np.ndarray:
    """Composite restriction from ``upper`` down to ``lower``.

    Follows the lexicographically first chain; :func:`validate` is what
    guarantees the choice does not matter.
    """
    chains = chains_between(sheaf.complex, upper, lower)
    if not chains:
        raise IncomparableCells(f"{lower!r} is not below {upper!r}")
    return _chain_matrix(sheaf, chains[0])


def restrict(sheaf: Sheaf, upper: str, lower: str, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (sheaf.dim(upper),):
        raise DimensionMismatch(
            f"vector of shape {x.shape} does not fit the stalk R^{sheaf.dim(upper)} of {upper!r}"
        )
    return composite(sheaf, upper, lower) @ x


def validate(sheaf: Sheaf, tol: float | None = None) -> ValidationReport:
    """Check coverage, shapes and path-independence of composite maps.

    For every pair of cells joined by two or more chains, the composites along
    each pair of chains must agree entrywise within ``tol``.  Two-level posets
    have no such pairs and pass vacuously.
    """
    if tol is None:
        tol = default_tolerance(sheaf)
    cx = sheaf.complex
    violations = structural_violations(cx, sheaf.stalks, sheaf.maps)
    if violations:
        # composites are meaningless until the structure is sound
        return ValidationReport(tuple(violations))

    for upper in cx.cell_ids:
        for lower in cx.cell_ids:
            if lower == upper or not cx.leq(lower, upper):
                continue
            chains = chains_between(cx, upper, lower)
            if len(chains) < 2:
                continue
            mats = [_chain_matrix(sheaf, ch) for ch in chains]
            for (i, a), (j, b) in combinations(enumerate(mats), 2):
                dev = float(np.abs(a - b).max()) if a.size else 0.0
                if dev > tol:
                    violations.append(Violation(
                        COMMUTATIVITY_FAILURE, (tuple(chains[i]), tuple(chains[j])), dev))
    return ValidationReport(tuple(violations))
