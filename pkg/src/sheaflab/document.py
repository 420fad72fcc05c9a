"""The sheaf document format: a JSON file describing a sheaf.

See ``docs/format.md`` for the grammar.  Parsing is strict by default:
unknown fields are errors unless ``strict=False``.  Serialization is
deterministic (sorted ids, fixed key order, numbers to 12 significant
digits), so a document can be diffed and round-tripped.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from decimal import Decimal

import numpy as np

from .errors import (
    BadMatrixShape,
    DocumentError,
    DocumentSyntaxError,
    MissingField,
    UnknownField,
)
from .interval import GridCover, build_interval_sheaf
from .poset import Cell, Complex, CoveringRelation, build_complex
from .sections import NodeAssignment, Section
from .sheaf import Sheaf, build_sheaf

FORMAT_VERSION = 1

SECTION_KIND = "section"
ASSIGNMENT_KIND = "assignment"


@dataclass(frozen=True)
class SheafDocument:
    format_version: int = FORMAT_VERSION
    cells: tuple[Cell, ...] = ()
    relations: tuple[CoveringRelation, ...] = ()
    stalks: Mapping[str, int] = field(default_factory=dict)
    maps: Mapping[CoveringRelation, np.ndarray] = field(default_factory=dict)
    sections: Mapping[str, Section | NodeAssignment] = field(default_factory=dict)
    interval: GridCover | None = None

    def complex(self) -> Complex:
        return build_complex(self.cells, self.relations)

    def sheaf(self, check: bool = True) -> Sheaf:
        """The sheaf this document describes.

        A document with an interval stanza and no cells describes the
        sampled interval sheaf of that cover.
        """
        if not self.cells and self.interval is not None:
            return build_interval_sheaf(self.interval)
        return build_sheaf(self.complex(), self.stalks, self.maps, check=check)


def to_document(sheaf: Sheaf, sections: Mapping | None = None,
                interval: GridCover | None = None) -> SheafDocument:
    return SheafDocument(
        FORMAT_VERSION,
        sheaf.complex.cells,
        sheaf.complex.relations,
        dict(sheaf.stalks),
        dict(sheaf.maps),
        dict(sections or {}),
        interval,
    )


# parsing

def _reject_constant(name: str):
    raise ValueError(f"{name} is not a number")


def _no_duplicates(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise ValueError(f"duplicate key {key!r}")
        out[key] = value
    return out


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


class _Reader:
    def __init__(self, strict: bool):
        self.strict = strict

    def obj(self, value, path: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
        if not isinstance(value, dict):
            raise DocumentError(f"expected an object, got {_kind(value)}", path)
        for key in required:
            if key not in value:
                raise MissingField(f"missing field {key!r}", path or "<document>")
        if self.strict:
            allowed = set(required) | set(optional)
            for key in value:
                if key not in allowed:
                    raise UnknownField(f"unknown field {key!r}", _join(path, key))
        return value

    @staticmethod
    def array(value, path: str) -> list:
        if not isinstance(value, list):
            raise DocumentError(f"expected an array, got {_kind(value)}", path)
        return value

    @staticmethod
    def string(value, path: str) -> str:
        if not isinstance(value, str):
            raise DocumentError(f"expected a string, got {_kind(value)}", path)
        return value

    @staticmethod
    def integer(value, path: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise DocumentError(f"expected an integer, got {_kind(value)}", path)
        return value

    @staticmethod
    def number(value, path: str) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, Decimal)):
            raise DocumentError(f"expected a number, got {_kind(value)}", path)
        return float(value)

    def vector(self, value, path: str) -> np.ndarray:
        items = self.array(value, path)
        return np.array([self.number(v, f"{path}[{i}]") for i, v in enumerate(items)], dtype=float)


def _kind(value) -> str:
    if isinstance(value, bool):
        return "a boolean"
    if value is None:
        return "null"
    if isinstance(value, (int, Decimal)):
        return "a number"
    return {str: "a string", list: "an array", dict: "an object"}.get(type(value), type(value).__name__)


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _relation(r: _Reader, entry, path: str, extra: tuple[str, ...] = ()) -> tuple[CoveringRelation, dict]:
    entry = r.obj(entry, path, ("upper", "lower") + extra, ("slot",))
    rel = CoveringRelation(
        r.string(entry["upper"], f"{path}.upper"),
        r.string(entry["lower"], f"{path}.lower"),
        r.string(entry.get("slot", ""), f"{path}.slot"),
    )
    return rel, entry


def _matrix(r: _Reader, value, path: str, rel: CoveringRelation, stalks: Mapping[str, int]) -> np.ndarray:
    rows = r.array(value, path)
    data = [r.vector(row, f"{path}[{i}]") for i, row in enumerate(rows)]
    widths = {len(row) for row in data}
    if len(widths) > 1:
        raise BadMatrixShape(f"rows of the matrix for {rel} have different lengths {sorted(widths)}", path)
    n_rows = len(data)
    n_cols = widths.pop() if widths else stalks.get(rel.upper, 0)
    if rel.upper in stalks and n_cols != stalks[rel.upper]:
        raise BadMatrixShape(
            f"matrix for {rel} has {n_cols} columns, stalk of {rel.upper!r} has dimension {stalks[rel.upper]}",
            path)
    if rel.lower in stalks and n_rows != stalks[rel.lower]:
        raise BadMatrixShape(
            f"matrix for {rel} has {n_rows} rows, stalk of {rel.lower!r} has dimension {stalks[rel.lower]}",
            path)
    return np.array(data, dtype=float).reshape(n_rows, n_cols)


def parse_sheaf_document(text: bytes | str, strict: bool = True) -> SheafDocument:
    """Parse a sheaf document.

    Raises :class:`DocumentSyntaxError` (with line and column) for malformed
    JSON and a :class:`DocumentError` subclass naming the field path for
    anything structurally wrong.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            line, col = _line_col(text[:exc.start].decode("utf-8", "replace"), exc.start)
            raise DocumentSyntaxError("input is not valid UTF-8", line, col) from None
    try:
        raw = json.loads(text, parse_float=Decimal, parse_constant=_reject_constant,
                         object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    except ValueError as exc:
        raise DocumentSyntaxError(str(exc), 1, 1) from None

    r = _Reader(strict)
    top = r.obj(raw, "", ("format_version",), ("complex", "stalks", "maps", "sections", "interval"))
    version = r.integer(top["format_version"], "format_version")
    if version != FORMAT_VERSION:
        raise DocumentError(f"unsupported format_version {version}", "format_version")

    cells, relations = [], []
    if "complex" in top:
        cx = r.obj(top["complex"], "complex", (), ("cells", "relations"))
        for i, entry in enumerate(r.array(cx.get("cells", []), "complex.cells")):
            path = f"complex.cells[{i}]"
            entry = r.obj(entry, path, ("id", "rank"))
            cells.append(Cell(r.string(entry["id"], f"{path}.id"), r.integer(entry["rank"], f"{path}.rank")))
        for i, entry in enumerate(r.array(cx.get("relations", []), "complex.relations")):
            relations.append(_relation(r, entry, f"complex.relations[{i}]")[0])

    stalks = {}
    for cid, dim in _items(r, top, "stalks"):
        dim = r.integer(dim, f"stalks.{cid}")
        if dim < 0:
            raise DocumentError(f"stalk dimension must be non-negative, got {dim}", f"stalks.{cid}")
        stalks[cid] = dim

    maps = {}
    for i, entry in enumerate(r.array(top.get("maps", []), "maps")):
        path = f"maps[{i}]"
        rel, entry = _relation(r, entry, path, ("matrix",))
        if rel in maps:
            raise DocumentError(f"second matrix given for {rel}", path)
        maps[rel] = _matrix(r, entry["matrix"], f"{path}.matrix", rel, stalks)

    sections = {}
    for name, entry in _items(r, top, "sections"):
        path = f"sections.{name}"
        entry = r.obj(entry, path, ("kind", "values"))
        kind = r.string(entry["kind"], f"{path}.kind")
        values = {cid: r.vector(vec, f"{path}.values.{cid}") for cid, vec in _items(r, entry, "values", path)}
        if kind == SECTION_KIND:
            sections[name] = Section(values)
        elif kind == ASSIGNMENT_KIND:
            sections[name] = NodeAssignment(values)
        else:
            raise DocumentError(f"kind must be {SECTION_KIND!r} or {ASSIGNMENT_KIND!r}, got {kind!r}",
                                f"{path}.kind")

    interval = None
    if "interval" in top:
        iv = r.obj(top["interval"], "interval", ("domain", "step", "intervals"))
        domain = r.vector(iv["domain"], "interval.domain")
        if domain.shape != (2,):
            raise DocumentError("domain must have exactly two endpoints", "interval.domain")
        pieces = []
        for i, pair in enumerate(r.array(iv["intervals"], "interval.intervals")):
            vec = r.vector(pair, f"interval.intervals[{i}]")
            if vec.shape != (2,):
                raise DocumentError("an interval needs exactly two endpoints", f"interval.intervals[{i}]")
            pieces.append((vec[0], vec[1]))
        interval = GridCover((domain[0], domain[1]), r.number(iv["step"], "interval.step"), tuple(pieces))

    return SheafDocument(version, tuple(cells), tuple(relations), stalks, maps, sections, interval)


def _items(r: _Reader, parent: dict, key: str, base: str = ""):
    path = _join(base, key)
    value = parent.get(key, {})
    if not isinstance(value, dict):
        raise DocumentError(f"expected an object, got {_kind(value)}", path)
    return sorted(value.items())


# serialization

def format_number(x: float) -> str:
    """Decimal rendering with 12 significant digits; never ``-0``."""
    s = f"{float(x) + 0.0:.12g}"
    return "0" if s == "-0" else s


def _vec(v) -> str:
    return "[" + ", ".join(format_number(x) for x in v) + "]"


def _mat(m: np.ndarray) -> str:
    return "[" + ", ".join(_vec(row) for row in m) + "]"


def _s(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def _rel_fields(rel: CoveringRelation) -> str:
    out = f'"upper": {_s(rel.upper)}, "lower": {_s(rel.lower)}'
    if rel.slot:
        out += f', "slot": {_s(rel.slot)}'
    return out


def _block(lines: list[str], indent: str) -> str:
    if not lines:
        return "[]"
    return "[\n" + ",\n".join(indent + "  " + ln for ln in lines) + "\n" + indent + "]"


def _dict_block(pairs: list[tuple[str, str]], indent: str) -> str:
    if not pairs:
        return "{}"
    body = ",\n".join(f"{indent}  {_s(k)}: {v}" for k, v in pairs)
    return "{\n" + body + "\n" + indent + "}"


def serialize_sheaf_document(doc: SheafDocument) -> str:
    cells = [f'{{"id": {_s(c.id)}, "rank": {c.rank}}}' for c in sorted(doc.cells, key=lambda c: c.id)]
    relations = [f"{{{_rel_fields(r)}}}" for r in sorted(doc.relations, key=lambda r: r.key)]
    parts = [
        ("format_version", str(doc.format_version)),
        ("complex", _dict_block([("cells", _block(cells, "    ")),
                                 ("relations", _block(relations, "    "))], "  ")),
        ("stalks", _dict_block([(cid, str(dim)) for cid, dim in sorted(doc.stalks.items())], "  ")),
        ("maps", _block([f'{{{_rel_fields(rel)}, "matrix": {_mat(doc.maps[rel])}}}'
                         for rel in sorted(doc.maps, key=lambda r: r.key)], "  ")),
    ]
    if doc.sections:
        entries = []
        for name, sec in sorted(doc.sections.items()):
            kind = SECTION_KIND if isinstance(sec, Section) else ASSIGNMENT_KIND
            values = _dict_block([(cid, _vec(v)) for cid, v in sorted(sec.values.items())], "      ")
            entries.append((name, _dict_block([("kind", _s(kind)), ("values", values)], "    ")))
        parts.append(("sections", _dict_block(entries, "  ")))
    if doc.interval is not None:
        iv = doc.interval
        parts.append(("interval", _dict_block([
            ("domain", _vec(iv.domain)),
            ("step", format_number(iv.step)),
            ("intervals", "[" + ", ".join(_vec(p) for p in iv.intervals) + "]"),
        ], "  ")))
    return _dict_block(parts, "") + "\n"
