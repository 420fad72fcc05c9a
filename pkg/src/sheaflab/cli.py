"""Command-line interface.

Exit codes: 0 when everything checked out, 1 for usage or input errors,
2 when the input is well formed but a consistency check failed.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import TextIO

import numpy as np

from .document import SheafDocument, format_number, parse_sheaf_document
from .errors import GlueConflict, InconsistencyError, InputError, SheafError
from .interval import IntervalSheaf, build_interval_sheaf, glue
from .numerics import DEFAULT_REL_TOL
from .sections import (
    NodeAssignment,
    Section,
    assemble_coboundary,
    consistency_radius,
    global_sections,
    is_section_consistent,
    nearest_global_section,
    sheaf_laplacian,
)
from .sheaf import default_tolerance, validate

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INCONSISTENT = 2

TOL_ENV = "SHEAFLAB_TOL"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _vec(v) -> str:
    return "[" + ", ".join(format_number(x) for x in v) + "]"


def _tolerance(args, default: float) -> float:
    if args.tol is not None:
        return args.tol
    env = os.environ.get(TOL_ENV)
    if env:
        try:
            return float(env)
        except ValueError:
            raise UsageError(f"{TOL_ENV}={env!r} is not a number") from None
    return default


def _load(args) -> SheafDocument:
    with open(args.file, "rb") as fh:
        return parse_sheaf_document(fh.read(), strict=not args.lenient)


def _named(doc: SheafDocument, name: str, kind: type):
    try:
        value = doc.sections[name]
    except KeyError:
        raise UsageError(f"document has no section named {name!r}") from None
    if not isinstance(value, kind):
        want = "section" if kind is Section else "assignment"
        raise UsageError(f"{name!r} is not of kind {want!r}")
    return value


def _columns(sheaf, cells) -> str:
    return " ".join(f"{c}({sheaf.dim(c)})" for c in cells)


def cmd_validate(args, out: TextIO) -> int:
    doc = _load(args)
    sheaf = doc.sheaf(check=False)
    report = validate(sheaf, _tolerance(args, default_tolerance(sheaf)))
    if report.ok:
        print("ok", file=out)
        return EXIT_OK
    print(f"violations = {len(report.violations)}", file=out)
    for v in report.violations:
        print(v.describe(), file=out)
    return EXIT_INCONSISTENT


def cmd_check_section(args, out: TextIO) -> int:
    doc = _load(args)
    sheaf = doc.sheaf()
    section = _named(doc, args.section, Section)
    report = is_section_consistent(sheaf, section, _tolerance(args, default_tolerance(sheaf)))
    if report.consistent:
        print("consistent", file=out)
        return EXIT_OK
    print(f"inconsistent: violations = {len(report.violations)}", file=out)
    for v in report.violations:
        tag = f"#{v.slot}" if v.slot else ""
        print(f"({v.upper},{v.lower}{tag}) residual = {_vec(v.residual)} norm = {format_number(v.norm)}",
              file=out)
    return EXIT_INCONSISTENT


def cmd_global(args, out: TextIO) -> int:
    sheaf = _load(args).sheaf()
    result = global_sections(sheaf, _tolerance(args, DEFAULT_REL_TOL))
    print(f"dim = {result.dim}", file=out)
    print(f"columns = {_columns(sheaf, result.column_cells)}", file=out)
    for j in range(result.dim):
        print(f"basis[{j}] = {_vec(result.basis.columns[:, j])}", file=out)
    return EXIT_OK


def cmd_radius(args, out: TextIO) -> int:
    doc = _load(args)
    sheaf = doc.sheaf()
    radius = consistency_radius(sheaf, _named(doc, args.assignment, NodeAssignment))
    print(f"radius = {format_number(radius)}", file=out)
    return EXIT_OK


def cmd_project(args, out: TextIO) -> int:
    doc = _load(args)
    sheaf = doc.sheaf()
    nearest = nearest_global_section(sheaf, _named(doc, args.assignment, NodeAssignment),
                                     _tolerance(args, DEFAULT_REL_TOL))
    for cid in sorted(nearest.values):
        print(f"{cid} = {_vec(nearest[cid])}", file=out)
    return EXIT_OK


def cmd_laplacian(args, out: TextIO) -> int:
    sheaf = _load(args).sheaf()
    lap = sheaf_laplacian(sheaf)
    print(f"columns = {_columns(sheaf, assemble_coboundary(sheaf).column_cells)}", file=out)
    for row in lap:
        print(_vec(row), file=out)
    if args.spectrum:
        eig = np.linalg.eigvalsh(lap) if lap.size else np.zeros(0)
        scale = max(1.0, float(np.abs(eig).max())) if eig.size else 1.0
        eig = np.where(np.abs(eig) <= 1e-12 * scale, 0.0, eig)
        print(f"spectrum = {_vec(np.sort(eig))}", file=out)
    return EXIT_OK


def cmd_interval_glue(args, out: TextIO) -> int:
    doc = _load(args)
    if doc.interval is None:
        raise UsageError("document has no interval stanza")
    sheaf: IntervalSheaf = build_interval_sheaf(doc.interval)
    if args.assignment is not None:
        locals_ = _named(doc, args.assignment, NodeAssignment)
    else:
        names = [n for n, s in sorted(doc.sections.items()) if isinstance(s, NodeAssignment)]
        if not names:
            raise UsageError("document has no assignment to glue")
        locals_ = doc.sections[names[0]]
    try:
        result = glue(sheaf, locals_, _tolerance(args, 1e-9))
    except GlueConflict as exc:
        print(f"conflict at grid point {format_number(exc.point)} (index {exc.grid_index}): "
              f"values = {_vec(exc.values)} difference = {format_number(exc.difference)}", file=out)
        return EXIT_INCONSISTENT
    print(f"points = {_vec(result.points)}", file=out)
    print(f"values = {_vec(result.values)}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("file", help="sheaf document (JSON)")
    common.add_argument("--lenient", action="store_true", help="ignore unknown fields")

    def tol(p, what):
        p.add_argument("--tol", type=float, default=None, help=f"{what} (env {TOL_ENV} also works)")

    parser = _Parser(prog="sheaflab", description="Cellular sheaves on graphs and finite posets.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", parents=[common], help="check shapes and path-independence")
    tol(p, "commutativity tolerance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("check-section", parents=[common], help="check a named section")
    p.add_argument("--section", required=True)
    tol(p, "max-norm residual tolerance")
    p.set_defaults(func=cmd_check_section)

    p = sub.add_parser("global", parents=[common], help="basis of the global sections")
    tol(p, "relative singular-value cutoff")
    p.set_defaults(func=cmd_global)

    p = sub.add_parser("radius", parents=[common], help="consistency radius of an assignment")
    p.add_argument("--assignment", required=True)
    p.set_defaults(func=cmd_radius, tol=None)

    p = sub.add_parser("project", parents=[common], help="nearest global section to an assignment")
    p.add_argument("--assignment", required=True)
    tol(p, "relative singular-value cutoff")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("laplacian", parents=[common], help="sheaf Laplacian")
    p.add_argument("--spectrum", action="store_true", help="also print eigenvalues")
    p.set_defaults(func=cmd_laplacian, tol=None)

    p = sub.add_parser("interval-glue", parents=[common], help="glue local samples over an interval cover")
    p.add_argument("--assignment", default=None, help="local data (default: first assignment by name)")
    tol(p, "allowed disagreement on overlaps")
    p.set_defaults(func=cmd_interval_glue)
    return parser


def run_cli(argv: list[str], stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, out)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    except InconsistencyError as exc:
        print(f"inconsistent: {exc}", file=err)
        return EXIT_INCONSISTENT
    except (InputError, SheafError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
