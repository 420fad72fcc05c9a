"""Cellular sheaves of real vector spaces on graphs and finite posets."""

from .document import SheafDocument, parse_sheaf_document, serialize_sheaf_document, to_document
from .errors import InconsistencyError, InputError, SheafError
from .interval import GridCover, GluedSamples, IntervalSheaf, build_interval_sheaf, glue
from .numerics import TolerancedBasis, nullspace_basis, project_onto
from .poset import Cell, Complex, CoveringRelation, build_complex, chains_between, from_graph
from .sections import (
    CoboundaryOperator,
    ConsistencyReport,
    GlobalSectionBasis,
    NodeAssignment,
    Section,
    assemble_coboundary,
    consistency_radius,
    extend_to_section,
    global_sections,
    is_section_consistent,
    nearest_global_section,
    sheaf_laplacian,
)
from .sheaf import Sheaf, ValidationReport, build_sheaf, default_tolerance, restrict, validate

__version__ = "0.1.0"
