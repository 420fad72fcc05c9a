from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import strategies as st

from oracles import random_graph_sheaf

ROOT = Path(__file__).resolve().parents[1]
DOCS = ROOT / "docs" / "examples"
GOLDEN = Path(__file__).resolve().parent / "golden"

ACCEPTANCE_LINES: list[str] = []


@st.composite
def graph_sheaves(draw, max_nodes=6, max_edges=8, max_dim=4, entry=3):
    """RawGraphSheaf instances from the random integer family."""
    return random_graph_sheaf(lambda lo, hi: draw(st.integers(lo, hi)),
                              max_nodes, max_edges, max_dim, entry)


@pytest.fixture
def record_criterion():
    def record(line: str) -> None:
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
