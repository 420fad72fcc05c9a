from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import graph_sheaves
from oracles import exact_nullity, random_components_graph, rng_draw
from sheaflab.errors import (
    DimensionMismatch,
    InconsistentAssignment,
    MissingCellValue,
    UnknownCell,
    UnsupportedShape,
)
from sheaflab.numerics import nullspace_basis
from sheaflab.poset import Cell, CoveringRelation, build_complex, from_graph
from sheaflab.sections import (
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
from sheaflab.sheaf import build_sheaf

R = CoveringRelation
A_MAP = np.array([[1.0, -1.0], [0.0, -2.0]])
B_MAP = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, -1.0]])


def constant_sheaf(nodes, edges, k=1):
    cx = from_graph(nodes, edges)
    return build_sheaf(cx, {c: k for c in cx.cell_ids}, {r: np.eye(k) for r in cx.relations})


@pytest.fixture
def edge_sheaf():
    cx = from_graph(["v1", "v2"], [("e12", "v1", "v2")])
    return build_sheaf(cx, {"v1": 2, "v2": 3, "e12": 2}, {("v1", "e12"): A_MAP, ("v2", "e12"): B_MAP})


@pytest.fixture
def scaled():
    """Two nodes, one edge, all stalks R, maps x2 and x3."""
    cx = from_graph(["v1", "v2"], [("e", "v1", "v2")])
    return build_sheaf(cx, {"v1": 1, "v2": 1, "e": 1}, {("v1", "e"): [[2]], ("v2", "e"): [[3]]})


@pytest.fixture
def mute_edges():
    cx = from_graph(["a", "b", "c"], [("ab", "a", "b"), ("bc", "b", "c")])
    dims = {"a": 2, "b": 1, "c": 3, "ab": 0, "bc": 0}
    maps = {r: np.zeros((0, dims[r.upper])) for r in cx.relations}
    return build_sheaf(cx, dims, maps)


# consistency of arbitrary sections

def test_example_section_is_inconsistent(edge_sheaf):
    s = Section({"v1": [2, 1], "e12": [1, -1], "v2": [1, -1, 0]})
    report = is_section_consistent(edge_sheaf, s, 0.0)
    assert not report.consistent
    (v,) = report.violations
    assert (v.upper, v.lower) == ("v1", "e12")
    np.testing.assert_array_equal(v.residual, [0, -1])
    assert v.norm == 1.0


def test_corrected_section_is_consistent(edge_sheaf):
    s = {"v1": [2, 1], "e12": [1, -2], "v2": [1, -2, 0]}
    assert is_section_consistent(edge_sheaf, s, 0.0).consistent


def test_section_errors(edge_sheaf):
    with pytest.raises(MissingCellValue):
        is_section_consistent(edge_sheaf, {"v1": [2, 1], "e12": [1, -1]})
    with pytest.raises(DimensionMismatch):
        is_section_consistent(edge_sheaf, {"v1": [2, 1], "e12": [1], "v2": [0, 0, 0]})
    with pytest.raises(UnknownCell):
        is_section_consistent(edge_sheaf, {"v1": [2, 1], "e12": [1, 1], "v2": [0, 0, 0], "x": []})


@given(graph_sheaves())
@settings(max_examples=60, deadline=None)
def test_zero_section_always_consistent(raw):
    sh = raw.build()
    zero = {c: np.zeros(sh.dim(c)) for c in sh.complex.cell_ids}
    assert is_section_consistent(sh, zero, 0.0).consistent


# coboundary

def test_coboundary_constant_path():
    cob = assemble_coboundary(constant_sheaf(["v1", "v2"], [("e", "v1", "v2")]))
    np.testing.assert_array_equal(cob.matrix, [[1, -1]])


def test_coboundary_single_node():
    cx = from_graph(["v"], [])
    cob = assemble_coboundary(build_sheaf(cx, {"v": 3}, {}))
    assert cob.matrix.shape == (0, 3)


def test_coboundary_edge_shape(edge_sheaf):
    cob = assemble_coboundary(edge_sheaf)
    # rows = dim F(e12) = 2, columns = dim F(v1) + dim F(v2) = 5
    assert cob.matrix.shape == (2, 5)
    np.testing.assert_array_equal(cob.matrix[:, :2], A_MAP)
    np.testing.assert_array_equal(cob.matrix[:, 2:], -B_MAP)
    assert [(r.upper, r.slot) for r in cob.orientation["e12"]] == [("v1", ""), ("v2", "")]


def test_coboundary_orientation_is_lexicographic():
    cx = from_graph(["b", "a"], [("e", "b", "a")])
    sh = build_sheaf(cx, {"a": 1, "b": 1, "e": 1}, {("a", "e"): [[5]], ("b", "e"): [[7]]})
    np.testing.assert_array_equal(assemble_coboundary(sh).matrix, [[5, -7]])


def test_coboundary_self_loop():
    cx = from_graph(["v"], [("l", "v", "v")])
    sh = build_sheaf(cx, {"v": 2, "l": 1}, {("v", "l", "0"): [[1, 0]], ("v", "l", "1"): [[0, 1]]})
    np.testing.assert_array_equal(assemble_coboundary(sh).matrix, [[1, -1]])
    g = global_sections(sh)
    assert g.dim == 1
    np.testing.assert_allclose(g.basis.columns[:, 0], [2 ** -0.5, 2 ** -0.5])


def test_dangling_edge_pins_image_to_zero():
    cx = build_complex([Cell("v", 1), Cell("e", 0)], [R("v", "e")])
    sh = build_sheaf(cx, {"v": 2, "e": 1}, {("v", "e"): [[1, -1]]})
    np.testing.assert_array_equal(assemble_coboundary(sh).matrix, [[1, -1]])
    assert global_sections(sh).dim == 1
    with pytest.raises(InconsistentAssignment):
        extend_to_section(sh, {"v": [1, 0]}, 1e-9)


def test_unsupported_shape():
    cx = from_graph(["a", "b", "c"], [])
    cx = build_complex(cx.cells + (Cell("x", 0),), [R("a", "x"), R("b", "x"), R("c", "x")])
    sh = build_sheaf(cx, {c: 1 for c in cx.cell_ids}, {r: [[1]] for r in cx.relations})
    with pytest.raises(UnsupportedShape):
        assemble_coboundary(sh)


def test_diamond_poset_sections_are_top_stalk():
    cx = build_complex([Cell("C", 2), Cell("B1", 1), Cell("B2", 1), Cell("A", 0)],
                       [R("C", "B1"), R("C", "B2"), R("B1", "A"), R("B2", "A")])
    sh = build_sheaf(cx, {"C": 2, "B1": 1, "B2": 1, "A": 1},
                     {("C", "B1"): [[1, 1]], ("C", "B2"): [[1, 1]], ("B1", "A"): [[2]], ("B2", "A"): [[2]]})
    g = global_sections(sh)
    assert g.dim == 2
    s = extend_to_section(sh, {"C": [1.0, 2.0]})
    np.testing.assert_allclose(s["A"], [6.0])
    assert is_section_consistent(sh, s, 1e-12).consistent


def test_two_tops_over_intermediate_cell():
    # C1, C2 > B > A: images in B must agree even though A sees only B
    cx = build_complex([Cell("C1", 2), Cell("C2", 2), Cell("B", 1), Cell("A", 0)],
                       [R("C1", "B"), R("C2", "B"), R("B", "A")])
    sh = build_sheaf(cx, {"C1": 1, "C2": 1, "B": 1, "A": 0},
                     {("C1", "B"): [[1]], ("C2", "B"): [[1]], ("B", "A"): np.zeros((0, 1))})
    assert global_sections(sh).dim == 1


# global sections

def test_constant_sheaf_connected_graph():
    sh = constant_sheaf(["v1", "v2", "v3", "v4"],
                        [("e12", "v1", "v2"), ("e23", "v2", "v3"), ("e34", "v3", "v4"), ("e14", "v1", "v4")])
    g = global_sections(sh)
    assert g.dim == 1
    np.testing.assert_allclose(g.basis.columns[:, 0], [0.5] * 4, atol=1e-12)


def test_mute_edges_leave_everything_global(mute_edges):
    assert global_sections(mute_edges).dim == 6


def test_scaled_kernel(scaled):
    g = global_sections(scaled)
    assert g.dim == 1
    np.testing.assert_allclose(g.basis.columns[:, 0], np.array([3, 2]) / np.sqrt(13), atol=1e-12)
    (sec,) = g.sections
    np.testing.assert_allclose(sec["e"], [6 / np.sqrt(13)], atol=1e-12)


def test_global_sections_extend_consistently(edge_sheaf):
    g = global_sections(edge_sheaf)
    assert g.dim == 3  # 5 node coordinates, 2 independent constraints
    for sec in g.sections:
        assert is_section_consistent(edge_sheaf, sec, 1e-12).consistent


# extension

def test_extend_kernel_vector(scaled):
    s = extend_to_section(scaled, NodeAssignment({"v1": [3.0], "v2": [2.0]}), 1e-12)
    assert s["e"][0] == 6.0


def test_extend_zero(edge_sheaf):
    s = extend_to_section(edge_sheaf, {"v1": [0, 0], "v2": [0, 0, 0]}, 0.0)
    assert all(not v.any() for v in s.values.values())


def test_extend_inconsistent(edge_sheaf):
    with pytest.raises(InconsistentAssignment) as info:
        extend_to_section(edge_sheaf, {"v1": [2, 1], "v2": [0, 0, 0]}, 1e-9)
    assert info.value.cell == "e12"
    assert info.value.residual == pytest.approx(np.sqrt(5))


def test_extend_rejects_non_maximal_keys(edge_sheaf):
    with pytest.raises(UnknownCell):
        extend_to_section(edge_sheaf, {"v1": [2, 1], "v2": [0, 0, 0], "e12": [0, 0]})


# radius, projection, laplacian

def test_radius_examples(scaled):
    assert consistency_radius(scaled, {"v1": [3.0], "v2": [2.0]}) == pytest.approx(0, abs=1e-10)
    assert consistency_radius(scaled, {"v1": [1.0], "v2": [1.0]}) == pytest.approx(1.0, abs=1e-12)
    assert consistency_radius(scaled, {"v1": [0.0], "v2": [0.0]}) == 0.0


def test_radius_dimension_mismatch(scaled):
    with pytest.raises(DimensionMismatch):
        consistency_radius(scaled, {"v1": [1.0, 2.0], "v2": [1.0]})


def test_nearest_examples(scaled, mute_edges):
    a = {"v1": [3.0], "v2": [2.0]}
    got = nearest_global_section(scaled, a)
    np.testing.assert_allclose(got["v1"], [3.0], atol=1e-10)
    np.testing.assert_allclose(got["v2"], [2.0], atol=1e-10)
    # <[1,0],[3,2]> / <[3,2],[3,2]> * [3,2] = [9/13, 6/13]
    got = nearest_global_section(scaled, {"v1": [1.0], "v2": [0.0]})
    np.testing.assert_allclose([got["v1"][0], got["v2"][0]], [9 / 13, 6 / 13], atol=1e-12)
    a = {"a": [1.0, -2.0], "b": [4.0], "c": [0.5, 0.0, 3.0]}
    got = nearest_global_section(mute_edges, a)
    for k in a:
        np.testing.assert_allclose(got[k], a[k], atol=1e-12)


def test_laplacian_examples(scaled, mute_edges):
    np.testing.assert_array_equal(
        sheaf_laplacian(constant_sheaf(["v1", "v2"], [("e", "v1", "v2")])), [[1, -1], [-1, 1]])
    np.testing.assert_array_equal(sheaf_laplacian(mute_edges), np.zeros((6, 6)))
    np.testing.assert_array_equal(sheaf_laplacian(scaled), [[4, -6], [-6, 9]])


# properties over the random integer family

def _random_assignment(sh, rng):
    return {c: rng.normal(size=sh.dim(c)) * 3 for c in sh.complex.maximal_cells}


@given(graph_sheaves(), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=60, deadline=None)
def test_radius_and_extension_agree(raw, seed):
    sh = raw.build()
    rng = np.random.default_rng(seed)
    a = _random_assignment(sh, rng)
    r = consistency_radius(sh, a)
    assert r == pytest.approx(raw.residual_norm(a), rel=1e-10, abs=1e-10)

    cob = assemble_coboundary(sh)
    blocks = len(cob.row_cells)
    x = np.concatenate([a[c] for c in cob.column_cells]) if cob.column_cells else np.zeros(0)
    worst = max((np.linalg.norm((cob.matrix @ x)[cob.row_slices[c]]) for c in cob.row_cells), default=0.0)
    # radius <= eps implies extension at eps
    extend_to_section(sh, a, r * (1 + 1e-12))
    # extension at tau implies radius <= tau * sqrt(blocks)
    extend_to_section(sh, a, worst * (1 + 1e-12))
    assert r <= worst * np.sqrt(blocks) * (1 + 1e-12) + 1e-300
    if worst > 1e-6:
        with pytest.raises(InconsistentAssignment):
            extend_to_section(sh, a, worst * (1 - 1e-6))


@given(graph_sheaves())
@settings(max_examples=60, deadline=None)
def test_dimension_against_exact_oracle_and_laplacian(raw):
    sh = raw.build()
    g = global_sections(sh, 1e-9)
    assert g.dim == raw.nullity()
    assert nullspace_basis(sheaf_laplacian(sh), 1e-9).dim == g.dim


@given(graph_sheaves(), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=30, deadline=None)
def test_projection_optimality(raw, seed):
    sh = raw.build()
    rng = np.random.default_rng(seed)
    g = global_sections(sh)
    cob = assemble_coboundary(sh)
    a = _random_assignment(sh, rng)
    x = np.concatenate([a[c] for c in cob.column_cells]) if cob.column_cells else np.zeros(0)
    near = nearest_global_section(sh, a)
    p = np.concatenate([near[c] for c in cob.column_cells]) if cob.column_cells else np.zeros(0)
    best = np.linalg.norm(x - p)
    for _ in range(50):
        k = g.basis.columns @ rng.normal(size=g.dim) * 3
        assert best <= np.linalg.norm(x - k) + 1e-8
    assert consistency_radius(sh, near) == pytest.approx(0, abs=1e-10 * (1 + np.linalg.norm(x)))


@pytest.mark.parametrize("components", [1, 2, 3])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_constant_sheaf_dimension_law(components, k):
    rng = np.random.default_rng(100 * components + k)
    for _ in range(5):
        nodes, edges = random_components_graph(rng_draw(rng), components)
        assert global_sections(constant_sheaf(nodes, edges, k)).dim == k * components


def test_oracle_sanity():
    # the oracle itself: x - y = 0 over Q has a one-dimensional solution space
    assert exact_nullity([[Fraction(1), Fraction(-1)]], 2) == 1
    assert exact_nullity([], 3) == 3
