from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lapinc.graph import (
    GraphFormatError,
    LaplacianKind,
    build_laplacian,
    connected_components,
    dumps_edge_list,
    generate_erdos_renyi,
    load_edge_list,
    load_matrix_market,
    normalize_weights,
    strengths,
)
from lapinc.eigensolve import dense_oracle

from conftest import random_weighted_connected, small_graph_zoo


class TestEdgeListLoader:
    def test_path_graph(self, p3):
        assert p3.n == 3 and p3.m == 2
        assert p3.weights[0, 1] == 1.0 and p3.weights[1, 2] == 1.0

    def test_duplicate_edges_sum(self):
        g = load_edge_list("0 1 2.0\n0 1 3.0")
        assert g.n == 2 and g.m == 1
        assert g.weights[0, 1] == 5.0

    def test_self_loop_rejected_with_line(self):
        with pytest.raises(GraphFormatError, match="line 1.*self-loop"):
            load_edge_list("0 0 1.0")

    def test_self_loop_line_number(self):
        with pytest.raises(GraphFormatError, match="line 3"):
            load_edge_list("0 1\n# comment\n2 2")

    def test_negative_weight_rejected(self):
        with pytest.raises(GraphFormatError, match="finite and >= 0"):
            load_edge_list("0 1 -2.0")

    def test_non_finite_weight_rejected(self):
        with pytest.raises(GraphFormatError):
            load_edge_list("0 1 nan")
        with pytest.raises(GraphFormatError):
            load_edge_list("0 1 inf")

    def test_malformed_tokens_rejected(self):
        with pytest.raises(GraphFormatError, match="line 2"):
            load_edge_list("0 1\nzero one")
        with pytest.raises(GraphFormatError):
            load_edge_list("0 1 2 3")

    def test_comments_and_blanks_skipped(self):
        g = load_edge_list("# header\n\n0 1\n\n# tail\n1 2\n")
        assert g.n == 3 and g.m == 2

    def test_sparse_ids_relabeled_with_map(self):
        g = load_edge_list("10 30\n30 500")
        assert g.n == 3
        assert list(g.node_ids) == [10, 30, 500]

    def test_default_weight(self):
        g = load_edge_list("0 1", default_weight=2.5)
        assert g.weights[0, 1] == 2.5


class TestMatrixMarket:
    def test_symmetric_entry(self):
        g = load_matrix_market(
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 1.0\n"
        )
        assert g.n == 2 and g.m == 1 and g.weights[0, 1] == 1.0

    def test_diagonal_entry_rejected(self):
        with pytest.raises(GraphFormatError, match="self-loop"):
            load_matrix_market("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 1 1.0\n")

    def test_asymmetric_general_rejected(self):
        with pytest.raises(GraphFormatError, match="asymmetric"):
            load_matrix_market(
                "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1.0\n2 1 2.0\n"
            )

    def test_symmetric_general_accepted(self):
        g = load_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 3.0\n2 1 3.0\n"
        )
        assert g.m == 1 and g.weights[0, 1] == 3.0

    def test_pattern_field(self):
        g = load_matrix_market("%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 2\n")
        assert g.m == 2 and g.weights[0, 1] == 1.0

    def test_out_of_range_index(self):
        with pytest.raises(GraphFormatError, match="out of range"):
            load_matrix_market("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1.0\n")

    def test_bad_header(self):
        with pytest.raises(GraphFormatError, match="header"):
            load_matrix_market("%%NotMatrixMarket whatever\n")


class TestErdosRenyi:
    def test_complete_graph(self):
        g = generate_erdos_renyi(5, 1.0, seed=0)
        assert g.m == 10

    def test_single_edge(self):
        g = generate_erdos_renyi(2, 1.0, seed=0)
        assert g.n == 2 and g.m == 1

    def test_edge_count_within_binomial_bound(self):
        g = generate_erdos_renyi(1000, 0.1, seed=7)
        pairs = 1000 * 999 // 2
        mean = 0.1 * pairs
        sd = math.sqrt(pairs * 0.1 * 0.9)
        assert abs(g.m - mean) <= 5 * sd

    def test_deterministic_for_seed(self):
        a = generate_erdos_renyi(50, 0.1, seed=3)
        b = generate_erdos_renyi(50, 0.1, seed=3)
        assert (a.weights != b.weights).nnz == 0

    def test_invalid_p(self):
        with pytest.raises(ValueError):
            generate_erdos_renyi(10, 0.0, seed=0)
        with pytest.raises(ValueError):
            generate_erdos_renyi(10, 1.5, seed=0)

    def test_disconnected_falls_back_to_largest_component(self):
        # p low enough that 100 samples of G(40, p) are all disconnected
        g = generate_erdos_renyi(40, 0.01, seed=5)
        assert g.meta.get("largest_component_fallback") is True
        assert connected_components(g).count == 1
        assert g.n < 40


class TestStrengths:
    def test_p3(self, p3):
        sv = strengths(p3)
        assert list(sv.per_node) == [1.0, 2.0, 1.0]
        assert sv.total == 4.0

    def test_triangle(self, k3):
        sv = strengths(k3)
        assert list(sv.per_node) == [2.0, 2.0, 2.0]
        assert sv.total == 6.0

    def test_weighted_edge(self, single_edge_w4):
        sv = strengths(single_edge_w4)
        assert list(sv.per_node) == [4.0, 4.0]
        assert sv.total == 8.0

    def test_unweighted_total_is_twice_edge_count(self):
        g = random_weighted_connected(30, 0.2, seed=1)
        # strip the weights back to 1
        h = load_edge_list(
            "\n".join(f"{u} {v}" for u, v in zip(*g.weights.nonzero()) if u < v)
        )
        assert strengths(h).total == 2 * h.m


class TestLaplacian:
    def test_p3_unnormalized(self, p3):
        L = build_laplacian(p3, LaplacianKind.UNNORMALIZED)
        expected = np.array([[1, -1, 0], [-1, 2, -1], [0, -1, 1]], dtype=float)
        assert np.array_equal(L.matrix.toarray(), expected)

    def test_single_edge_normalized(self, single_edge_w4):
        L = build_laplacian(single_edge_w4, LaplacianKind.NORMALIZED)
        assert np.allclose(L.matrix.toarray(), [[1, -1], [-1, 1]])

    def test_trace_equals_strength_total(self, p3):
        L = build_laplacian(p3, LaplacianKind.UNNORMALIZED)
        assert abs(L.matrix.diagonal().sum() - 4.0) <= 1e-12 * 4.0

    def test_normalized_requires_positive_strengths(self, two_edges):
        from conftest import edgeless_graph

        with pytest.raises(ValueError, match="node 0"):
            build_laplacian(edgeless_graph(3), LaplacianKind.NORMALIZED)

    def test_sigma(self, p3, single_edge_w4):
        assert build_laplacian(p3, LaplacianKind.UNNORMALIZED).sigma == 4.0
        assert build_laplacian(single_edge_w4, LaplacianKind.NORMALIZED).sigma == 2.0


class TestNormalizeWeights:
    def test_single_heavy_edge(self, single_edge_w4):
        wn = normalize_weights(single_edge_w4)
        assert wn.weights[0, 1] == pytest.approx(1.0, abs=1e-15)

    def test_regular_graph_entries(self, k3):
        wn = normalize_weights(k3)
        coo = wn.weights.tocoo()
        assert np.allclose(coo.data, 0.5)

    def test_p3_entry(self, p3):
        wn = normalize_weights(p3)
        assert wn.weights[0, 1] == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_pattern_preserved(self):
        g = random_weighted_connected(25, 0.3, seed=2)
        wn = normalize_weights(g)
        assert np.array_equal(g.weights.indptr, wn.weights.indptr)
        assert np.array_equal(g.weights.indices, wn.weights.indices)

    def test_isolated_node_rejected(self):
        from conftest import edgeless_graph

        with pytest.raises(ValueError, match="isolated"):
            normalize_weights(edgeless_graph(2))


class TestComponents:
    def test_connected(self, p3):
        lab = connected_components(p3)
        assert lab.count == 1 and list(lab.sizes) == [3]

    def test_two_components(self, two_edges):
        lab = connected_components(two_edges)
        assert lab.count == 2
        assert list(lab.sizes) == [2, 2]
        assert list(lab.labels) == [0, 0, 1, 1]

    def test_edgeless(self):
        from conftest import edgeless_graph

        lab = connected_components(edgeless_graph(3))
        assert lab.count == 3

    def test_labels_ordered_by_smallest_member(self):
        g = load_edge_list("5 6\n0 1\n2 3")
        lab = connected_components(g)
        assert list(lab.labels) == [0, 0, 1, 1, 2, 2]

    def test_count_matches_kernel_multiplicity(self):
        for seed in range(5):
            g = generate_erdos_renyi(30, 0.06, seed=seed)
            L = build_laplacian(g, LaplacianKind.UNNORMALIZED)
            values, _ = dense_oracle(L)
            kernel_dim = int(np.sum(values < 1e-8))
            assert connected_components(g).count == kernel_dim


class TestInvariants:
    def test_weight_matrix_invariants_on_zoo(self):
        for g in small_graph_zoo():
            w = g.weights
            assert (w != w.T).nnz == 0, "symmetry"
            assert np.all(w.diagonal() == 0.0), "zero diagonal"
            assert np.all(w.data >= 0.0), "nonnegative"
            assert g.m == int(np.sum(w.tocoo().row < w.tocoo().col))

    def test_laplacian_identities_on_zoo(self):
        for g in small_graph_zoo():
            sv = strengths(g)
            L = build_laplacian(g, LaplacianKind.UNNORMALIZED)
            tol = 1e-12 * max(1.0, sv.total)
            assert abs(L.matrix.diagonal().sum() - sv.total) <= tol
            assert np.max(np.abs(L.matrix @ np.ones(g.n))) <= tol

    def test_normalized_kernel_direction_on_zoo(self):
        for g in small_graph_zoo():
            sv = strengths(g)
            if np.any(sv.per_node <= 0):
                continue
            L = build_laplacian(g, LaplacianKind.NORMALIZED)
            direction = np.sqrt(sv.per_node)
            assert np.linalg.norm(L.matrix @ direction) <= 1e-12 * math.sqrt(sv.total)


@st.composite
def edge_sets(draw):
    n_edges = draw(st.integers(min_value=1, max_value=25))
    edges = {}
    for _ in range(n_edges):
        u = draw(st.integers(min_value=0, max_value=12))
        v = draw(st.integers(min_value=0, max_value=12))
        if u == v:
            continue
        w = draw(st.floats(min_value=0.001, max_value=100.0, allow_nan=False))
        key = (min(u, v), max(u, v))
        edges[key] = edges.get(key, 0.0) + w
    if not edges:
        edges[(0, 1)] = 1.0
    return edges


@settings(max_examples=50, deadline=None)
@given(edge_sets())
def test_export_load_round_trip(edges):
    text = "\n".join(f"{u} {v} {w!r}" for (u, v), w in edges.items())
    g = load_edge_list(text)
    g2 = load_edge_list(dumps_edge_list(g))
    assert g2.n == g.n and g2.m == g.m
    assert np.array_equal(g2.node_ids, g.node_ids)
    assert (g2.weights != g.weights).nnz == 0


@settings(max_examples=30, deadline=None)
@given(edge_sets())
def test_strength_consistency(edges):
    text = "\n".join(f"{u} {v} {w!r}" for (u, v), w in edges.items())
    g = load_edge_list(text)
    sv = strengths(g)
    assert np.all(sv.per_node >= 0)
    assert sv.total == pytest.approx(float(g.weights.sum()), rel=1e-12)
