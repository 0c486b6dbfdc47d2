import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from razorkit.graph import (
    AliasTable,
    CsrGraph,
    alias_distribution,
    build_alias,
    build_csr,
    first_order_tables,
    has_edge,
    load_csr,
    read_edge_list,
    sample_alias,
    save_csr,
)


def reconstruct_from_cells(table):
    """Oracle: sum the mass each table cell assigns, independent of the library helper."""
    n = len(table.prob)
    p = np.zeros(n)
    for i in range(n):
        p[i] += table.prob[i] / n
        p[int(table.alias[i])] += (1.0 - table.prob[i]) / n
    return p


def random_graph(rng, n, density=0.2, directed=False):
    edges = []
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < density:
                edges.append((u, v, float(rng.uniform(0.1, 5.0))))
    if not edges:
        edges = [(0, min(1, n - 1), 1.0)]
    return build_csr(edges, directed=directed, node_count=n), edges


class TestBuildCsr:
    def test_single_undirected_edge(self):
        g = build_csr([(0, 1, 1.0)], directed=False, node_count=2)
        assert list(g.offsets) == [0, 1, 2]
        assert list(g.targets) == [1, 0]

    def test_duplicate_edges_aggregate(self):
        g = build_csr([(0, 1, 1.0), (0, 1, 2.0)], directed=True, node_count=2)
        assert g.degree(0) == 1
        assert g.neighbor_weights(0)[0] == pytest.approx(3.0)

    def test_rejects_out_of_range_id(self):
        with pytest.raises(ValueError):
            build_csr([(0, 5, 1.0)], directed=True, node_count=2)

    def test_rejects_non_positive_weight(self):
        with pytest.raises(ValueError):
            build_csr([(0, 1, 0.0)], directed=True, node_count=2)

    def test_neighbor_lists_sorted(self):
        g = build_csr([(0, 3, 1.0), (0, 1, 1.0), (0, 2, 1.0)], directed=True, node_count=4)
        assert list(g.neighbors(0)) == [1, 2, 3]

    def test_arrays_are_read_only(self):
        g = build_csr([(0, 1, 1.0)], directed=False, node_count=2)
        with pytest.raises(ValueError):
            g.weights[0] = 9.0

    @given(st.integers(0, 2**31))
    @settings(max_examples=40, deadline=None)
    def test_permutation_invariance(self, perm_seed):
        """Shuffling the input edge sequence leaves the CSR arrays unchanged."""
        base = [(0, 1, 1.0), (2, 0, 0.5), (1, 2, 2.0), (3, 1, 1.5), (0, 3, 0.25)]
        ref = build_csr(base, directed=False, node_count=4)
        shuffled = list(base)
        np.random.default_rng(perm_seed).shuffle(shuffled)
        g = build_csr(shuffled, directed=False, node_count=4)
        np.testing.assert_array_equal(g.offsets, ref.offsets)
        np.testing.assert_array_equal(g.targets, ref.targets)
        np.testing.assert_array_equal(g.weights, ref.weights)

    def test_weighted_degrees_match_slice_sums(self):
        g, _ = random_graph(np.random.default_rng(7), 12)
        expect = [g.neighbor_weights(v).sum() for v in range(g.node_count)]
        np.testing.assert_allclose(g.weighted_degrees(), expect)


class TestHasEdge:
    def test_path_graph(self):
        g = build_csr([(0, 1, 1.0), (1, 2, 1.0)], directed=False, node_count=3)
        assert has_edge(g, 0, 1)
        assert not has_edge(g, 0, 2)

    def test_agrees_with_dense_oracle(self):
        """Exhaustive comparison against a dense boolean matrix, n=64."""
        rng = np.random.default_rng(11)
        n = 64
        g, edges = random_graph(rng, n, density=0.08, directed=False)
        dense = np.zeros((n, n), dtype=bool)
        for u, v, _ in edges:
            dense[u, v] = dense[v, u] = True
        for u in range(n):
            for v in range(n):
                assert has_edge(g, u, v) == dense[u, v]

    def test_rejects_bad_ids(self):
        g = build_csr([(0, 1, 1.0)], directed=False, node_count=2)
        with pytest.raises(ValueError):
            has_edge(g, 0, 2)


class TestAlias:
    def test_degenerate_single_weight(self):
        t = build_alias([1.0])
        assert list(t.prob) == [1.0]
        assert sample_alias(t, np.random.default_rng(0)) == 0

    def test_symmetric_pair(self):
        t = build_alias([1.0, 1.0])
        np.testing.assert_allclose(reconstruct_from_cells(t), [0.5, 0.5])

    def test_one_three_reconstruction(self):
        t = build_alias([1.0, 3.0])
        np.testing.assert_allclose(reconstruct_from_cells(t), [0.25, 0.75], atol=1e-12)

    def test_rejects_empty_and_non_positive(self):
        with pytest.raises(ValueError):
            build_alias([])
        with pytest.raises(ValueError):
            build_alias([1.0, -2.0])

    @given(
        st.lists(st.floats(min_value=1e-3, max_value=1e3, allow_nan=False), min_size=1, max_size=40)
    )
    @settings(max_examples=80, deadline=None)
    def test_reconstruction_matches_normalized_weights(self, weights):
        w = np.asarray(weights)
        t = build_alias(w)
        np.testing.assert_allclose(reconstruct_from_cells(t), w / w.sum(), atol=1e-12)
        assert np.all(t.prob >= 0.0) and np.all(t.prob <= 1.0)

    def test_library_distribution_helper_matches_oracle(self):
        t = build_alias([0.2, 5.0, 1.0, 1.0, 3.7])
        np.testing.assert_allclose(alias_distribution(t), reconstruct_from_cells(t), atol=1e-15)

    def test_uniform_pair_frequencies(self):
        t = build_alias([1.0, 1.0])
        rng = np.random.default_rng(42)
        draws = 100_000
        counts = np.bincount([sample_alias(t, rng) for _ in range(draws)], minlength=2)
        freq = counts / draws
        assert 0.49 <= freq[0] <= 0.51
        _, pvalue = stats.chisquare(counts, [draws / 2, draws / 2])
        assert pvalue > 0.001

    def test_one_three_frequencies(self):
        t = build_alias([1.0, 3.0])
        rng = np.random.default_rng(43)
        draws = 100_000
        counts = np.bincount([sample_alias(t, rng) for _ in range(draws)], minlength=2)
        np.testing.assert_allclose(counts / draws, [0.25, 0.75], atol=0.01)
        _, pvalue = stats.chisquare(counts, [draws * 0.25, draws * 0.75])
        assert pvalue > 0.001

    def test_random_weight_vectors_pass_chi2(self):
        """Empirical draw frequencies fit the normalized weights (significance 0.001)."""
        rng = np.random.default_rng(44)
        for trial in range(5):
            w = rng.uniform(0.05, 4.0, size=rng.integers(2, 12))
            t = build_alias(w)
            draws = 100_000
            counts = np.bincount([sample_alias(t, rng) for _ in range(draws)], minlength=len(w))
            _, pvalue = stats.chisquare(counts, draws * w / w.sum())
            assert pvalue > 0.001, f"trial {trial}: p={pvalue}"

    def test_mismatched_table_lengths_rejected(self):
        with pytest.raises(ValueError):
            AliasTable(np.array([1.0, 0.5]), np.array([0]))


class TestFirstOrderTables:
    def test_star_center_uniform(self):
        g = build_csr([(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], directed=False, node_count=4)
        tables = first_order_tables(g)
        np.testing.assert_allclose(reconstruct_from_cells(tables[0]), [1 / 3] * 3)

    def test_weighted_node(self):
        g = build_csr([(0, 1, 1.0), (0, 2, 3.0)], directed=True, node_count=3)
        tables = first_order_tables(g)
        np.testing.assert_allclose(reconstruct_from_cells(tables[0]), [0.25, 0.75], atol=1e-12)

    def test_isolated_node_has_empty_marker(self):
        g = build_csr([(0, 1, 1.0)], directed=True, node_count=3)
        tables = first_order_tables(g)
        assert tables[1] is None and tables[2] is None

    def test_total_cells_proportional_to_edge_count(self):
        g, _ = random_graph(np.random.default_rng(3), 30)
        tables = first_order_tables(g)
        total_cells = sum(len(t) for t in tables if t is not None)
        assert total_cells == g.edge_count


class TestIo:
    def test_edge_list_parsing(self, tmp_path):
        path = tmp_path / "edges.tsv"
        path.write_text("# comment\n0\t1\t2.5\n\n1\t2\n")
        assert read_edge_list(path) == [(0, 1, 2.5), (1, 2, 1.0)]

    def test_edge_list_rejects_malformed_line(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("0\t1\t2.0\t9\n")
        with pytest.raises(ValueError, match="expected 2 or 3 fields"):
            read_edge_list(path)

    def test_save_load_round_trip_bit_exact(self, tmp_path):
        g, _ = random_graph(np.random.default_rng(50), 50)
        path = tmp_path / "graph.bin"
        save_csr(g, path)
        g2 = load_csr(path)
        assert g2.node_count == g.node_count
        assert g2.offsets.tobytes() == g.offsets.tobytes()
        assert g2.targets.tobytes() == g.targets.tobytes()
        assert g2.weights.tobytes() == g.weights.tobytes()

    def test_load_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"not a graph")
        with pytest.raises(ValueError, match="bad magic"):
            load_csr(path)


def test_csr_invariant_validation():
    with pytest.raises(ValueError):
        CsrGraph(2, np.array([0, 1]), np.array([1]), np.array([1.0]))
    with pytest.raises(ValueError):
        CsrGraph(2, np.array([0, 2, 1]), np.array([1]), np.array([1.0]))
    with pytest.raises(ValueError):
        CsrGraph(1, np.array([0, 1]), np.array([5]), np.array([1.0]))
