import numpy as np
import pytest
from numpy.testing import assert_allclose

import fewlabel as fl
from helpers import build_random_graph


def make_graph(n, edges, c=2):
    X = np.eye(n)
    y = [i % c for i in range(n)]
    return fl.Graph.from_parts(n, edges, X, y, c)


class TestNormalizedLaplacian:
    def test_single_isolated_node(self):
        g = make_graph(1, [], c=1)
        lap = fl.normalized_laplacian(g)
        assert lap.matrix.toarray() == np.array([[1.0]])

    def test_two_nodes_one_edge(self):
        g = make_graph(2, [[0, 1]])
        dense = fl.normalized_laplacian(g).matrix.toarray()
        assert_allclose(dense, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)

    def test_three_node_path(self, path3):
        dense = fl.normalized_laplacian(path3).matrix.toarray()
        # degrees-with-self-loop are (2, 3, 2)
        assert dense[0, 0] == 0.5
        assert dense[1, 1] == 1.0 / 3.0
        assert dense[2, 2] == 0.5
        assert_allclose(dense[0, 1], 1.0 / np.sqrt(6.0), rtol=1e-15)
        assert dense[0, 2] == 0.0

    def test_symmetry_is_bitwise(self):
        for seed in range(5):
            g = build_random_graph(np.random.default_rng(seed), n=15, p=0.3)
            dense = fl.normalized_laplacian(g).matrix.toarray()
            assert (dense == dense.T).all()

    def test_eigenvalues_within_unit_interval(self):
        """The operator is similar to I - L_sym, so its spectrum sits in [-1, 1]."""
        for seed in range(8):
            g = build_random_graph(np.random.default_rng(seed), n=20, p=0.25)
            dense = fl.normalized_laplacian(g).matrix.toarray()
            eig = np.linalg.eigvalsh(dense)
            assert eig.min() >= -1.0 - 1e-9
            assert eig.max() <= 1.0 + 1e-9

    def test_largest_eigenvalue_is_one(self, path3):
        eig = np.linalg.eigvalsh(fl.normalized_laplacian(path3).matrix.toarray())
        assert_allclose(eig.max(), 1.0, atol=1e-12)


class TestSpmm:
    def test_matches_dense_product(self):
        rng = np.random.default_rng(3)
        for seed in range(4):
            g = build_random_graph(np.random.default_rng(seed), n=30, p=0.2)
            lap = fl.normalized_laplacian(g)
            dense = rng.standard_normal((30, 7))
            assert_allclose(fl.spmm(lap, dense), lap.matrix.toarray() @ dense, atol=1e-12)

    def test_shape_mismatch_raises(self, path3):
        lap = fl.normalized_laplacian(path3)
        with pytest.raises(ValueError, match="shape mismatch"):
            fl.spmm(lap, np.zeros((4, 2)))


class TestIsNeighbor:
    def test_path_adjacency(self, path3):
        assert fl.is_neighbor(path3, 0, 1)
        assert fl.is_neighbor(path3, 1, 0)
        assert not fl.is_neighbor(path3, 0, 2)

    def test_self_counts_as_neighbor(self, path3):
        assert fl.is_neighbor(path3, 2, 2)

    def test_out_of_range_raises(self, path3):
        with pytest.raises(IndexError):
            fl.is_neighbor(path3, 0, 3)
        with pytest.raises(IndexError):
            fl.is_neighbor(path3, -1, 0)


class TestGraphConstruction:
    def test_edge_list_is_canonical(self):
        g = make_graph(4, [[2, 1], [0, 3], [0, 1]])
        assert g.edges.tolist() == [[0, 1], [0, 3], [1, 2]]
        assert g.num_edges == 3

    def test_degrees(self, path3):
        assert path3.degrees().tolist() == [1, 2, 1]

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self loop"):
            make_graph(3, [[0, 1], [2, 2]])

    def test_duplicate_rejected_across_orientations(self):
        with pytest.raises(ValueError, match="duplicate"):
            make_graph(3, [[0, 1], [1, 0]])

    def test_endpoint_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            make_graph(3, [[0, 5]])

    def test_label_out_of_range(self):
        with pytest.raises(ValueError, match="label"):
            fl.Graph.from_parts(2, [[0, 1]], np.eye(2), [0, 2], 2)

    def test_non_finite_feature_rejected(self):
        X = np.array([[1.0, np.inf], [0.0, 1.0]])
        with pytest.raises(ValueError, match="non-finite"):
            fl.Graph.from_parts(2, [[0, 1]], X, [0, 1], 2)

    def test_storage_is_immutable(self, path3):
        with pytest.raises(ValueError):
            path3.adjacency.data[0] = 5.0
        with pytest.raises(ValueError):
            path3.labels[0] = 1
