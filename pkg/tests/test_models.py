import numpy as np
import pytest
from numpy.testing import assert_allclose

import fewlabel as fl
import fewlabel.autodiff as ad
from helpers import build_random_graph, dagnn_reference, gcn_reference, row_softmax_ref


def fresh_tape():
    return ad.Tape()


class TestGcnForward:
    def test_zero_weights_give_uniform_rows(self, path3):
        lap = fl.normalized_laplacian(path3)
        params = fl.GcnParams(np.zeros((2, 4)), np.zeros((4, 2)))
        F = fl.gcn_forward(fresh_tape(), lap, path3.features, params)
        assert (F.value == 0.5).all()

    def test_single_node_single_class(self):
        g = fl.Graph.from_parts(1, [], [[2.0]], [0], 1)
        lap = fl.normalized_laplacian(g)
        params = fl.GcnParams(np.array([[1.5]]), np.array([[-0.5]]))
        F = fl.gcn_forward(fresh_tape(), lap, g.features, params)
        assert F.value.tolist() == [[1.0]]

    def test_matches_dense_reference(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            g = build_random_graph(rng, n=11, d=6, c=3, p=0.3)
            lap = fl.normalized_laplacian(g)
            params = fl.init_params(fl.ModelConfig("gcn", hidden=5), 6, 3, rng)
            F = fl.gcn_forward(fresh_tape(), lap, g.features, params)
            want = gcn_reference(lap.matrix.toarray(), g.features.toarray(),
                                 params.w1, params.w2)
            assert_allclose(F.value, want, atol=1e-12)

    def test_training_mode_rows_still_sum_to_one(self):
        rng = np.random.default_rng(2)
        g = build_random_graph(rng, n=10, d=6, c=3)
        lap = fl.normalized_laplacian(g)
        params = fl.init_params(fl.ModelConfig("gcn", hidden=4), 6, 3, rng)
        F = fl.gcn_forward(fresh_tape(), lap, g.features, params,
                           dropout=0.5, rng=np.random.default_rng(7), training=True)
        assert_allclose(F.value.sum(axis=1), 1.0, atol=1e-9)

    def test_training_mode_deterministic_under_seed(self):
        rng = np.random.default_rng(3)
        g = build_random_graph(rng, n=9, d=5, c=3)
        lap = fl.normalized_laplacian(g)
        params = fl.init_params(fl.ModelConfig("gcn", hidden=4), 5, 3, rng)

        def run():
            return fl.gcn_forward(fresh_tape(), lap, g.features, params,
                                  dropout=0.6, rng=np.random.default_rng(11),
                                  training=True).value

        assert (run() == run()).all()

    def test_eval_mode_is_pure(self):
        rng = np.random.default_rng(4)
        g = build_random_graph(rng, n=9, d=5, c=3)
        lap = fl.normalized_laplacian(g)
        params = fl.init_params(fl.ModelConfig("gcn", hidden=4), 5, 3, rng)
        a = fl.eval_probabilities(lap, g.features, params)
        b = fl.eval_probabilities(lap, g.features, params)
        assert (a == b).all()

    def test_identity_operator_linear_net_is_logistic_regression(self):
        """With no edges A' = I; positive W1 keeps relu transparent, so the
        net collapses to softmax(X @ (W1 @ W2)) — plain logistic regression."""
        rng = np.random.default_rng(5)
        n, d, h, c = 12, 5, 4, 3
        X = np.abs(rng.standard_normal((n, d)))
        g = fl.Graph.from_parts(n, [], X, rng.integers(0, c, n), c)
        lap = fl.normalized_laplacian(g)
        assert (lap.matrix.toarray() == np.eye(n)).all()
        w1 = np.abs(rng.standard_normal((d, h)))
        w2 = rng.standard_normal((h, c))
        F = fl.gcn_forward(fresh_tape(), lap, g.features, fl.GcnParams(w1, w2))
        assert_allclose(F.value, row_softmax_ref(X @ (w1 @ w2)), atol=1e-12)


class TestDagnnForward:
    def test_zero_weights_give_uniform_rows(self, path3):
        lap = fl.normalized_laplacian(path3)
        params = fl.DagnnParams(np.zeros((2, 4)), np.zeros((4, 2)), np.zeros((2, 1)), depth=3)
        F = fl.dagnn_forward(fresh_tape(), lap, path3.features, params)
        assert (F.value == 0.5).all()

    def test_matches_dense_reference(self):
        for seed, depth in [(0, 1), (1, 3), (2, 5), (3, 10)]:
            rng = np.random.default_rng(seed)
            g = build_random_graph(rng, n=10, d=6, c=3, p=0.3)
            lap = fl.normalized_laplacian(g)
            params = fl.init_params(
                fl.ModelConfig("dagnn", hidden=5, depth=depth), 6, 3, rng
            )
            F = fl.dagnn_forward(fresh_tape(), lap, g.features, params)
            want = dagnn_reference(lap.matrix.toarray(), g.features.toarray(),
                                   params.m1, params.m2, params.s, depth)
            assert_allclose(F.value, want, atol=1e-12)

    def test_identity_score_activation(self):
        rng = np.random.default_rng(4)
        g = build_random_graph(rng, n=8, d=4, c=3)
        lap = fl.normalized_laplacian(g)
        params = fl.init_params(
            fl.ModelConfig("dagnn", hidden=4, depth=3, score_activation="identity"),
            4, 3, rng,
        )
        F = fl.dagnn_forward(fresh_tape(), lap, g.features, params)
        want = dagnn_reference(lap.matrix.toarray(), g.features.toarray(),
                               params.m1, params.m2, params.s, 3,
                               score_activation="identity")
        assert_allclose(F.value, want, atol=1e-12)

    def test_include_level_zero(self):
        rng = np.random.default_rng(5)
        g = build_random_graph(rng, n=8, d=4, c=3)
        lap = fl.normalized_laplacian(g)
        params = fl.init_params(
            fl.ModelConfig("dagnn", hidden=4, depth=2, include_level_zero=True),
            4, 3, rng,
        )
        F = fl.dagnn_forward(fresh_tape(), lap, g.features, params)
        want = dagnn_reference(lap.matrix.toarray(), g.features.toarray(),
                               params.m1, params.m2, params.s, 2,
                               include_level_zero=True)
        assert_allclose(F.value, want, atol=1e-12)

    def test_zero_score_vector_halves_each_level(self, path3):
        """sigmoid(0) = 1/2, so depth 1 with s = 0 gives softmax(A'Z / 2)."""
        rng = np.random.default_rng(6)
        m1 = np.abs(rng.standard_normal((2, 3)))
        m2 = rng.standard_normal((3, 2))
        params = fl.DagnnParams(m1, m2, np.zeros((2, 1)), depth=1)
        lap = fl.normalized_laplacian(path3)
        F = fl.dagnn_forward(fresh_tape(), lap, path3.features, params)
        z = np.maximum(path3.features.toarray() @ m1, 0.0) @ m2
        want = row_softmax_ref(0.5 * (lap.matrix.toarray() @ z))
        assert_allclose(F.value, want, atol=1e-12)

    def test_training_rows_sum_to_one(self):
        rng = np.random.default_rng(7)
        g = build_random_graph(rng, n=9, d=5, c=3)
        lap = fl.normalized_laplacian(g)
        params = fl.init_params(fl.ModelConfig("dagnn", hidden=4, depth=4), 5, 3, rng)
        F = fl.dagnn_forward(fresh_tape(), lap, g.features, params,
                             dropout=0.8, rng=np.random.default_rng(1), training=True)
        assert_allclose(F.value.sum(axis=1), 1.0, atol=1e-9)

    def test_depth_validation(self):
        with pytest.raises(ValueError, match="depth"):
            fl.DagnnParams(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 1)), depth=0)

    def test_bad_score_activation(self):
        with pytest.raises(ValueError, match="score_activation"):
            fl.DagnnParams(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 1)),
                           depth=1, score_activation="tanh")


class TestModelConfig:
    def test_validate_rejects_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            fl.ModelConfig(kind="gat").validate()

    def test_validate_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            fl.ModelConfig(hidden=0).validate()
        with pytest.raises(ValueError):
            fl.ModelConfig(depth=0).validate()


class TestCheckpoints:
    def test_gcn_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        params = fl.init_params(fl.ModelConfig("gcn", hidden=7), 13, 4, rng)
        path = tmp_path / "gcn.ckpt"
        fl.save_params(path, params, seed=99)
        loaded, seed = fl.load_params(path)
        assert seed == 99
        assert (loaded.w1 == params.w1).all()
        assert (loaded.w2 == params.w2).all()

    def test_dagnn_round_trip_preserves_options(self, tmp_path):
        rng = np.random.default_rng(1)
        params = fl.init_params(
            fl.ModelConfig("dagnn", hidden=5, depth=7, score_activation="identity",
                           include_level_zero=True),
            9, 3, rng,
        )
        path = tmp_path / "dagnn.ckpt"
        fl.save_params(path, params, seed=7)
        loaded, seed = fl.load_params(path)
        assert loaded.depth == 7
        assert loaded.score_activation == "identity"
        assert loaded.include_level_zero is True
        for got, want in zip(loaded.arrays(), params.arrays()):
            assert (got == want).all()

    def test_truncated_checkpoint_rejected(self, tmp_path):
        rng = np.random.default_rng(2)
        params = fl.init_params(fl.ModelConfig("gcn", hidden=3), 4, 2, rng)
        path = tmp_path / "trunc.ckpt"
        fl.save_params(path, params, seed=0)
        data = path.read_bytes()
        path.write_bytes(data[:-16])
        with pytest.raises(ValueError, match="truncated"):
            fl.load_params(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        rng = np.random.default_rng(3)
        params = fl.init_params(fl.ModelConfig("gcn", hidden=3), 4, 2, rng)
        path = tmp_path / "trail.ckpt"
        fl.save_params(path, params, seed=0)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(ValueError, match="trailing"):
            fl.load_params(path)
