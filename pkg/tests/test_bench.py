import dataclasses
import json
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

import fewlabel as fl
from fewlabel.pseudo import _empty_sample
from conftest import SYNTHETIC_BUNDLE, require_bundle
from helpers import build_random_graph

pytestmark = []


def fast_config(**overrides):
    base = fl.ExperimentConfig(
        dataset=SYNTHETIC_BUNDLE,
        pseudo=fl.PseudoConfig(threshold=0.4, negative_weight=0.1,
                               num_positives=5, num_negatives=2),
        train=fl.TrainConfig(max_epochs=25, dropout=0.5, l2_rate=5e-4,
                             early_stopping=False),
        num_splits=2,
    )
    return fl.apply_overrides(base, overrides)


# ---------------------------------------------------------------------------
# diagnostics: hand-checked values
# ---------------------------------------------------------------------------

class TestConfidenceHistogram:
    def test_point_mass(self):
        hist = fl.confidence_histogram(np.array([[0.15, 0.85]] * 4), np.arange(4))
        assert hist[8] == 100.0 and hist.sum() == 100.0

    def test_all_confidences_at_point_15(self):
        # two classes cannot put max below 0.5, use four
        row = [0.15, 0.15, 0.15, 0.55]
        probs = np.array([row, row])
        hist = fl.confidence_histogram(probs, np.array([0, 1]))
        assert hist[5] == 100.0

    def test_uniform_rows_fall_in_bin_of_one_over_c(self):
        probs = np.full((6, 4), 0.25)
        hist = fl.confidence_histogram(probs, np.arange(6))
        assert hist[2] == 100.0  # 0.25 in [0.2, 0.3)

    def test_lower_edge_inclusive_upper_exclusive(self):
        probs = np.array([
            [0.30, 0.25, 0.25, 0.20],   # exactly 0.3 -> bin 3
            [0.299, 0.235, 0.233, 0.233],  # just below -> bin 2
        ])
        hist = fl.confidence_histogram(probs, np.array([0, 1]))
        assert hist[3] == 50.0 and hist[2] == 50.0

    def test_last_bin_closed_at_one(self):
        probs = np.array([[1.0, 0.0], [0.95, 0.05]])
        hist = fl.confidence_histogram(probs, np.array([0, 1]))
        assert hist[9] == 100.0

    def test_percentages_sum_to_100(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            raw = rng.random((rng.integers(1, 40), rng.integers(2, 7)))
            probs = raw / raw.sum(axis=1, keepdims=True)
            hist = fl.confidence_histogram(probs, np.arange(probs.shape[0]))
            assert abs(hist.sum() - 100.0) < 1e-9

    def test_custom_bin_count(self):
        probs = np.array([[0.6, 0.4]])
        hist = fl.confidence_histogram(probs, np.array([0]), bins=4)
        assert hist.shape == (4,) and hist[2] == 100.0  # 0.6 in [0.5, 0.75)

    def test_rejects_non_stochastic_rows(self):
        with pytest.raises(ValueError, match="sum to 1"):
            fl.confidence_histogram(np.array([[0.9, 0.9]]), np.array([0]))

    def test_rejects_empty_unlabeled(self):
        with pytest.raises(ValueError, match="empty"):
            fl.confidence_histogram(np.array([[1.0, 0.0]]), np.array([], dtype=int))


class TestPseudoLabelDistribution:
    def test_all_one_class(self):
        assignment = fl.pseudo_labels(np.array([[0.9, 0.1]] * 5))
        dist = fl.pseudo_label_distribution(assignment, np.arange(5), 2)
        assert dist.tolist() == [100.0, 0.0]

    def test_balanced(self):
        probs = np.array([[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]])
        assignment = fl.pseudo_labels(probs)
        dist = fl.pseudo_label_distribution(assignment, np.arange(3), 3)
        assert_allclose(dist, [100 / 3] * 3)
        assert abs(dist.sum() - 100.0) < 1e-9

    def test_counts_only_unlabeled_nodes(self):
        probs = np.array([[0.9, 0.1], [0.9, 0.1], [0.1, 0.9]])
        assignment = fl.pseudo_labels(probs)
        dist = fl.pseudo_label_distribution(assignment, np.array([2]), 2)
        assert dist.tolist() == [0.0, 100.0]


class TestConfidenceAccuracyCorrelation:
    def test_all_correct_and_empty_bins(self):
        probs = np.array([[0.95, 0.05], [0.62, 0.38]])
        out = fl.confidence_accuracy_correlation(probs, np.array([0, 1]),
                                                 np.array([0, 0]))
        assert out[9] == 100.0 and out[6] == 100.0
        assert out[0] is None and out[5] is None

    def test_all_wrong(self):
        probs = np.array([[0.95, 0.05], [0.62, 0.38]])
        out = fl.confidence_accuracy_correlation(probs, np.array([0, 1]),
                                                 np.array([1, 1]))
        assert out[9] == 0.0 and out[6] == 0.0

    def test_mixed_bin(self):
        probs = np.array([[0.65, 0.35], [0.65, 0.35], [0.35, 0.65], [0.35, 0.65]])
        truth = np.array([0, 1, 1, 1])
        out = fl.confidence_accuracy_correlation(probs, np.arange(4), truth)
        assert out[6] == 75.0


class TestErrorRateAndBound:
    def test_error_rate_extremes(self):
        probs = np.array([[0.9, 0.1]] * 4)
        assignment = fl.pseudo_labels(probs)
        unlabeled = np.arange(4)
        assert fl.empirical_error_rate(assignment, unlabeled, np.zeros(4, int)) == 0.0
        assert fl.empirical_error_rate(assignment, unlabeled, np.ones(4, int)) == 1.0

    def test_error_rate_counts(self):
        probs = np.eye(2)[[0, 0, 0, 1, 1, 1, 1, 1, 1, 1]] * 0.8 + 0.1
        assignment = fl.pseudo_labels(probs)
        truth = np.array([0, 0, 1, 1, 1, 1, 1, 0, 1, 0])
        rate = fl.empirical_error_rate(assignment, np.arange(10), truth)
        assert rate == pytest.approx(0.3)

    def test_bound_arithmetic(self):
        assert fl.gradient_gap_bound(1.0, 100, 10, 0.5) == 10.0
        assert fl.gradient_gap_bound(1.0, 100, 10, 0.0) == 0.0
        assert fl.gradient_gap_bound(2.0, 50, 50, 1.0) == 4.0

    def test_bound_validation(self):
        with pytest.raises(ValueError, match="num_labeled"):
            fl.gradient_gap_bound(1.0, 10, 0, 0.5)
        with pytest.raises(ValueError, match="theta"):
            fl.gradient_gap_bound(-1.0, 10, 1, 0.5)
        with pytest.raises(ValueError, match="err_prob"):
            fl.gradient_gap_bound(1.0, 10, 1, 1.5)

    def test_bound_monotonicity(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            theta, err = rng.uniform(0, 5), rng.uniform(0, 1)
            u, ell = int(rng.integers(0, 500)), int(rng.integers(1, 50))
            base = fl.gradient_gap_bound(theta, u, ell, err)
            assert fl.gradient_gap_bound(theta + 1, u, ell, err) >= base
            assert fl.gradient_gap_bound(theta, u + 10, ell, err) >= base
            assert fl.gradient_gap_bound(theta, u, ell + 5, err) <= base
            assert fl.gradient_gap_bound(theta, u, ell, min(1.0, err + 0.1)) >= base


class TestEstimateTheta:
    def test_matches_per_node_probes_on_fresh_tapes(self):
        import fewlabel.autodiff as ad
        import fewlabel.models as mdl
        from fewlabel.pseudo import _ce_sum

        rng = np.random.default_rng(5)
        graph = build_random_graph(rng, n=7, d=4, c=3)
        params = fl.init_params(fl.ModelConfig(hidden=6), 4, 3,
                                np.random.default_rng(1))
        lap = fl.normalized_laplacian(graph)
        nodes = np.arange(7)
        labels = graph.labels
        norms = []
        for j in nodes:
            tape = ad.Tape()
            F = mdl.forward(tape, lap, graph.features, params, training=False)
            loss = _ce_sum(F, np.array([j]), np.array([labels[j]]), 3)
            grads = ad.backward(tape, loss)
            norms.append(np.sqrt(sum((g * g).sum() for g in grads)))
        got = fl.estimate_theta(graph, params, nodes, labels, subsample=0)
        assert got == max(norms)

    def test_subsample_is_deterministic_under_rng(self):
        rng = np.random.default_rng(5)
        graph = build_random_graph(rng, n=9, d=4, c=3)
        params = fl.init_params(fl.ModelConfig(hidden=6), 4, 3,
                                np.random.default_rng(1))
        a = fl.estimate_theta(graph, params, np.arange(9), graph.labels,
                              subsample=3, rng=np.random.default_rng(7))
        b = fl.estimate_theta(graph, params, np.arange(9), graph.labels,
                              subsample=3, rng=np.random.default_rng(7))
        full = fl.estimate_theta(graph, params, np.arange(9), graph.labels,
                                 subsample=0)
        assert a == b
        assert a <= full

    def test_empty_nodes_rejected(self):
        rng = np.random.default_rng(5)
        graph = build_random_graph(rng, n=7, d=4, c=3)
        params = fl.init_params(fl.ModelConfig(hidden=6), 4, 3,
                                np.random.default_rng(1))
        with pytest.raises(ValueError, match="empty"):
            fl.estimate_theta(graph, params, np.array([], dtype=int),
                              np.array([], dtype=int))


# ---------------------------------------------------------------------------
# experiment config plumbing
# ---------------------------------------------------------------------------

class TestExperimentConfig:
    def test_validation(self):
        with pytest.raises(fl.ConfigError, match="per_class"):
            fl.ExperimentConfig(dataset="x", per_class=0).validate()
        with pytest.raises(fl.ConfigError, match="num_splits"):
            fl.ExperimentConfig(dataset="x", num_splits=0).validate()
        with pytest.raises(fl.ConfigError, match="workers"):
            fl.ExperimentConfig(dataset="x", workers=-1).validate()
        with pytest.raises(fl.ConfigError, match="dataset"):
            fl.ExperimentConfig(dataset="").validate()

    def test_nested_validation_becomes_config_error(self):
        cfg = fl.ExperimentConfig(dataset="x",
                                  pseudo=fl.PseudoConfig(threshold=2.0))
        with pytest.raises(fl.ConfigError):
            cfg.validate()

    def test_effective_pseudo_composition(self):
        cfg = fast_config()
        assert cfg.effective_pseudo() == cfg.pseudo
        off = fl.apply_overrides(cfg, {"supervised_only": True})
        assert off.effective_pseudo() is None
        noneg = fl.apply_overrides(cfg, {"disable_negative": True}).effective_pseudo()
        assert noneg.negative_weight == 0.0
        assert noneg.num_positives == 0 and noneg.num_negatives == 0
        stripped = fl.apply_overrides(cfg, {
            "disable_negative": True, "disable_balancing": True,
            "disable_adaptive": True,
        }).effective_pseudo()
        assert not stripped.balancing and not stripped.adaptive

    def test_apply_overrides_routes_and_rejects(self):
        cfg = fast_config()
        out = fl.apply_overrides(cfg, {
            "threshold": 0.7, "dropout": 0.0, "kind": "dagnn", "depth": 5,
            "sample_sizes": (2, 5), "per_class": 3,
        })
        assert out.pseudo.threshold == 0.7
        assert out.train.dropout == 0.0
        assert out.model.kind == "dagnn" and out.model.depth == 5
        assert out.pseudo.num_positives == 2 and out.pseudo.num_negatives == 5
        assert out.per_class == 3
        assert cfg.pseudo.threshold == 0.4  # original untouched
        with pytest.raises(fl.ConfigError, match="unknown override"):
            fl.apply_overrides(cfg, {"learning_rate": 0.1})

    def test_config_from_dict_round_trip(self):
        cfg = fast_config()
        rebuilt = fl.config_from_dict(fl.config_to_dict(cfg))
        assert rebuilt == cfg

    def test_config_from_dict_errors(self):
        with pytest.raises(fl.ConfigError, match="'threshol'"):
            fl.config_from_dict({"dataset": "x", "pseudo": {"threshol": 0.2}})
        with pytest.raises(fl.ConfigError, match="'datasets'"):
            fl.config_from_dict({"datasets": "x"})
        with pytest.raises(fl.ConfigError, match="dataset path"):
            fl.config_from_dict({"per_class": 1})
        with pytest.raises(fl.ConfigError, match="object"):
            fl.config_from_dict([1, 2])

    def test_tuned_defaults_lookup(self):
        row = fl.tuned_defaults("synthetic", "gcn", 1)
        assert row["threshold"] == 0.4
        assert fl.tuned_defaults("synthetic", "gcn", 7) is None
        # returned dict is a copy
        row["threshold"] = 0.9
        assert fl.tuned_defaults("synthetic", "gcn", 1)["threshold"] == 0.4


class TestRowNormalize:
    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        graph = build_random_graph(rng, n=10, d=6, c=3)
        out = fl.row_normalize_features(graph)
        sums = np.asarray(out.features.sum(axis=1)).ravel()
        assert_allclose(sums, 1.0, rtol=1e-12)
        assert out.num_edges == graph.num_edges

    def test_zero_rows_stay_zero_and_original_untouched(self):
        feats = np.array([[2.0, 2.0], [0.0, 0.0], [1.0, 0.0]])
        graph = fl.Graph.from_parts(3, [[0, 1], [1, 2]], feats, [0, 1, 0], 2)
        out = fl.row_normalize_features(graph)
        assert out.features.toarray()[1].tolist() == [0.0, 0.0]
        assert out.features.toarray()[0].tolist() == [0.5, 0.5]
        assert graph.features.toarray()[0].tolist() == [2.0, 2.0]


# ---------------------------------------------------------------------------
# benchmark runner
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def synthetic_graph():
    return require_bundle(SYNTHETIC_BUNDLE, "synthetic")


class TestRunBenchmark:
    def test_single_split_std_zero(self, synthetic_graph):
        report = fl.run_benchmark(fast_config(num_splits=1), graph=synthetic_graph)
        assert len(report.outcomes) == 1
        assert report.std == 0.0
        assert report.mean == report.outcomes[0].test_acc

    def test_mean_recomputable_and_seeds(self, synthetic_graph):
        report = fl.run_benchmark(fast_config(base_seed=11), graph=synthetic_graph)
        assert report.mean == float(np.mean(report.accuracies))
        assert report.std == float(np.std(report.accuracies, ddof=1))
        assert [o.split_seed for o in report.outcomes] == [11, 12]
        assert [o.run_seed for o in report.outcomes] == [
            fl.derive_seed(11, "init"), fl.derive_seed(12, "init")]

    def test_worker_pool_size_does_not_change_report(self, synthetic_graph):
        seq = fl.run_benchmark(fast_config(workers=1), graph=synthetic_graph)
        par = fl.run_benchmark(fast_config(workers=2), graph=synthetic_graph)
        assert seq.accuracies == par.accuracies
        assert [o.val_acc for o in seq.outcomes] == [o.val_acc for o in par.outcomes]
        assert seq.mean == par.mean

    def test_failed_split_is_recorded_and_others_continue(self, synthetic_graph,
                                                          monkeypatch):
        import fewlabel.bench as bench

        real_train = bench.train
        bad_seed = fl.derive_seed(1, "init")

        def flaky(graph, split, model, pseudo, config, seed, **kw):
            if seed == bad_seed:
                raise RuntimeError("boom")
            return real_train(graph, split, model, pseudo, config, seed, **kw)

        monkeypatch.setattr(bench, "train", flaky)
        report = fl.run_benchmark(fast_config(num_splits=3, workers=1),
                                  graph=synthetic_graph)
        assert report.num_failed == 1
        assert report.outcomes[1].status == "failed"
        assert "RuntimeError: boom" in report.outcomes[1].error
        assert report.outcomes[0].status == "ok"
        assert report.outcomes[2].status == "ok"
        assert len(report.accuracies) == 2

    def test_all_splits_fail_on_undersized_graph(self, tmp_path):
        rng = np.random.default_rng(0)
        graph = build_random_graph(rng, n=40, d=5, c=3)
        fl.save_bundle(graph, str(tmp_path / "tiny"), name="tiny")
        cfg = dataclasses.replace(fast_config(num_splits=2),
                                  dataset=str(tmp_path / "tiny"))
        report = fl.run_benchmark(cfg)
        assert report.num_failed == 2
        assert np.isnan(report.mean)
        assert all("ValueError" in o.error for o in report.outcomes)

    def test_report_renderings(self, synthetic_graph):
        report = fl.run_benchmark(fast_config(num_splits=1), graph=synthetic_graph)
        payload = json.loads(report.to_json())
        assert payload["dataset_name"] == "synthetic"
        assert payload["config"]["train"]["max_epochs"] == 25
        assert payload["config"]["row_normalize"] is False
        assert len(payload["splits"]) == 1
        table = report.render_table()
        assert "mean" in table and "synthetic" in table
        csv = report.csv_series()
        assert csv.startswith("split_index,")
        assert len(csv.strip().splitlines()) == 2

    def test_write_report(self, synthetic_graph, tmp_path):
        report = fl.run_benchmark(fast_config(num_splits=1), graph=synthetic_graph)
        paths = fl.write_report(report, str(tmp_path / "out"))
        assert [p.split(".")[-1] for p in paths] == ["json", "txt", "csv"]
        for p in paths:
            assert open(p).read()


class TestAblationComposition:
    def test_disabling_everything_reproduces_baseline_loss(self):
        """Toggled-off combined objective == plain pseudo-label objective."""
        import fewlabel.autodiff as ad

        graph = build_random_graph(np.random.default_rng(2), n=12, d=5, c=3)
        labeled = np.array([0, 5])
        unlabeled = np.setdiff1d(np.arange(12), labeled)
        rng = np.random.default_rng(9)
        raw = rng.random((12, 3))
        probs = raw / raw.sum(axis=1, keepdims=True)
        weight = 0.7

        assignment = fl.pseudo_labels(probs)
        aset = fl.AdaptiveSet(unlabeled, assignment.labels[unlabeled])
        aset = fl.balancing_factors(aset, False)

        tape1 = ad.Tape()
        F1 = tape1.leaf(probs)
        combined = fl.combined_loss(F1, labeled, graph.labels, aset,
                                    _empty_sample(), None, weight, 0.0, 3)
        tape2 = ad.Tape()
        F2 = tape2.leaf(probs)
        baseline = fl.baseline_pseudo_loss(F2, labeled, graph.labels, unlabeled,
                                           assignment, weight, 3)
        assert abs(combined.value[0, 0] - baseline.value[0, 0]) < 1e-12
        g1 = ad.backward(tape1, combined)[0]
        g2 = ad.backward(tape2, baseline)[0]
        assert np.max(np.abs(g1 - g2)) < 1e-12

    def test_trained_toggles_reduce_to_baseline_trajectory(self, synthetic_graph):
        """disable_adaptive+balancing+negative trains the plain objective."""
        cfg = fast_config(num_splits=1)
        cfg = fl.apply_overrides(cfg, {"disable_negative": True,
                                       "disable_balancing": True,
                                       "disable_adaptive": True})
        report = fl.run_benchmark(cfg, graph=synthetic_graph)
        assert report.outcomes[0].status == "ok"
        effective = cfg.effective_pseudo()
        assert not effective.adaptive and not effective.balancing
        assert effective.num_positives == 0


# ---------------------------------------------------------------------------
# diagnostics runner
# ---------------------------------------------------------------------------

class TestRunDiagnostics:
    def test_trace_contents(self, synthetic_graph):
        cfg = fast_config(num_splits=1)
        result, trace = fl.run_diagnostics(cfg, graph=synthetic_graph,
                                           trace_every=10, theta_subsample=8)
        assert trace.epochs == [1, 10, 20]
        assert result.epochs_run == 25
        for hist in trace.histograms:
            assert abs(sum(hist) - 100.0) < 1e-9
        for dist in trace.label_distributions:
            assert abs(sum(dist) - 100.0) < 1e-9
        assert all(0.0 <= e <= 1.0 for e in trace.error_rates)
        # running max never decreases
        assert trace.theta_estimates == sorted(trace.theta_estimates)
        for bound, theta, err in zip(trace.gap_bounds, trace.theta_estimates,
                                     trace.error_rates):
            expect = 2.0 * theta * trace.num_unlabeled / trace.num_labeled * err
            assert bound == pytest.approx(expect, rel=1e-12)
        assert trace.num_labeled == 4
        csv = trace.csv_series()
        assert csv.splitlines()[0].startswith("epoch,error_rate")
        assert len(csv.strip().splitlines()) == 4
        json.loads(trace.to_json())

    def test_callback_does_not_change_results(self, synthetic_graph):
        cfg = fast_config(num_splits=1)
        plain = fl.run_benchmark(cfg, graph=synthetic_graph)
        traced, _ = fl.run_diagnostics(cfg, graph=synthetic_graph, trace_every=5)
        assert traced.test_acc == plain.outcomes[0].test_acc
        assert traced.best_epoch == plain.outcomes[0].best_epoch


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

class TestSweep:
    def test_expand_grid(self):
        combos = fl.expand_grid({"a": [1, 2], "b": [True]})
        assert combos == [{"a": 1, "b": True}, {"a": 2, "b": True}]
        with pytest.raises(fl.ConfigError, match="non-empty"):
            fl.expand_grid({})
        with pytest.raises(fl.ConfigError, match="'a'"):
            fl.expand_grid({"a": []})

    def test_single_config_wins(self, synthetic_graph):
        cfg = fast_config()
        result = fl.sweep(cfg, {"threshold": [0.4]}, tuning_splits=1,
                          graph=synthetic_graph)
        assert result.winner.overrides == {"threshold": 0.4}
        assert len(result.entries) == 1
        assert result.winner_config.num_splits == cfg.num_splits
        assert result.winner_config.base_seed == cfg.base_seed

    def test_winner_has_best_validation_accuracy(self, synthetic_graph):
        cfg = fast_config()
        result = fl.sweep(cfg, {"max_epochs": [2, 25]}, tuning_splits=2,
                          graph=synthetic_graph)
        vals = [e.mean_val_acc for e in result.entries]
        assert vals == sorted(vals, reverse=True)
        assert result.winner.overrides == {"max_epochs": 25}
        assert result.winner_config.train.max_epochs == 25

    def test_tie_keeps_earlier_grid_entry(self, synthetic_graph):
        cfg = fast_config()
        result = fl.sweep(cfg, {"threshold": [0.4, 0.4]}, tuning_splits=1,
                          graph=synthetic_graph)
        assert result.entries[0].mean_val_acc == result.entries[1].mean_val_acc
        assert result.entries[0] is result.winner

    def test_tuning_seeds_disjoint_from_evaluation(self):
        cfg = fast_config(base_seed=0)
        tuning_base = fl.derive_seed(0, "tuning")
        assert tuning_base > cfg.num_splits  # cannot collide with 0..num_splits

    def test_leaderboard_render(self, synthetic_graph):
        cfg = fast_config()
        result = fl.sweep(cfg, {"threshold": [0.4]}, tuning_splits=1,
                          graph=synthetic_graph)
        board = result.render_leaderboard()
        assert "rank" in board and "threshold" in board
        json.loads(result.to_json())


# ---------------------------------------------------------------------------
# CLI subprocess tests
# ---------------------------------------------------------------------------

def run_cli(*argv, cwd=None):
    return subprocess.run([sys.executable, "-m", "fewlabel.cli", *argv],
                          capture_output=True, text=True, cwd=cwd, timeout=300)


@pytest.fixture(scope="module")
def cli_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "config.json"
    path.write_text(json.dumps({
        "dataset": SYNTHETIC_BUNDLE,
        "pseudo": {"threshold": 0.4, "negative_weight": 0.1,
                   "num_positives": 5, "num_negatives": 2},
        "train": {"max_epochs": 20, "dropout": 0.5, "l2_rate": 5e-4,
                  "early_stopping": False},
        "num_splits": 1,
    }))
    return str(path)


class TestCli:
    def test_bench_smoke(self, cli_config, tmp_path):
        proc = run_cli("bench", "--config", cli_config, "--out", str(tmp_path))
        assert proc.returncode == 0, proc.stderr
        assert "mean" in proc.stdout
        assert (tmp_path / "report.json").exists()
        payload = json.loads((tmp_path / "report.json").read_text())
        assert payload["splits"][0]["status"] == "ok"

    def test_bench_flag_overrides(self, cli_config):
        proc = run_cli("bench", "--config", cli_config, "--seed", "5",
                       "--splits", "1")
        assert proc.returncode == 0, proc.stderr
        assert "seed" in proc.stdout
        assert " 5 " in proc.stdout.splitlines()[3]

    def test_exit_2_on_bad_flag_value(self):
        proc = run_cli("bench", "--dataset", SYNTHETIC_BUNDLE, "--per-class", "0")
        assert proc.returncode == 2
        assert "config error" in proc.stderr

    def test_exit_2_on_missing_dataset_flag(self):
        proc = run_cli("bench")
        assert proc.returncode == 2
        assert "config error" in proc.stderr

    def test_exit_2_on_unknown_config_key(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dataset": SYNTHETIC_BUNDLE, "typo_key": 1}))
        proc = run_cli("bench", "--config", str(path))
        assert proc.returncode == 2
        assert "typo_key" in proc.stderr

    def test_exit_2_on_missing_bundle(self):
        proc = run_cli("bench", "--dataset", "/does/not/exist")
        assert proc.returncode == 2
        assert "bundle error" in proc.stderr

    def test_exit_2_on_tuned_without_row(self):
        proc = run_cli("bench", "--dataset", SYNTHETIC_BUNDLE, "--per-class", "7",
                       "--tuned")
        assert proc.returncode == 2
        assert "tuned" in proc.stderr

    def test_exit_1_on_failed_splits(self, tmp_path):
        rng = np.random.default_rng(0)
        graph = build_random_graph(rng, n=40, d=5, c=3)
        fl.save_bundle(graph, str(tmp_path / "tiny"), name="tiny")
        proc = run_cli("bench", "--dataset", str(tmp_path / "tiny"),
                       "--splits", "2")
        assert proc.returncode == 1
        assert "failed 2/2" in proc.stdout

    def test_sweep_smoke(self, cli_config, tmp_path):
        grid = tmp_path / "grid.json"
        grid.write_text(json.dumps({"threshold": [0.4, 0.9]}))
        proc = run_cli("sweep", "--config", cli_config, "--grid", str(grid),
                       "--tuning-splits", "1", "--out", str(tmp_path))
        assert proc.returncode == 0, proc.stderr
        assert "rank" in proc.stdout
        assert (tmp_path / "sweep.json").exists()

    def test_sweep_rejects_empty_grid(self, cli_config, tmp_path):
        grid = tmp_path / "grid.json"
        grid.write_text("{}")
        proc = run_cli("sweep", "--config", cli_config, "--grid", str(grid))
        assert proc.returncode == 2

    def test_diagnose_smoke(self, cli_config, tmp_path):
        proc = run_cli("diagnose", "--config", cli_config, "--trace-every", "10",
                       "--theta-subsample", "4", "--out", str(tmp_path))
        assert proc.returncode == 0, proc.stderr
        assert "best epoch" in proc.stdout
        assert (tmp_path / "diagnostics.csv").exists()

    def test_inspect_bundle(self):
        proc = run_cli("inspect-bundle", "--dataset", SYNTHETIC_BUNDLE)
        assert proc.returncode == 0
        assert "nodes:     1800" in proc.stdout
        assert "classes:   4" in proc.stdout

    def test_inspect_bundle_invalid(self, tmp_path):
        (tmp_path / "meta.json").write_text("{broken")
        proc = run_cli("inspect-bundle", "--dataset", str(tmp_path))
        assert proc.returncode == 2
