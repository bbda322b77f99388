"""Metrics, ranked retrieval, and end-to-end decode scoring."""

import numpy as np
import pytest

from gedmatch.data import CorpusConfig, build_corpus, training_pairs
from gedmatch.graphs import NodeMatching, edit_cost, orient_pair, validate_matching
from gedmatch.metrics import (DecodeResult, MetricsReport, compute_metrics,
                              decode_pairs, evaluate, precision_at_k)
from gedmatch.nets import denoiser_config, init_net_params
from gedmatch.seeding import TAG_PARAMS, derive
from gedmatch.trainer import TrainConfig, init_state

from conftest import random_test_graph


class TestPrecisionAtK:
    def test_identical_vectors_hit_everything(self):
        values = [4.0, 1.0, 3.0, 2.0, 5.0]
        for k in range(1, 6):
            assert precision_at_k(values, values, k) == 1.0

    def test_disjoint_top_sets(self):
        # preds favour the front, labels favour the back
        preds = [1.0, 2.0, 3.0, 4.0]
        labels = [4.0, 3.0, 2.0, 1.0]
        assert precision_at_k(preds, labels, 2) == 0.0
        assert precision_at_k(preds, labels, 4) == 1.0

    def test_half_overlap(self):
        preds = [1.0, 2.0, 3.0, 4.0]
        labels = [1.0, 4.0, 2.0, 3.0]
        # pred top-2 {0,1}, label top-2 {0,2}
        assert precision_at_k(preds, labels, 2) == 0.5

    def test_ties_break_by_position_on_both_sides(self):
        preds = [1.0, 1.0, 0.0, 1.0]
        labels = [1.0, 1.0, 1.0, 0.0]
        # pred top-2 {2,0}, label top-2 {3,0}
        assert precision_at_k(preds, labels, 2) == 0.5
        # all-equal vectors fall back to index order on both sides
        flat = [2.0, 2.0, 2.0]
        assert precision_at_k(flat, flat, 2) == 1.0

    def test_k_bounds(self):
        with pytest.raises(ValueError):
            precision_at_k([1.0, 2.0], [1.0, 2.0], 0)
        with pytest.raises(ValueError):
            precision_at_k([1.0, 2.0], [1.0, 2.0], 3)

    def test_misaligned_vectors(self):
        with pytest.raises(ValueError):
            precision_at_k([1.0, 2.0, 3.0], [1.0, 2.0], 1)


class TestComputeMetrics:
    def test_perfect_predictions(self):
        rng = np.random.default_rng(0)
        labels = rng.permutation(25).astype(np.float64)
        report = compute_metrics(labels, labels, np.zeros(25, dtype=int))
        assert report.mae == 0.0
        assert report.accuracy == 1.0
        assert abs(report.spearman_rho - 1.0) < 1e-12
        assert abs(report.kendall_tau - 1.0) < 1e-12
        assert report.p_at_10 == 1.0
        assert report.p_at_20 == 1.0
        assert report.mean_time_s == 0.0

    def test_worked_pair(self):
        report = compute_metrics([3.0, 5.0], [3.0, 4.0], [0, 0],
                                 ranking_sizes=(1, 2))
        assert report.mae == pytest.approx(0.5, abs=1e-12)
        assert report.accuracy == pytest.approx(0.5, abs=1e-12)
        # both vectors increase, so the ranking is in full agreement
        assert abs(report.spearman_rho - 1.0) < 1e-12
        assert abs(report.kendall_tau - 1.0) < 1e-12

    def test_reversed_ranking(self):
        labels = np.arange(25, dtype=np.float64)
        preds = labels[::-1].copy()
        report = compute_metrics(preds, labels, np.zeros(25, dtype=int))
        assert abs(report.spearman_rho + 1.0) < 1e-12
        assert abs(report.kendall_tau + 1.0) < 1e-12
        assert report.p_at_10 == 0.0

    def test_tied_rank_values_use_average_ranks(self):
        # ranks (1.5, 1.5, 3) against (1, 2, 3): rho = 1.5/sqrt(1.5*2)
        report = compute_metrics([1.0, 1.0, 2.0], [1.0, 2.0, 3.0], [0, 0, 0],
                                 ranking_sizes=(1, 2))
        assert report.spearman_rho == pytest.approx(1.5 / np.sqrt(3.0),
                                                    abs=1e-12)
        # tau-b: 2 concordant, 0 discordant, one tie on each denominator leg
        assert report.kendall_tau == pytest.approx(2.0 / np.sqrt(6.0),
                                                   abs=1e-12)

    def test_groups_average_independently(self):
        preds = [0.0, 1.0, 2.0, 2.0, 1.0, 0.0]
        labels = [0.0, 1.0, 2.0, 0.0, 1.0, 2.0]
        groups = [0, 0, 0, 1, 1, 1]
        report = compute_metrics(preds, labels, groups, ranking_sizes=(1, 3))
        assert abs(report.spearman_rho) < 1e-12
        assert abs(report.kendall_tau) < 1e-12
        assert report.p_at_10 == 0.5
        assert report.p_at_20 == 1.0
        assert report.mae == pytest.approx(4.0 / 6.0, abs=1e-12)
        assert report.accuracy == pytest.approx(4.0 / 6.0, abs=1e-12)

    def test_flat_prediction_group_scores_zero(self):
        report = compute_metrics([1.0, 1.0, 1.0], [1.0, 2.0, 3.0], [0, 0, 0],
                                 ranking_sizes=(1, 2))
        assert report.spearman_rho == 0.0
        assert report.kendall_tau == 0.0

    def test_two_flat_sides_agree(self):
        report = compute_metrics([2.0, 2.0, 2.0], [5.0, 5.0, 5.0], [0, 0, 0],
                                 ranking_sizes=(1, 2))
        assert report.spearman_rho == 1.0
        assert report.kendall_tau == 1.0
        assert report.mae == 3.0
        assert report.accuracy == 0.0

    def test_order_of_pairs_does_not_matter(self):
        rng = np.random.default_rng(3)
        preds = rng.normal(size=8)
        labels = rng.normal(size=8)
        groups = np.array([0, 0, 0, 0, 1, 1, 1, 1])
        base = compute_metrics(preds, labels, groups, ranking_sizes=(1, 3))
        perm = rng.permutation(8)
        moved = compute_metrics(preds[perm], labels[perm], groups[perm],
                                ranking_sizes=(1, 3))
        for key, value in base.as_dict().items():
            assert moved.as_dict()[key] == pytest.approx(value, abs=1e-12)

    def test_times_average(self):
        report = compute_metrics([1.0, 2.0], [1.0, 2.0], [0, 0],
                                 times=[0.5, 1.5], ranking_sizes=(1, 2))
        assert report.mean_time_s == pytest.approx(1.0, abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            compute_metrics([1.0, 2.0], [1.0], [0, 0])
        with pytest.raises(ValueError):
            compute_metrics([], [], [])
        with pytest.raises(ValueError):
            compute_metrics([1.0, 2.0], [1.0, 2.0], [0, 0], times=[0.1])
        with pytest.raises(ValueError):
            # default cutoffs need at least 20 partners per group
            compute_metrics([1.0, 2.0], [1.0, 2.0], [0, 0])

    def test_report_round_trips_to_dict(self):
        report = MetricsReport(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)
        d = report.as_dict()
        assert d["mae"] == 0.1 and d["mean_time_s"] == 0.7
        assert len(d) == 7


def oriented_pairs(seed, count):
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < count:
        a = random_test_graph(rng, max_nodes=5)
        b = random_test_graph(rng, max_nodes=5)
        g1, g2, _ = orient_pair(a, b)
        pairs.append((g1, g2))
    return pairs


class TestDecodePairs:
    def setup_method(self):
        self.config = denoiser_config(num_labels=3)
        self.params = init_net_params(self.config, derive(7, TAG_PARAMS, 0))
        self.pairs = oriented_pairs(21, 4)

    def test_deterministic_under_seed(self):
        first = decode_pairs(self.params, self.config, self.pairs,
                             steps_total=40, hops=3, k=2, seed=11)
        second = decode_pairs(self.params, self.config, self.pairs,
                              steps_total=40, hops=3, k=2, seed=11)
        for a, b in zip(first, second):
            assert a.cost == b.cost
            assert np.array_equal(a.matching.entries, b.matching.entries)

    def test_more_candidates_never_hurt(self):
        narrow = decode_pairs(self.params, self.config, self.pairs,
                              steps_total=40, hops=3, k=1, seed=11)
        wide = decode_pairs(self.params, self.config, self.pairs,
                            steps_total=40, hops=3, k=4, seed=11)
        for a, b in zip(narrow, wide):
            assert b.cost <= a.cost

    def test_costs_are_witnessed_by_valid_matchings(self):
        results = decode_pairs(self.params, self.config, self.pairs,
                               steps_total=40, hops=3, k=2, seed=5)
        for (g1, g2), res in zip(self.pairs, results):
            assert res.matching.entries.shape == (g1.node_count, g2.node_count)
            assert validate_matching(res.matching).ok
            assert edit_cost(g1, g2, res.matching) == res.cost
            assert res.seconds >= 0.0
        assert [r.pair for r in results] == [0, 1, 2, 3]
        assert isinstance(results[0], DecodeResult)


@pytest.fixture(scope="module")
def tiny_eval(tmp_path_factory):
    config = CorpusConfig(n_graphs=8, max_nodes=5, num_labels=3,
                          partners=2, oracle_limit=10, seed=5)
    out = tmp_path_factory.mktemp("corpus")
    entries, records = build_corpus(config, out)
    pairs = training_pairs(entries, records)
    tc = TrainConfig(variant="plain", steps_total=50, reverse_hops=2,
                     sinkhorn_iters=3, candidates=2, batch_size=4,
                     epochs=1, anneal_epochs=1, seed=3)
    state = init_state(pairs, tc, num_labels=3)
    return entries, records, state


class TestEvaluate:
    def test_scores_every_labeled_test_pair(self, tiny_eval):
        entries, records, state = tiny_eval
        report, logs = evaluate(state, entries, records, split="test",
                                k=2, hops=2, seed=9, ranking_sizes=(1, 2))
        expected = [r for r in records
                    if r.split == "test" and r.kind != "none"]
        assert len(logs) == len(expected) > 0
        assert report.mae == pytest.approx(
            np.mean([abs(log["pred"] - log["label"]) for log in logs]))
        assert 0.0 <= report.accuracy <= 1.0
        assert report.mean_time_s > 0.0

    def test_predictions_never_beat_exact_labels(self, tiny_eval):
        entries, records, state = tiny_eval
        _, logs = evaluate(state, entries, records, split="test",
                           k=2, hops=2, seed=9, ranking_sizes=(1, 2))
        by_id = {e.id: e.graph for e in entries}
        for log in logs:
            if log["kind"] != "exact":
                continue
            # any feasible matching costs at least the true distance
            assert log["pred"] >= log["label"]

    def test_logged_mappings_witness_the_predictions(self, tiny_eval):
        entries, records, state = tiny_eval
        _, logs = evaluate(state, entries, records, split="test",
                           k=2, hops=2, seed=9, ranking_sizes=(1, 2))
        by_id = {e.id: e.graph for e in entries}
        for log in logs:
            g1 = by_id[log["g1"]]
            g2 = by_id[log["g2"]]
            m = NodeMatching.from_mapping(log["mapping"], g2.node_count)
            assert m.entries.shape == (g1.node_count, g2.node_count)
            assert validate_matching(m).ok
            assert edit_cost(g1, g2, m) == log["pred"]

    def test_val_split_and_determinism(self, tiny_eval):
        entries, records, state = tiny_eval
        r1, logs1 = evaluate(state, entries, records, split="val",
                             k=2, hops=2, seed=4, ranking_sizes=(1, 2))
        r2, logs2 = evaluate(state, entries, records, split="val",
                             k=2, hops=2, seed=4, ranking_sizes=(1, 2))
        assert [log["pred"] for log in logs1] == [log["pred"] for log in logs2]
        assert r1.mae == r2.mae

    def test_unknown_split_is_rejected(self, tiny_eval):
        entries, records, state = tiny_eval
        with pytest.raises(ValueError):
            evaluate(state, entries, records, split="nope")
