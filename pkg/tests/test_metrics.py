import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lerl import aggregate_curves, comparative_report, growth_rate
from lerl.config import ConfigError
from lerl.logs import (GENERATION_HEADER, GENERATION_SCHEMA, ITERATION_HEADER,
                       ITERATION_SCHEMA, GenerationRecord, IterationRecord,
                       read_generation_csv, read_iteration_csv,
                       write_generation_csv, write_iteration_csv)
from lerl.metrics import (load_eval_matrix, load_generation_bests,
                          read_curves_csv, write_curves_csv)


def brute_force_curves(scores, window):
    """Straight-line reimplementation used as the aggregation oracle."""
    agents = len(scores)
    iterations = len(scores[0])
    out = []
    for i in range(iterations):
        column = sorted(scores[a][i] for a in range(agents))
        best = column[-1]
        mid = agents // 2
        if agents % 2:
            median = column[mid]
        else:
            median = (column[mid - 1] + column[mid]) / 2
        mean = sum(scores[a][i] for a in range(agents)) / agents
        lo = max(0, i - window + 1)
        means = []
        for j in range(lo, i + 1):
            means.append(sum(scores[a][j] for a in range(agents)) / agents)
        out.append((best, median, mean, sum(means) / len(means)))
    return out


def fabricate_run(run_dir, generation_bests, agents=2, per_iteration=None,
                  env=None, training=None):
    """Write a minimal synthetic run directory for report tests."""
    run_dir.mkdir(parents=True, exist_ok=True)
    config = {
        "env": env or {"name": "gridworld", "side": 3},
        "population": {"size": agents, "elite": 1, "general": agents - 1,
                       "mutation": 0, "crossover": 0},
        "training": training or {"steps_per_iteration": 10,
                                 "evolution_cycle": 1,
                                 "total_iterations": len(generation_bests),
                                 "eval_episodes": 1, "workers": 0},
        "master_seed": 0,
    }
    (run_dir / "config.json").write_text(json.dumps(config))
    generation_rows = []
    for g, best in enumerate(generation_bests):
        for agent_id in range(agents):
            score = best if agent_id == 0 else best - 1.0
            generation_rows.append(GenerationRecord(
                g, agent_id, score, 0.5, 0.5, 0.5, agent_id + 1, "elite", 0.1))
    write_generation_csv(run_dir / "per_generation.csv", generation_rows)
    if per_iteration is None:
        per_iteration = [[best for best in generation_bests]
                         for _ in range(agents)]
    iteration_rows = []
    for agent_id, row in enumerate(per_iteration):
        for iteration, score in enumerate(row):
            iteration_rows.append(IterationRecord(iteration, agent_id, 0.0,
                                                  float(score), 0.05))
    iteration_rows.sort(key=lambda r: (r.iteration, r.agent_id))
    write_iteration_csv(run_dir / "per_iteration.csv", iteration_rows)


class TestAggregateCurves:
    def test_order_statistics(self):
        points = aggregate_curves([[1.0], [5.0], [3.0]], smooth_window=1)
        assert points[0].best == 5.0
        assert points[0].median == 3.0
        assert points[0].mean == 3.0

    def test_window_one_smoothed_equals_mean(self):
        scores = np.random.default_rng(0).normal(size=(4, 20))
        points = aggregate_curves(scores, smooth_window=1)
        for p in points:
            assert p.smoothed_mean == p.mean

    def test_trailing_average(self):
        # Single agent, means (1, 2, 3, 4), window 2.
        points = aggregate_curves([[1.0, 2.0, 3.0, 4.0]], smooth_window=2)
        assert [p.smoothed_mean for p in points] == [1.0, 1.5, 2.5, 3.5]

    def test_even_population_median(self):
        points = aggregate_curves([[1.0], [2.0], [3.0], [10.0]], 1)
        assert points[0].median == 2.5

    def test_best_dominates(self):
        rng = np.random.default_rng(1)
        points = aggregate_curves(rng.normal(size=(5, 30)), 3)
        for p in points:
            assert p.best >= p.median
            assert p.best >= p.mean

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate_curves(np.zeros((0, 0)), 1)
        with pytest.raises(ValueError):
            aggregate_curves([[1.0]], 0)

    @given(st.integers(1, 7), st.integers(1, 25), st.integers(1, 10),
           st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_matches_brute_force(self, agents, iterations, window, seed):
        scores = np.random.default_rng(seed).normal(size=(agents, iterations))
        points = aggregate_curves(scores, window)
        oracle = brute_force_curves(scores.tolist(), window)
        for p, (best, median, mean, smoothed) in zip(points, oracle):
            assert p.best == best
            assert p.median == pytest.approx(median, abs=1e-12)
            assert p.mean == pytest.approx(mean, abs=1e-12)
            assert p.smoothed_mean == pytest.approx(smoothed, abs=1e-12)


class TestGrowthRate:
    def test_substitution(self):
        assert growth_rate([10.0, 12.0, 12.0]) == pytest.approx([1.2, 1.0])

    def test_constant(self):
        assert growth_rate([7.0, 7.0, 7.0, 7.0]) == [1.0, 1.0, 1.0]

    def test_zero_denominator_sentinel(self):
        assert growth_rate([0.0, 5.0]) == [None]

    def test_needs_two_generations(self):
        with pytest.raises(ValueError):
            growth_rate([1.0])

    @given(st.lists(st.floats(min_value=-100, max_value=100,
                              allow_nan=False), min_size=2, max_size=30))
    @settings(max_examples=100, deadline=None)
    def test_matches_plain_division(self, bests):
        rates = growth_rate(bests)
        for g in range(1, len(bests)):
            if bests[g - 1] == 0.0:
                assert rates[g - 1] is None
            else:
                assert rates[g - 1] == bests[g] / bests[g - 1]


class TestCsvRoundTrips:
    def test_iteration_records(self, tmp_path):
        records = [IterationRecord(0, 0, 0.5, 1.25, 1.0),
                   IterationRecord(0, 1, float("nan"), -0.01, 0.9995),
                   IterationRecord(1, 0, 1 / 3, 0.99, 0.05)]
        path = tmp_path / "it.csv"
        write_iteration_csv(path, records)
        loaded = read_iteration_csv(path)
        for a, b in zip(records, loaded):
            assert a.iteration == b.iteration and a.agent_id == b.agent_id
            assert a.eval_score == b.eval_score and a.epsilon == b.epsilon
            assert a.train_return == b.train_return or (
                np.isnan(a.train_return) and np.isnan(b.train_return))
        first = path.read_text().splitlines()
        assert first[0] == ITERATION_SCHEMA
        assert first[1].split(",") == ITERATION_HEADER

    def test_generation_records(self, tmp_path):
        records = [GenerationRecord(0, 0, 10.0, 1.0, 0.2, 0.6, 1, "elite", 0.2),
                   GenerationRecord(0, 1, 1e-17, 0.0, 0.9, 0.45, 2,
                                    "crossover", 0.2)]
        path = tmp_path / "gen.csv"
        write_generation_csv(path, records)
        assert read_generation_csv(path) == records
        first = path.read_text().splitlines()
        assert first[0] == GENERATION_SCHEMA
        assert first[1].split(",") == GENERATION_HEADER

    def test_curve_points(self, tmp_path):
        points = aggregate_curves(np.random.default_rng(2).normal(size=(3, 8)),
                                  smooth_window=4)
        path = tmp_path / "curves.csv"
        write_curves_csv(path, points)
        assert read_curves_csv(path) == points

    def test_schema_line_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("iteration,agent_id\n")
        with pytest.raises(ValueError):
            read_iteration_csv(path)


class TestComparativeReport:
    def test_self_comparison_all_ratios_one(self, tmp_path):
        fabricate_run(tmp_path / "a", [1.0, 2.0, 3.0])
        fabricate_run(tmp_path / "b", [1.0, 2.0, 3.0])
        document = comparative_report(tmp_path / "a", tmp_path / "b", 2,
                                      tmp_path / "report")
        assert document["best_ratio"] == [1.0, 1.0, 1.0]
        assert (tmp_path / "report" / "summary.json").exists()
        assert (tmp_path / "report" / "lerl_curves.csv").exists()
        assert (tmp_path / "report" / "baseline_curves.csv").exists()
        assert (tmp_path / "report" / "generation_ratios.csv").exists()

    def test_baseline_better_everywhere(self, tmp_path):
        fabricate_run(tmp_path / "a", [1.0, 2.0, 3.0])
        fabricate_run(tmp_path / "b", [2.0, 4.0, 6.0])
        document = comparative_report(tmp_path / "a", tmp_path / "b", 1,
                                      tmp_path / "report")
        assert all(r < 1.0 for r in document["best_ratio"])

    def test_rise_then_fall_shape(self, tmp_path):
        lerl_bests = [1.0, 2.0, 4.0, 4.4, 4.4, 4.4]
        base_bests = [1.0, 1.2, 1.5, 2.5, 3.5, 4.4]
        fabricate_run(tmp_path / "a", lerl_bests)
        fabricate_run(tmp_path / "b", base_bests)
        document = comparative_report(tmp_path / "a", tmp_path / "b", 1,
                                      tmp_path / "report")
        ratios = document["best_ratio"]
        peak = int(np.argmax(ratios))
        assert 0 < peak < len(ratios) - 1
        assert all(ratios[i] <= ratios[i + 1] for i in range(peak))
        assert all(ratios[i] >= ratios[i + 1]
                   for i in range(peak, len(ratios) - 1))

    def test_zero_denominator_written_as_sentinel(self, tmp_path):
        fabricate_run(tmp_path / "a", [1.0, 2.0])
        fabricate_run(tmp_path / "b", [0.0, 2.0])
        document = comparative_report(tmp_path / "a", tmp_path / "b", 1,
                                      tmp_path / "report")
        assert document["best_ratio"][0] is None
        text = (tmp_path / "report" / "generation_ratios.csv").read_text()
        assert "undefined" in text

    def test_mismatched_configs_list_keys(self, tmp_path):
        fabricate_run(tmp_path / "a", [1.0, 2.0])
        fabricate_run(tmp_path / "b", [1.0, 2.0],
                      env={"name": "gridworld", "side": 5})
        with pytest.raises(ConfigError, match="env.side"):
            comparative_report(tmp_path / "a", tmp_path / "b", 1,
                               tmp_path / "report")

    def test_summary_fields(self, tmp_path):
        fabricate_run(tmp_path / "a", [1.0, 3.0],
                      per_iteration=[[1.0, 3.0], [0.0, 1.0]])
        fabricate_run(tmp_path / "b", [1.0, 2.0],
                      per_iteration=[[1.0, 2.0], [0.5, 1.5]])
        document = comparative_report(tmp_path / "a", tmp_path / "b", 1,
                                      tmp_path / "report")
        lerl = document["summary"]["lerl"]
        assert lerl["final_best"] == 3.0
        assert lerl["final_median"] == 2.0
        # Means are (0.5, 2.0); trapezoid area = 1.25.
        assert lerl["mean_auc"] == pytest.approx(1.25)


class TestRunDirectoryLoaders:
    def test_eval_matrix_shape(self, tmp_path):
        fabricate_run(tmp_path / "a", [1.0, 2.0, 3.0], agents=3)
        matrix = load_eval_matrix(tmp_path / "a")
        assert matrix.shape == (3, 3)

    def test_generation_bests(self, tmp_path):
        fabricate_run(tmp_path / "a", [1.0, 5.0, 2.0], agents=2)
        assert load_generation_bests(tmp_path / "a") == [1.0, 5.0, 2.0]
