import json

import numpy as np
import pytest

from lerl import parse_config
from lerl.charts import render_charts
from lerl.cli import main
from lerl.config import ConfigError, load_run_config
from lerl.metrics import aggregate_curves


def base_config(**training_overrides):
    training = {"steps_per_iteration": 80, "evolution_cycle": 2,
                "total_iterations": 4, "eval_episodes": 1, "workers": 1}
    training.update(training_overrides)
    return {
        "env": {"name": "gridworld", "side": 3},
        "population": {"size": 3, "elite": 1, "general": 1, "mutation": 1,
                       "crossover": 0},
        "training": training,
        "dqn": {"hidden_sizes": [12], "warmup_steps": 32, "batch_size": 16,
                "buffer_capacity": 400, "epsilon_decay_steps": 300},
        "master_seed": 5,
    }


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


class TestParseConfig:
    def test_minimal_valid(self):
        config, out = parse_config(base_config())
        assert config.population_size == 3
        assert config.env_name == "gridworld"
        assert out is None

    def test_output_dir_passthrough(self):
        data = base_config()
        data["output_dir"] = "runs/demo"
        _, out = parse_config(data)
        assert out == "runs/demo"

    def test_unknown_top_level_key(self):
        data = base_config()
        data["experiment"] = {}
        with pytest.raises(ConfigError, match="experiment"):
            parse_config(data)

    def test_unknown_nested_key(self):
        data = base_config()
        data["dqn"]["momentum"] = 0.9
        with pytest.raises(ConfigError, match="momentum"):
            parse_config(data)

    def test_missing_block(self):
        data = base_config()
        del data["population"]
        with pytest.raises(ConfigError, match="population"):
            parse_config(data)

    def test_missing_env_param(self):
        data = base_config()
        del data["env"]["side"]
        with pytest.raises(ConfigError, match="side"):
            parse_config(data)

    def test_unknown_env(self):
        data = base_config()
        data["env"] = {"name": "pong"}
        with pytest.raises(ConfigError, match="pong"):
            parse_config(data)

    def test_range_violation_reported(self):
        data = base_config()
        data["mutation"] = {"amplitude_start": 1.5}
        with pytest.raises(ConfigError, match="mutation"):
            parse_config(data)

    def test_plan_must_cover_population(self):
        data = base_config()
        data["population"]["size"] = 9
        with pytest.raises(ConfigError):
            parse_config(data)

    def test_snapshot_round_trip(self):
        config, _ = parse_config(base_config())
        again, _ = parse_config(config.to_dict())
        assert again == config

    def test_shipped_configs_parse(self):
        from pathlib import Path

        config_dir = Path(__file__).resolve().parent.parent / "configs"
        for path in sorted(config_dir.glob("*.json")):
            config, _ = load_run_config(path)
            assert config.population_size >= 1

    def test_file_loader_errors(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_run_config(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError, match="JSON"):
            load_run_config(bad)


class TestCliCommands:
    def test_run_baseline_report_eval_pipeline(self, tmp_path, capsys):
        config_path = write_config(tmp_path, base_config())
        lerl_dir = tmp_path / "lerl_run"
        base_dir = tmp_path / "base_run"
        assert main(["run", "--config", str(config_path),
                     "--out", str(lerl_dir)]) == 0
        assert main(["baseline", "--config", str(config_path),
                     "--out", str(base_dir)]) == 0
        report_dir = tmp_path / "report"
        assert main(["report", "--lerl", str(lerl_dir),
                     "--baseline", str(base_dir), "--smooth", "2",
                     "--out", str(report_dir)]) == 0
        assert (report_dir / "summary.json").exists()
        svgs = sorted(report_dir.glob("*.svg"))
        assert len(svgs) == 6  # three charts per run
        checkpoint = next((lerl_dir / "checkpoints").glob("agent_000.lerl"))
        assert main(["eval", "--checkpoint", str(checkpoint),
                     "--episodes", "2"]) == 0
        out = capsys.readouterr().out
        assert "mean greedy return" in out

    def test_seed_override_changes_run(self, tmp_path):
        config_path = write_config(tmp_path, base_config())
        main(["run", "--config", str(config_path), "--seed", "1",
              "--out", str(tmp_path / "s1")])
        main(["run", "--config", str(config_path), "--seed", "2",
              "--out", str(tmp_path / "s2")])
        a = json.loads((tmp_path / "s1" / "config.json").read_text())
        b = json.loads((tmp_path / "s2" / "config.json").read_text())
        assert a["master_seed"] == 1 and b["master_seed"] == 2

    def test_config_error_exit_code(self, tmp_path, capsys):
        data = base_config()
        data["bogus"] = 1
        config_path = write_config(tmp_path, data)
        assert main(["run", "--config", str(config_path),
                     "--out", str(tmp_path / "x")]) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_out_dir_is_config_error(self, tmp_path):
        config_path = write_config(tmp_path, base_config())
        assert main(["run", "--config", str(config_path)]) == 2

    def test_runtime_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "agent.lerl"
        bad.write_bytes(b"LERL" + b"\x01")
        write_config(tmp_path, base_config())
        assert main(["eval", "--checkpoint", str(bad),
                     "--config", str(tmp_path / "config.json")]) == 1
        assert "error" in capsys.readouterr().err

    def test_eval_discovers_snapshot_in_parent(self, tmp_path):
        config_path = write_config(tmp_path, base_config())
        run_dir = tmp_path / "run"
        main(["run", "--config", str(config_path), "--out", str(run_dir)])
        checkpoint = run_dir / "checkpoints" / "agent_001.lerl"
        assert main(["eval", "--checkpoint", str(checkpoint),
                     "--episodes", "1"]) == 0

    def test_eval_without_config_anywhere(self, tmp_path):
        config_path = write_config(tmp_path, base_config())
        run_dir = tmp_path / "run"
        main(["run", "--config", str(config_path), "--out", str(run_dir)])
        orphan_dir = tmp_path / "far" / "away" / "deep"
        orphan_dir.mkdir(parents=True)
        orphan = orphan_dir / "orphan.lerl"
        orphan.write_bytes(
            (run_dir / "checkpoints" / "agent_000.lerl").read_bytes())
        assert main(["eval", "--checkpoint", str(orphan)]) == 2


class TestRenderCharts:
    def test_three_files_and_determinism(self, tmp_path):
        from lerl.metrics import read_curves_csv, write_curves_csv

        rng = np.random.default_rng(3)
        scores = rng.normal(size=(4, 12)).cumsum(axis=1)
        curves = aggregate_curves(scores, smooth_window=3)
        csv_path = tmp_path / "curves.csv"
        write_curves_csv(csv_path, curves)
        first = render_charts(scores, read_curves_csv(csv_path),
                              tmp_path / "a", tag="demo")
        assert len(first) == 3
        blobs = [p.read_bytes() for p in first]
        second = render_charts(scores, read_curves_csv(csv_path),
                               tmp_path / "b", tag="demo")
        for path, blob in zip(second, blobs):
            assert path.read_bytes() == blob

    def test_empty_curves_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            render_charts(np.zeros((1, 0)), [], tmp_path)
