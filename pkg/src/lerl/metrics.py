"""Curve aggregation, growth rates, and the two-run comparison report.

Scores in every report are raw environment returns; normalization is
internal to selection and never leaks into emitted curves.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ConfigError
from .logs import (GENERATION_CSV, ITERATION_CSV, read_generation_csv,
                   read_iteration_csv)
from .orchestrator import CONFIG_SNAPSHOT

CURVES_SCHEMA = "# lerl-csv curves v1"
CURVES_HEADER = ["iteration", "best", "median", "mean", "smoothed_mean"]
RATIOS_SCHEMA = "# lerl-csv generation_ratios v1"
RATIOS_HEADER = ["generation", "lerl_best", "baseline_best", "best_ratio"]
UNDEFINED = "undefined"   # ratio cell when the previous/denominator best is 0


@dataclass
class CurvePoint:
    iteration: int
    best: float
    median: float
    mean: float
    smoothed_mean: float


def aggregate_curves(per_agent_scores, smooth_window: int) -> list[CurvePoint]:
    """Per-iteration best/median/mean over agents plus a trailing moving
    average of the mean (prefixes average over the points available)."""
    if smooth_window < 1:
        raise ValueError("smooth_window must be >= 1")
    scores = np.asarray(per_agent_scores, dtype=np.float64)
    if scores.ndim != 2 or scores.size == 0:
        raise ValueError("need a non-empty (agents, iterations) score matrix")
    best = scores.max(axis=0)
    median = np.median(scores, axis=0)
    means = [float(m) for m in scores.mean(axis=0)]
    points = []
    for i in range(scores.shape[1]):
        window = means[max(0, i - smooth_window + 1):i + 1]
        # Sequential summation keeps the value reproducible by any
        # straightforward recomputation, independent of numpy's reduction
        # strategy for longer windows.
        points.append(CurvePoint(i, float(best[i]), float(median[i]),
                                 means[i], sum(window) / len(window)))
    return points


def growth_rate(best_per_generation) -> list[float | None]:
    """Ratio of each generation's best to the previous generation's best.

    A zero previous best makes the ratio undefined; those entries are None
    (written as the ``undefined`` sentinel in CSVs), never a number.
    """
    best = [float(v) for v in best_per_generation]
    if len(best) < 2:
        raise ValueError("need at least two generations")
    return [None if prev == 0.0 else cur / prev
            for prev, cur in zip(best[:-1], best[1:])]


# ---- run-directory access -------------------------------------------------


def load_run_snapshot(run_dir: str | Path) -> dict:
    path = Path(run_dir) / CONFIG_SNAPSHOT
    if not path.exists():
        raise ConfigError(f"{run_dir}: missing {CONFIG_SNAPSHOT}")
    return json.loads(path.read_text())


def load_eval_matrix(run_dir: str | Path) -> np.ndarray:
    """Per-agent deterministic eval scores as an (agents, iterations) matrix."""
    records = read_iteration_csv(Path(run_dir) / ITERATION_CSV)
    if not records:
        raise ValueError(f"{run_dir}: empty iteration log")
    agents = max(r.agent_id for r in records) + 1
    iterations = max(r.iteration for r in records) + 1
    matrix = np.full((agents, iterations), np.nan)
    for r in records:
        matrix[r.agent_id, r.iteration] = r.eval_score
    return matrix


def load_generation_bests(run_dir: str | Path) -> list[float]:
    """Best raw score per generation, in generation order."""
    records = read_generation_csv(Path(run_dir) / GENERATION_CSV)
    if not records:
        raise ValueError(f"{run_dir}: empty generation log")
    bests: dict[int, float] = {}
    for r in records:
        bests[r.generation] = max(bests.get(r.generation, -np.inf), r.raw_score)
    return [bests[g] for g in sorted(bests)]


def _flatten(prefix: str, value) -> dict:
    if isinstance(value, dict):
        out = {}
        for key, inner in value.items():
            out.update(_flatten(f"{prefix}.{key}" if prefix else key, inner))
        return out
    return {prefix: value}


_COMPARABLE_KEYS = ("env", "training.steps_per_iteration", "training.evolution_cycle",
                    "training.total_iterations", "training.eval_episodes")


def check_comparable(lerl_snapshot: dict, baseline_snapshot: dict) -> None:
    """Two runs are comparable when they share environment and iteration
    budget; anything else differing is fine (worker count, seeds, plans)."""
    flat_a = _flatten("", lerl_snapshot)
    flat_b = _flatten("", baseline_snapshot)
    differing = []
    for key in sorted(set(flat_a) | set(flat_b)):
        if not any(key == k or key.startswith(k + ".") for k in _COMPARABLE_KEYS):
            continue
        if flat_a.get(key) != flat_b.get(key):
            differing.append(key)
    if differing:
        raise ConfigError("runs are not comparable; differing keys: "
                          + ", ".join(differing))


# ---- emission --------------------------------------------------------------


def write_curves_csv(path: str | Path, points: list[CurvePoint]) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(CURVES_SCHEMA + "\n")
        writer = csv.writer(handle)
        writer.writerow(CURVES_HEADER)
        for p in points:
            writer.writerow([str(p.iteration), repr(p.best), repr(p.median),
                             repr(p.mean), repr(p.smoothed_mean)])


def read_curves_csv(path: str | Path) -> list[CurvePoint]:
    with open(path, newline="") as handle:
        first = handle.readline().rstrip("\n")
        if first != CURVES_SCHEMA:
            raise ValueError(f"{path}: expected schema line {CURVES_SCHEMA!r}")
        reader = csv.reader(handle)
        header = next(reader)
        if header != CURVES_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [CurvePoint(int(r[0]), float(r[1]), float(r[2]), float(r[3]),
                           float(r[4])) for r in reader if r]


def _ratio(numerator: float, denominator: float) -> float | None:
    return None if denominator == 0.0 else numerator / denominator


def _trapezoid_area(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(np.sum((values[:-1] + values[1:]) / 2.0))


def comparative_report(lerl_dir: str | Path, baseline_dir: str | Path,
                       smooth_window: int, out_dir: str | Path) -> dict:
    """Compare an evolved run against a no-evolution run.

    Writes curve CSVs for both runs, a per-generation best-ratio CSV, and
    summary.json under ``out_dir``; returns the summary document.
    """
    lerl_snapshot = load_run_snapshot(lerl_dir)
    baseline_snapshot = load_run_snapshot(baseline_dir)
    check_comparable(lerl_snapshot, baseline_snapshot)

    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)

    curves = {}
    summary = {}
    for tag, run_dir in (("lerl", lerl_dir), ("baseline", baseline_dir)):
        matrix = load_eval_matrix(run_dir)
        points = aggregate_curves(matrix, smooth_window)
        write_curves_csv(out_path / f"{tag}_curves.csv", points)
        curves[tag] = points
        summary[tag] = {
            "final_best": points[-1].best,
            "final_median": points[-1].median,
            "mean_auc": _trapezoid_area(np.array([p.mean for p in points])),
        }

    lerl_bests = load_generation_bests(lerl_dir)
    baseline_bests = load_generation_bests(baseline_dir)
    generations = min(len(lerl_bests), len(baseline_bests))
    ratios = [_ratio(lerl_bests[g], baseline_bests[g]) for g in range(generations)]
    with open(out_path / "generation_ratios.csv", "w", newline="") as handle:
        handle.write(RATIOS_SCHEMA + "\n")
        writer = csv.writer(handle)
        writer.writerow(RATIOS_HEADER)
        for g in range(generations):
            cell = UNDEFINED if ratios[g] is None else repr(ratios[g])
            writer.writerow([str(g), repr(lerl_bests[g]), repr(baseline_bests[g]),
                             cell])

    document = {
        "summary": summary,
        "generations_compared": generations,
        "best_ratio": [None if r is None else r for r in ratios],
    }
    (out_path / "summary.json").write_text(json.dumps(document, indent=2) + "\n")
    document["curves"] = curves
    return document
