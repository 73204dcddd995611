"""Static SVG charts for completed runs.

Charts are derived views over the CSVs and are rendered deterministically
(fixed hash salt, no embedded timestamps) so re-rendering the same data
yields identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .metrics import CurvePoint  # noqa: E402

_SVG_OPTS = {"metadata": {"Date": None}}


def _new_figure():
    plt.rcParams["svg.hashsalt"] = "lerl"
    return plt.subplots(figsize=(7, 4.5))


def render_charts(per_agent_scores, curves: list[CurvePoint],
                  out_dir: str | Path, tag: str = "run") -> list[Path]:
    """Write the three standard charts for one run: per-agent raw scores,
    mean with its smoothed companion, and best with median."""
    if not curves:
        raise ValueError("no curve points to render")
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    iterations = [p.iteration for p in curves]
    paths = []

    fig, ax = _new_figure()
    for agent_id, row in enumerate(per_agent_scores):
        ax.plot(range(len(row)), row, linewidth=0.8, label=f"agent {agent_id}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("eval score")
    ax.set_title(f"{tag}: per-agent scores")
    ax.legend(fontsize=7, ncol=2)
    paths.append(out_path / f"{tag}_agents.svg")
    fig.savefig(paths[-1], **_SVG_OPTS)
    plt.close(fig)

    fig, ax = _new_figure()
    ax.plot(iterations, [p.mean for p in curves], label="mean")
    ax.plot(iterations, [p.smoothed_mean for p in curves], label="smoothed mean")
    ax.set_xlabel("iteration")
    ax.set_ylabel("eval score")
    ax.set_title(f"{tag}: population mean")
    ax.legend(fontsize=8)
    paths.append(out_path / f"{tag}_mean_smoothed.svg")
    fig.savefig(paths[-1], **_SVG_OPTS)
    plt.close(fig)

    fig, ax = _new_figure()
    ax.plot(iterations, [p.best for p in curves], label="best")
    ax.plot(iterations, [p.median for p in curves], label="median")
    ax.set_xlabel("iteration")
    ax.set_ylabel("eval score")
    ax.set_title(f"{tag}: best and median")
    ax.legend(fontsize=8)
    paths.append(out_path / f"{tag}_best_median.svg")
    fig.savefig(paths[-1], **_SVG_OPTS)
    plt.close(fig)

    return paths
