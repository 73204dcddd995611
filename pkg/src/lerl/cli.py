"""Command-line harness.

    lerl run      --config FILE [--seed N] [--out DIR]
    lerl baseline --config FILE [--seed N] [--out DIR]
    lerl report   --lerl DIR --baseline DIR [--smooth W] --out DIR
    lerl eval     --checkpoint FILE [--episodes K] [--config FILE] [--seed N]

Exit codes: 0 success, 2 configuration error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .checkpoint import load_agent
from .config import ConfigError, load_run_config, parse_config
from .envs import evaluate_deterministic, make_env
from .metrics import comparative_report, load_eval_matrix
from .orchestrator import CONFIG_SNAPSHOT, run_baseline, run_lerl

DEFAULT_SMOOTH_WINDOW = 5


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lerl",
                                     description="Lineage-evolution population "
                                                 "training on toy MDPs.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (("run", "train a population with evolution"),
                       ("baseline", "train independent agents, no evolution")):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", required=True, help="run config JSON file")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the config's master seed")
        cmd.add_argument("--out", default=None,
                         help="output directory (default: config output_dir)")

    report = sub.add_parser("report", help="compare an evolved run to a baseline")
    report.add_argument("--lerl", required=True, help="evolved run directory")
    report.add_argument("--baseline", required=True, help="baseline run directory")
    report.add_argument("--smooth", type=int, default=DEFAULT_SMOOTH_WINDOW,
                        help="smoothing window in iterations")
    report.add_argument("--out", required=True, help="report output directory")

    ev = sub.add_parser("eval", help="greedy-evaluate a checkpointed agent")
    ev.add_argument("--checkpoint", required=True, help="agent .lerl file")
    ev.add_argument("--episodes", type=int, default=10)
    ev.add_argument("--config", default=None,
                    help="run config or snapshot JSON (default: config.json "
                         "next to the checkpoint or in its parent directory)")
    ev.add_argument("--seed", type=int, default=0, help="evaluation RNG seed")
    return parser


def _cmd_train(args, runner) -> int:
    config, config_out = load_run_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, master_seed=args.seed)
    out_dir = args.out if args.out is not None else config_out
    if out_dir is None:
        raise ConfigError("no output directory: pass --out or set output_dir "
                          "in the config")
    result = runner(config, out_dir)
    scores = [s for s in result.final_scores if not np.isnan(s)]
    best = max(scores) if scores else float("nan")
    print(f"run complete: {config.total_iterations} iterations, "
          f"{len(result.generation_records)} generation records, "
          f"final best eval score {best:.6g}")
    print(f"logs written to {result.out_dir}")
    return 0


def _find_eval_snapshot(checkpoint: Path, explicit: str | None) -> dict:
    if explicit is not None:
        path = Path(explicit)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        return json.loads(path.read_text())
    for candidate in (checkpoint.parent / CONFIG_SNAPSHOT,
                      checkpoint.parent.parent / CONFIG_SNAPSHOT):
        if candidate.exists():
            return json.loads(candidate.read_text())
    raise ConfigError(f"no {CONFIG_SNAPSHOT} found near {checkpoint}; "
                      "pass --config")


def _cmd_eval(args) -> int:
    checkpoint = Path(args.checkpoint)
    if not checkpoint.exists():
        raise ConfigError(f"checkpoint not found: {checkpoint}")
    snapshot = _find_eval_snapshot(checkpoint, args.config)
    config, _ = parse_config(snapshot)
    agent = load_agent(checkpoint, config.dqn)
    rng = np.random.default_rng(args.seed)
    env = make_env(config.env_name, **config.env_params)
    score = evaluate_deterministic(agent, env, args.episodes, rng=rng)
    print(f"{checkpoint.name}: mean greedy return over "
          f"{args.episodes} episode(s) = {score!r}")
    return 0


def _cmd_report(args) -> int:
    from .charts import render_charts  # deferred: pulls in matplotlib

    document = comparative_report(args.lerl, args.baseline, args.smooth, args.out)
    for tag, run_dir in (("lerl", args.lerl), ("baseline", args.baseline)):
        matrix = load_eval_matrix(run_dir)
        render_charts(matrix, document["curves"][tag], args.out, tag=tag)
    summary = document["summary"]
    for tag in ("lerl", "baseline"):
        s = summary[tag]
        print(f"{tag}: final best {s['final_best']:.6g}, "
              f"final median {s['final_median']:.6g}, "
              f"mean AUC {s['mean_auc']:.6g}")
    print(f"report written to {args.out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_train(args, run_lerl)
        if args.command == "baseline":
            return _cmd_train(args, run_baseline)
        if args.command == "report":
            return _cmd_report(args)
        return _cmd_eval(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
