"""Run configuration files.

A run config is a JSON document with the blocks shown in the README
(`env`, `population`, `training`, and optional `dqn`, `evaluation`,
`mutation`, `lineage_decay`, `master_seed`, `output_dir`). Unknown keys
are rejected everywhere; numeric ranges are enforced by the underlying
config dataclasses.
"""

from __future__ import annotations

import json
from pathlib import Path

from .agent import DQNConfig
from .evolution import LineageDecay, MutationConfig
from .lineage import EvalWeights, PartitionPlan
from .orchestrator import PopulationConfig


class ConfigError(ValueError):
    """Invalid run configuration or unusable command input."""


_ENV_PARAM_KEYS = {
    "gridworld": {"side", "discount"},
    "chainwalk": {"length", "slip_probability", "discount"},
}
_ENV_REQUIRED = {"gridworld": {"side"}, "chainwalk": {"length"}}

_TOP_KEYS = {"env", "population", "training", "dqn", "evaluation", "mutation",
             "lineage_decay", "master_seed", "output_dir"}
_POPULATION_KEYS = {"size", "elite", "general", "mutation", "crossover"}
_TRAINING_KEYS = {"steps_per_iteration", "evolution_cycle", "total_iterations",
                  "eval_episodes", "workers"}
_DQN_KEYS = {"discount", "learning_rate", "batch_size", "buffer_capacity",
             "target_sync_interval", "warmup_steps", "epsilon_start",
             "epsilon_end", "epsilon_decay_steps", "hidden_sizes",
             "partition_index"}
_EVALUATION_KEYS = {"performance_weight", "lineage_weight", "carry_over"}
_MUTATION_KEYS = {"layer_probability", "amplitude_start", "amplitude_decay",
                  "amplitude_floor"}
_DECAY_KEYS = {"mutation", "crossover"}


def _require_block(data: dict, key: str) -> dict:
    if key not in data:
        raise ConfigError(f"missing required block {key!r}")
    block = data[key]
    if not isinstance(block, dict):
        raise ConfigError(f"block {key!r} must be a mapping")
    return block


def _check_keys(block: dict, allowed: set[str], where: str,
                required: set[str] = frozenset()) -> None:
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {', '.join(unknown)}")
    missing = sorted(required - set(block))
    if missing:
        raise ConfigError(f"missing required keys in {where}: {', '.join(missing)}")


def _build(cls, block: dict, where: str, **overrides):
    try:
        return cls(**{**block, **overrides})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc


def parse_config(data: dict) -> tuple[PopulationConfig, str | None]:
    """Validate a parsed config document and build the run configuration.

    Returns (config, output_dir or None).
    """
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    _check_keys(data, _TOP_KEYS, "config root",
                required={"env", "population", "training"})

    env = dict(_require_block(data, "env"))
    name = env.pop("name", None)
    if name not in _ENV_PARAM_KEYS:
        raise ConfigError(f"env.name must be one of {sorted(_ENV_PARAM_KEYS)}, "
                          f"got {name!r}")
    _check_keys(env, _ENV_PARAM_KEYS[name], "env", required=_ENV_REQUIRED[name])

    population = _require_block(data, "population")
    _check_keys(population, _POPULATION_KEYS, "population",
                required=_POPULATION_KEYS)
    plan = _build(PartitionPlan, {}, "population plan",
                  n_elite=population["elite"], n_general=population["general"],
                  n_mutation=population["mutation"],
                  n_crossover=population["crossover"])

    training = _require_block(data, "training")
    _check_keys(training, _TRAINING_KEYS, "training",
                required={"steps_per_iteration", "evolution_cycle",
                          "total_iterations"})

    dqn_block = dict(data.get("dqn", {}))
    _check_keys(dqn_block, _DQN_KEYS, "dqn")
    if "hidden_sizes" in dqn_block:
        dqn_block["hidden_sizes"] = tuple(dqn_block["hidden_sizes"])
    dqn = _build(DQNConfig, dqn_block, "dqn")

    evaluation = data.get("evaluation", {})
    _check_keys(evaluation, _EVALUATION_KEYS, "evaluation")
    weights = _build(EvalWeights, evaluation, "evaluation")

    mutation = data.get("mutation", {})
    _check_keys(mutation, _MUTATION_KEYS, "mutation")
    mutation_config = _build(MutationConfig, mutation, "mutation")

    decay_block = data.get("lineage_decay", {})
    _check_keys(decay_block, _DECAY_KEYS, "lineage_decay")
    decay = _build(LineageDecay, decay_block, "lineage_decay")

    master_seed = data.get("master_seed", 0)
    if not isinstance(master_seed, int):
        raise ConfigError("master_seed must be an integer")
    output_dir = data.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError("output_dir must be a string")

    config = _build(
        PopulationConfig, {}, "run configuration",
        env_name=name, env_params=env,
        population_size=population["size"], plan=plan,
        evolution_cycle=training["evolution_cycle"],
        total_iterations=training["total_iterations"],
        steps_per_iteration=training["steps_per_iteration"],
        eval_episodes=training.get("eval_episodes", 3),
        weights=weights, mutation=mutation_config, decay=decay, dqn=dqn,
        master_seed=master_seed, workers=training.get("workers", 0))
    return config, output_dir


def load_run_config(path: str | Path) -> tuple[PopulationConfig, str | None]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return parse_config(data)
