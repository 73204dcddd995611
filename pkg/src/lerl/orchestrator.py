"""Population lifecycle: parallel training cycles, the evolution barrier,
seeding, logging, and checkpoints.

Each generation is a fork-join: every agent trains ``evolution_cycle``
iterations on its own worker (own agent, own envs, own RNG streams), the
join is the evolution lock, then the evolution step runs exclusively.
Every RNG stream in a run is derived from (master_seed, slot, generation,
tag), so results are independent of worker count and scheduling.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agent import DQNConfig, QAgent, epsilon_at, run_iteration
from .checkpoint import checkpoint_population
from .envs import evaluate_deterministic, make_env
from .evolution import LineageDecay, MutationConfig, evolution_step
from .lineage import (EvalWeights, PartitionPlan, comprehensive_evaluation,
                      normalize_scores, rank_by_performance)
from .logs import (GENERATION_CSV, GENERATION_HEADER, GENERATION_SCHEMA,
                   ITERATION_CSV, ITERATION_HEADER, ITERATION_SCHEMA, CsvLog,
                   GenerationRecord, IterationRecord)

INITIAL_LINEAGE = 0.5
CONFIG_SNAPSHOT = "config.json"
CHECKPOINT_DIR = "checkpoints"

ROLE_BASELINE = "baseline"


@dataclass
class PopulationConfig:
    """Everything a run needs; see README for the file-format mirror."""

    env_name: str
    env_params: dict
    population_size: int
    plan: PartitionPlan
    evolution_cycle: int
    total_iterations: int
    steps_per_iteration: int
    eval_episodes: int = 3
    weights: EvalWeights = field(default_factory=EvalWeights)
    mutation: MutationConfig = field(default_factory=MutationConfig)
    decay: LineageDecay = field(default_factory=LineageDecay)
    dqn: DQNConfig = field(default_factory=DQNConfig)
    master_seed: int = 0
    workers: int = 0  # 0 means one worker per agent

    def __post_init__(self):
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if self.plan.population_size != self.population_size:
            raise ValueError(f"partition plan covers {self.plan.population_size} "
                             f"agents, population_size is {self.population_size}")
        for name in ("evolution_cycle", "total_iterations", "steps_per_iteration",
                     "eval_episodes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.workers < 0:
            raise ValueError("workers must be >= 0")

    @property
    def worker_count(self) -> int:
        return self.workers if self.workers > 0 else self.population_size

    def to_dict(self) -> dict:
        return {
            "env": {"name": self.env_name, **self.env_params},
            "population": {
                "size": self.population_size,
                "elite": self.plan.n_elite,
                "general": self.plan.n_general,
                "mutation": self.plan.n_mutation,
                "crossover": self.plan.n_crossover,
            },
            "training": {
                "steps_per_iteration": self.steps_per_iteration,
                "evolution_cycle": self.evolution_cycle,
                "total_iterations": self.total_iterations,
                "eval_episodes": self.eval_episodes,
                "workers": self.workers,
            },
            "dqn": {
                "discount": self.dqn.discount,
                "learning_rate": self.dqn.learning_rate,
                "batch_size": self.dqn.batch_size,
                "buffer_capacity": self.dqn.buffer_capacity,
                "target_sync_interval": self.dqn.target_sync_interval,
                "warmup_steps": self.dqn.warmup_steps,
                "epsilon_start": self.dqn.epsilon_start,
                "epsilon_end": self.dqn.epsilon_end,
                "epsilon_decay_steps": self.dqn.epsilon_decay_steps,
                "hidden_sizes": list(self.dqn.hidden_sizes),
                "partition_index": self.dqn.partition_index,
            },
            "evaluation": {
                "performance_weight": self.weights.performance_weight,
                "lineage_weight": self.weights.lineage_weight,
                "carry_over": self.weights.carry_over,
            },
            "mutation": {
                "layer_probability": self.mutation.layer_probability,
                "amplitude_start": self.mutation.amplitude_start,
                "amplitude_decay": self.mutation.amplitude_decay,
                "amplitude_floor": self.mutation.amplitude_floor,
            },
            "lineage_decay": {
                "mutation": self.decay.mutation,
                "crossover": self.decay.crossover,
            },
            "master_seed": self.master_seed,
        }


def derive_seed(master_seed: int, agent_id: int, generation: int, slot_tag: str) -> int:
    """Collision-resistant 64-bit seed for one (agent, generation, purpose)."""
    digest = hashlib.blake2b(
        f"{master_seed}:{agent_id}:{generation}:{slot_tag}".encode(),
        digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class RunResult:
    out_dir: Path | None
    iteration_records: list[IterationRecord]
    generation_records: list[GenerationRecord]
    population: list[QAgent]
    final_scores: list[float]   # last deterministic eval per agent slot


def _spawn_agent(config: PopulationConfig, slot: int) -> QAgent:
    probe = make_env(config.env_name, **config.env_params)
    agent = QAgent(probe.spec.observation_dim, probe.spec.action_count,
                   config.dqn, seed=derive_seed(config.master_seed, slot, 0, "agent"))
    agent.lineage = INITIAL_LINEAGE
    return agent


def _spawn_train_env(config: PopulationConfig, slot: int, generation: int):
    rng = np.random.default_rng(
        derive_seed(config.master_seed, slot, generation, "train-env"))
    return make_env(config.env_name, rng=rng, **config.env_params)


def _train_cycle(agent: QAgent, env, eval_env, config: PopulationConfig,
                 slot: int, first_iteration: int, count: int):
    """Worker body: ``count`` iterations, each followed by a greedy eval."""
    records = []
    last_score = math.nan
    for offset in range(count):
        iteration = first_iteration + offset
        stats = run_iteration(agent, env, config.steps_per_iteration)
        eval_rng = np.random.default_rng(
            derive_seed(config.master_seed, slot, iteration, "eval"))
        last_score = evaluate_deterministic(agent, eval_env, config.eval_episodes,
                                            rng=eval_rng)
        records.append(IterationRecord(iteration, slot, stats.mean_return,
                                       last_score, epsilon_at(config.dqn,
                                                              agent.env_steps)))
    return records, last_score


class _RunLogs:
    """Per-run CSV sinks; rows are flushed at every generation boundary so a
    failed worker still leaves all completed generations on disk."""

    def __init__(self, out_dir: Path | None, config: PopulationConfig):
        self.iteration_log = None
        self.generation_log = None
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / CONFIG_SNAPSHOT).write_text(
                json.dumps(config.to_dict(), indent=2) + "\n")
            self.iteration_log = CsvLog(out_dir / ITERATION_CSV,
                                        ITERATION_SCHEMA, ITERATION_HEADER)
            self.generation_log = CsvLog(out_dir / GENERATION_CSV,
                                         GENERATION_SCHEMA, GENERATION_HEADER)

    def append_iterations(self, records) -> None:
        if self.iteration_log is not None:
            self.iteration_log.append(records)

    def append_generations(self, records) -> None:
        if self.generation_log is not None:
            self.generation_log.append(records)

    def close(self) -> None:
        for log in (self.iteration_log, self.generation_log):
            if log is not None:
                log.close()


def _run(config: PopulationConfig, out_dir: str | Path | None, evolve: bool) -> RunResult:
    out_path = Path(out_dir) if out_dir is not None else None
    size = config.population_size
    population = [_spawn_agent(config, slot) for slot in range(size)]
    train_envs = [_spawn_train_env(config, slot, 0) for slot in range(size)]
    eval_envs = [make_env(config.env_name, **config.env_params) for _ in range(size)]

    full_generations = config.total_iterations // config.evolution_cycle
    trailing = config.total_iterations - full_generations * config.evolution_cycle

    iteration_records: list[IterationRecord] = []
    generation_records: list[GenerationRecord] = []
    final_scores = [math.nan] * size
    logs = _RunLogs(out_path, config)
    try:
        with ThreadPoolExecutor(max_workers=config.worker_count) as pool:
            def run_cycle(first_iteration: int, count: int) -> list[float]:
                futures = [pool.submit(_train_cycle, population[slot],
                                       train_envs[slot], eval_envs[slot], config,
                                       slot, first_iteration, count)
                           for slot in range(size)]
                # Joining every future is the evolution lock: nothing below
                # runs until all agents finish their cycle.
                scores = [math.nan] * size
                batch: list[IterationRecord] = []
                for slot, future in enumerate(futures):
                    records, last_score = future.result()
                    batch.extend(records)
                    scores[slot] = last_score
                batch.sort(key=lambda r: (r.iteration, r.agent_id))
                iteration_records.extend(batch)
                logs.append_iterations(batch)
                return scores

            for generation in range(full_generations):
                scores = run_cycle(generation * config.evolution_cycle,
                                   config.evolution_cycle)
                final_scores = scores
                if evolve:
                    rows = _evolve_population(population, scores, config,
                                              generation, train_envs)
                else:
                    rows = _baseline_generation_rows(population, scores, config,
                                                     generation)
                generation_records.extend(rows)
                logs.append_generations(rows)

            if trailing:
                scores = run_cycle(full_generations * config.evolution_cycle,
                                   trailing)
                final_scores = scores
    finally:
        logs.close()

    if out_path is not None:
        checkpoint_population(population, out_path / CHECKPOINT_DIR)
    return RunResult(out_path, iteration_records, generation_records,
                     population, final_scores)


def _evolve_population(population: list[QAgent], scores: list[float],
                       config: PopulationConfig, generation: int,
                       train_envs: list) -> list[GenerationRecord]:
    evo_rng = np.random.default_rng(
        derive_seed(config.master_seed, 0, generation, "evolution"))
    result = evolution_step(population, scores, config.plan, config.weights,
                            config.mutation, config.decay, generation, evo_rng)
    rows = []
    for agent_id, outcome in enumerate(result.outcomes):
        rec = outcome.record
        rows.append(GenerationRecord(generation, agent_id, rec.raw_score,
                                     rec.norm_score, rec.lineage,
                                     rec.comprehensive, rec.rank, outcome.role,
                                     result.amplitude))
    # Replaced slots start over: fresh agent, fresh environment stream.
    for slot in range(len(population)):
        if result.population[slot] is not population[slot]:
            train_envs[slot] = _spawn_train_env(config, slot, generation + 1)
        population[slot] = result.population[slot]
    return rows


def _baseline_generation_rows(population: list[QAgent], scores: list[float],
                              config: PopulationConfig,
                              generation: int) -> list[GenerationRecord]:
    """Same per-generation schema as an evolved run, with no turnover."""
    raw = np.asarray(scores, dtype=np.float64)
    lineages = np.array([agent.lineage for agent in population])
    norm = normalize_scores(raw)
    blended = comprehensive_evaluation(norm, lineages, config.weights)
    ranks = rank_by_performance(raw)
    return [GenerationRecord(generation, i, float(raw[i]), float(norm[i]),
                             float(lineages[i]), float(blended[i]), int(ranks[i]),
                             ROLE_BASELINE, 0.0)
            for i in range(len(population))]


def run_lerl(config: PopulationConfig, out_dir: str | Path | None = None) -> RunResult:
    """Train the population with evolution at every completed cycle."""
    return _run(config, out_dir, evolve=True)


def run_baseline(config: PopulationConfig, out_dir: str | Path | None = None) -> RunResult:
    """Train the same population with the same seeds and no evolution."""
    return _run(config, out_dir, evolve=False)
