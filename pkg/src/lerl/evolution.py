"""Genetic operators on agent networks and the per-generation evolution step.

Mutation multiplies whole layers by uniform noise around 1 (a layer is
disturbed with a fixed probability, and the noise half-width shrinks
linearly per generation down to a floor). Crossover swaps the perception
block of one elite with the thinking block of another. Survivors pass
through untouched; only the worst agents are replaced, and replacements
inherit a decayed lineage value from their parents.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agent import QAgent, clone_for_evolution
from .lineage import (EvalRecord, EvalWeights, PartitionPlan,
                      comprehensive_evaluation, lineage_update,
                      normalize_scores, partition_population,
                      rank_by_performance)

ROLE_ELITE = "elite"
ROLE_GENERAL = "general"
ROLE_MUTANT = "mutant"
ROLE_CROSSOVER = "crossover"

_SEED_MAX = 2 ** 63


@dataclass(frozen=True)
class MutationConfig:
    layer_probability: float = 0.5   # chance each layer is disturbed
    amplitude_start: float = 0.2     # noise half-width at generation 0
    amplitude_decay: float = 0.004   # linear shrink per generation
    amplitude_floor: float = 0.05    # never shrink below this

    def __post_init__(self):
        if not 0.0 <= self.layer_probability <= 1.0:
            raise ValueError("layer_probability must be in [0, 1]")
        if not 0.0 <= self.amplitude_floor <= self.amplitude_start < 1.0:
            raise ValueError("need 0 <= amplitude_floor <= amplitude_start < 1")
        if self.amplitude_decay < 0.0:
            raise ValueError("amplitude_decay must be nonnegative")


@dataclass(frozen=True)
class LineageDecay:
    """Attenuation applied to inherited lineage values."""

    mutation: float = 0.9
    crossover: float = 0.9

    def __post_init__(self):
        if not (0.0 <= self.mutation <= 1.0 and 0.0 <= self.crossover <= 1.0):
            raise ValueError("decay factors must be in [0, 1]")


def disturbance_amplitude(config: MutationConfig, generation: int) -> float:
    """Noise half-width for a generation: linear decay clamped at the floor."""
    if generation < 0:
        raise ValueError("generation must be >= 0")
    return max(config.amplitude_start - generation * config.amplitude_decay,
               config.amplitude_floor)


def sample_disturbance(shape, amplitude: float, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. multiplicative noise, uniform on (1 - amplitude, 1 + amplitude)."""
    if not 0.0 <= amplitude < 1.0:
        raise ValueError("amplitude must be in [0, 1)")
    return rng.uniform(1.0 - amplitude, 1.0 + amplitude, size=shape)


def mutate(parent: QAgent, config: MutationConfig, generation: int,
           decay: LineageDecay, rng: np.random.Generator) -> QAgent:
    """Clone an elite and disturb its layers.

    Each layer independently passes a Bernoulli(layer_probability) gate;
    when it fires, the layer's weights and bias are both multiplied
    elementwise by fresh disturbance samples. The child starts with an
    empty buffer, target equal to its mutated online net, and lineage
    decay.mutation times the parent's.
    """
    child = clone_for_evolution(parent, seed=int(rng.integers(_SEED_MAX)))
    amplitude = disturbance_amplitude(config, generation)
    net = child.online
    for layer in range(net.layer_count):
        if rng.random() < config.layer_probability:
            net.weights[layer] *= sample_disturbance(net.weights[layer].shape,
                                                     amplitude, rng)
            net.biases[layer] *= sample_disturbance(net.biases[layer].shape,
                                                    amplitude, rng)
    child.target.copy_from(net)
    child.lineage = decay.mutation * parent.lineage
    return child


def crossover(parent_j: QAgent, parent_k: QAgent, decay: LineageDecay,
              rng: np.random.Generator | None = None) -> tuple[QAgent, QAgent]:
    """Recombine two elites at the perception/thinking boundary.

    The first child takes parent_k's perception block and parent_j's
    thinking block; the second child is the mirror combination. Both are
    fresh clones (empty buffers, target == online) and both inherit
    decay.crossover times the parents' mean lineage.
    """
    if not parent_j.online.same_architecture(parent_k.online):
        raise ValueError("crossover parents must share architecture and partition")
    if rng is not None:
        seed_a, seed_b = (int(rng.integers(_SEED_MAX)) for _ in range(2))
    else:
        seed_a, seed_b = 0, 1
    split = parent_j.online.partition_index

    child_a = clone_for_evolution(parent_j, seed=seed_a)
    child_b = clone_for_evolution(parent_k, seed=seed_b)
    for layer in range(split):
        np.copyto(child_a.online.weights[layer], parent_k.online.weights[layer])
        np.copyto(child_a.online.biases[layer], parent_k.online.biases[layer])
        np.copyto(child_b.online.weights[layer], parent_j.online.weights[layer])
        np.copyto(child_b.online.biases[layer], parent_j.online.biases[layer])
    child_a.target.copy_from(child_a.online)
    child_b.target.copy_from(child_b.online)

    inherited = decay.crossover * (parent_j.lineage + parent_k.lineage) / 2.0
    child_a.lineage = inherited
    child_b.lineage = inherited
    return child_a, child_b


@dataclass
class AgentOutcome:
    """Evaluation record plus the role assigned by the evolution step and,
    for offspring, the elite parent ids."""

    record: EvalRecord
    role: str
    parents: tuple[int, ...] = ()


@dataclass
class EvolutionResult:
    population: list[QAgent]
    outcomes: list[AgentOutcome]   # indexed by agent id
    amplitude: float               # disturbance half-width used this generation


def evolution_step(population: list[QAgent], raw_scores, plan: PartitionPlan,
                   weights: EvalWeights, mutation_config: MutationConfig,
                   decay: LineageDecay, generation: int,
                   rng: np.random.Generator) -> EvolutionResult:
    """One full generation turnover.

    Order of operations: normalize scores, blend with pre-update lineage,
    update lineage from raw-score ranks, partition by the blended value,
    then refill mutation slots from single elites and crossover slots from
    elite pairs. Elite and general agents pass through as the same
    objects; each replacement slot gets its own pre-assigned RNG stream so
    the result does not depend on fill order.
    """
    raw = np.asarray(raw_scores, dtype=np.float64)
    if len(population) != raw.size:
        raise ValueError("one raw score per agent required")
    if plan.population_size != len(population):
        raise ValueError(f"partition plan covers {plan.population_size} agents, "
                         f"population has {len(population)}")

    old_lineage = np.array([agent.lineage for agent in population])
    norm = normalize_scores(raw)
    blended = comprehensive_evaluation(norm, old_lineage, weights)
    ranks = rank_by_performance(raw)
    new_lineage = lineage_update(old_lineage, ranks, weights.carry_over)
    for agent, value in zip(population, new_lineage):
        agent.lineage = float(value)

    elite_ids, general_ids, mutation_ids, crossover_ids = \
        partition_population(blended, plan)

    amplitude = disturbance_amplitude(mutation_config, generation)
    records = [EvalRecord(agent_id=i, raw_score=float(raw[i]),
                          norm_score=float(norm[i]), lineage=float(old_lineage[i]),
                          comprehensive=float(blended[i]), rank=int(ranks[i]))
               for i in range(len(population))]
    outcomes: list[AgentOutcome] = [None] * len(population)
    for i in elite_ids:
        outcomes[i] = AgentOutcome(records[i], ROLE_ELITE)
    for i in general_ids:
        outcomes[i] = AgentOutcome(records[i], ROLE_GENERAL)

    # Pre-assign one stream per mutation slot and per crossover pairing so
    # slot fills are order-independent (and could run concurrently).
    new_population = list(population)
    slot_streams = [np.random.default_rng(int(rng.integers(_SEED_MAX)))
                    for _ in range(len(mutation_ids) + (len(crossover_ids) + 1) // 2)]
    stream_iter = iter(slot_streams)

    for slot in mutation_ids:
        slot_rng = next(stream_iter)
        parent_id = elite_ids[int(slot_rng.integers(len(elite_ids)))]
        new_population[slot] = mutate(population[parent_id], mutation_config,
                                      generation, decay, slot_rng)
        outcomes[slot] = AgentOutcome(records[slot], ROLE_MUTANT, (parent_id,))

    # Crossover slots are consumed in pairs: one parent selection yields the
    # mirror pair; an odd final slot takes only the first combination.
    for start in range(0, len(crossover_ids), 2):
        pair_rng = next(stream_iter)
        if len(elite_ids) == 1:
            j = k = elite_ids[0]
        else:
            picks = pair_rng.choice(len(elite_ids), size=2, replace=False)
            j, k = elite_ids[int(picks[0])], elite_ids[int(picks[1])]
        child_a, child_b = crossover(population[j], population[k], decay, pair_rng)
        slots = crossover_ids[start:start + 2]
        new_population[slots[0]] = child_a
        outcomes[slots[0]] = AgentOutcome(records[slots[0]], ROLE_CROSSOVER, (j, k))
        if len(slots) == 2:
            new_population[slots[1]] = child_b
            outcomes[slots[1]] = AgentOutcome(records[slots[1]], ROLE_CROSSOVER, (j, k))

    return EvolutionResult(new_population, outcomes, amplitude)
