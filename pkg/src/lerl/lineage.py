"""Lineage-aware evaluation: score normalization, comprehensive value,
lineage update, and population partition.

Everything here is a pure function of its inputs. Conventions shared by
all operations:

- the degenerate min-max case (all inputs equal) maps every entry to 0.5,
- ties are broken by lower agent id,
- ranking uses raw scores, never the blended comprehensive value,
- the lineage update must run after the comprehensive value is computed,
  otherwise the current score would be counted twice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EvalWeights:
    """Blend weights for current performance vs lineage, plus the carry-over
    factor applied to old lineage inside the update."""

    performance_weight: float = 0.7
    lineage_weight: float = 0.3
    carry_over: float = 0.5

    def __post_init__(self):
        if self.performance_weight < 0.0 or self.lineage_weight < 0.0:
            raise ValueError("weights must be nonnegative")
        if abs(self.performance_weight + self.lineage_weight - 1.0) > 1e-9:
            raise ValueError("performance_weight + lineage_weight must equal 1")
        if not 0.0 <= self.carry_over <= 1.0:
            raise ValueError("carry_over must be in [0, 1]")


@dataclass(frozen=True)
class PartitionPlan:
    """How many population slots each role gets."""

    n_elite: int
    n_general: int
    n_mutation: int
    n_crossover: int

    def __post_init__(self):
        if self.n_elite < 1:
            raise ValueError("need at least one elite")
        if min(self.n_general, self.n_mutation, self.n_crossover) < 0:
            raise ValueError("slot counts must be nonnegative")

    @property
    def population_size(self) -> int:
        return self.n_elite + self.n_general + self.n_mutation + self.n_crossover


@dataclass
class EvalRecord:
    """One agent's evaluation snapshot at a generation boundary.

    ``lineage`` is the value that entered the comprehensive blend, i.e.
    the pre-update lineage; rank 1 is the best raw score.
    """

    agent_id: int
    raw_score: float
    norm_score: float
    lineage: float
    comprehensive: float
    rank: int


def _minmax(values: np.ndarray) -> np.ndarray:
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.full(values.shape, 0.5)
    return (values - lo) / (hi - lo)


def normalize_scores(raw_scores) -> np.ndarray:
    """Min-max normalize raw scores into [0, 1]; all-equal input maps to 0.5."""
    raw = np.asarray(raw_scores, dtype=np.float64)
    if raw.size < 1:
        raise ValueError("need at least one score")
    if not np.isfinite(raw).all():
        raise ValueError("scores must be finite")
    return _minmax(raw)


def comprehensive_evaluation(norm_scores, lineages, weights: EvalWeights) -> np.ndarray:
    """Blend normalized score and lineage into the selection value."""
    norm = np.asarray(norm_scores, dtype=np.float64)
    lin = np.asarray(lineages, dtype=np.float64)
    if norm.shape != lin.shape:
        raise ValueError("score and lineage vectors must have the same length")
    if norm.size and (norm.min() < 0.0 or norm.max() > 1.0
                      or lin.min() < 0.0 or lin.max() > 1.0):
        raise ValueError("inputs must lie in [0, 1]")
    return weights.performance_weight * norm + weights.lineage_weight * lin


def rank_by_performance(raw_scores) -> np.ndarray:
    """Dense 1..n ranks on raw scores: rank 1 is the highest score, ties go
    to the lower agent id."""
    raw = np.asarray(raw_scores, dtype=np.float64)
    order = sorted(range(raw.size), key=lambda i: (-raw[i], i))
    ranks = np.empty(raw.size, dtype=np.int64)
    for position, agent_id in enumerate(order):
        ranks[agent_id] = position + 1
    return ranks


def lineage_update(old_lineage, ranks, carry_over: float) -> np.ndarray:
    """New lineage values from ranks and decayed old lineage.

    The per-agent increment is (n - rank + 1)/n, so the best agent gets 1
    and every increment is positive. The increment plus carry_over times
    the old value is then min-max normalized across the population
    (all-equal maps to 0.5).
    """
    old = np.asarray(old_lineage, dtype=np.float64)
    ranks = np.asarray(ranks, dtype=np.int64)
    n = old.size
    if ranks.shape != old.shape:
        raise ValueError("lineage and rank vectors must have the same length")
    if n and (sorted(ranks.tolist()) != list(range(1, n + 1))):
        raise ValueError("ranks must be a permutation of 1..n")
    increment = (n - ranks + 1) / n
    return _minmax(increment + old * carry_over)


def partition_population(comprehensive, plan: PartitionPlan):
    """Split agent ids into (elite, general, mutation, crossover) by
    descending comprehensive value, ties broken by lower id.

    The worst agents fill the mutation slots first, then the crossover
    slots.
    """
    values = np.asarray(comprehensive, dtype=np.float64)
    if plan.population_size != values.size:
        raise ValueError(f"plan covers {plan.population_size} agents, "
                         f"population has {values.size}")
    order = sorted(range(values.size), key=lambda i: (-values[i], i))
    a = plan.n_elite
    b = a + plan.n_general
    c = b + plan.n_mutation
    return (order[:a], order[a:b], order[b:c], order[c:])
