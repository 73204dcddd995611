"""Toy MDPs behind one small environment interface.

Two environments, both with flat one-hot observations:

GridWorld
    N x N deterministic grid. Start at cell 0 (top-left), goal at cell
    N*N-1 (bottom-right). Moves off the edge keep the agent in place.
    Reward 0 per step, +1 on reaching the goal (terminal). Episode cap
    4*N*N steps.

ChainWalk
    Line of L cells, start at the middle cell L//2. Two actions
    (left/right); with probability ``slip_probability`` the executed
    action is inverted. Reaching the right end pays +1 and terminates;
    every other step costs 0.01. The left end just clamps. Episode cap
    4*L steps.

Transitions depend only on (current state, action): replaying a state
and action always produces the same result distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .agent import QAgent


@dataclass(frozen=True)
class EnvSpec:
    """Static facts about an environment instance."""

    observation_dim: int
    action_count: int
    max_episode_steps: int
    discount: float = 0.99

    def __post_init__(self):
        if self.observation_dim < 1:
            raise ValueError("observation_dim must be >= 1")
        if self.action_count < 2:
            raise ValueError("action_count must be >= 2")
        if self.max_episode_steps < 1:
            raise ValueError("max_episode_steps must be >= 1")
        if not 0.0 < self.discount <= 1.0:
            raise ValueError("discount must be in (0, 1]")


@dataclass
class StepResult:
    next_observation: np.ndarray
    reward: float
    terminal: bool


class GridWorld:
    """Deterministic N x N grid, cells indexed row-major."""

    UP, RIGHT, DOWN, LEFT = 0, 1, 2, 3

    def __init__(self, side: int, discount: float = 0.99):
        if side < 2:
            raise ValueError("side must be >= 2")
        self.side = side
        self.start = 0
        self.goal = side * side - 1
        self.spec = EnvSpec(observation_dim=side * side, action_count=4,
                            max_episode_steps=4 * side * side, discount=discount)
        self.position = self.start
        self._steps = 0
        self._needs_reset = True

    def seed(self, rng: np.random.Generator) -> None:
        # Deterministic environment; kept for interface symmetry.
        pass

    def observe(self) -> np.ndarray:
        obs = np.zeros(self.spec.observation_dim)
        obs[self.position] = 1.0
        return obs

    def reset(self) -> np.ndarray:
        self.position = self.start
        self._steps = 0
        self._needs_reset = False
        return self.observe()

    @property
    def needs_reset(self) -> bool:
        return self._needs_reset

    def step(self, action: int) -> StepResult:
        if self._needs_reset:
            raise RuntimeError("step() on a terminal environment; call reset() first")
        if not 0 <= action < self.spec.action_count:
            raise ValueError(f"action {action} out of range [0, {self.spec.action_count})")
        row, col = divmod(self.position, self.side)
        if action == self.UP:
            row = max(row - 1, 0)
        elif action == self.RIGHT:
            col = min(col + 1, self.side - 1)
        elif action == self.DOWN:
            row = min(row + 1, self.side - 1)
        else:
            col = max(col - 1, 0)
        self.position = row * self.side + col
        self._steps += 1
        reached_goal = self.position == self.goal
        reward = 1.0 if reached_goal else 0.0
        terminal = reached_goal or self._steps >= self.spec.max_episode_steps
        if terminal:
            self._needs_reset = True
        return StepResult(self.observe(), reward, terminal)


class ChainWalk:
    """Stochastic 1-D chain with action slips."""

    LEFT, RIGHT = 0, 1
    STEP_PENALTY = -0.01

    def __init__(self, length: int, slip_probability: float = 0.0,
                 discount: float = 0.99, rng: np.random.Generator | None = None):
        if length < 2:
            raise ValueError("length must be >= 2")
        if not 0.0 <= slip_probability < 1.0:
            raise ValueError("slip_probability must be in [0, 1)")
        self.length = length
        self.slip_probability = slip_probability
        self.start = length // 2
        self.spec = EnvSpec(observation_dim=length, action_count=2,
                            max_episode_steps=4 * length, discount=discount)
        self.rng = rng if rng is not None else np.random.default_rng()
        self.position = self.start
        self._steps = 0
        self._needs_reset = True

    def seed(self, rng: np.random.Generator) -> None:
        self.rng = rng

    def observe(self) -> np.ndarray:
        obs = np.zeros(self.length)
        obs[self.position] = 1.0
        return obs

    def reset(self) -> np.ndarray:
        self.position = self.start
        self._steps = 0
        self._needs_reset = False
        return self.observe()

    @property
    def needs_reset(self) -> bool:
        return self._needs_reset

    def step(self, action: int) -> StepResult:
        if self._needs_reset:
            raise RuntimeError("step() on a terminal environment; call reset() first")
        if not 0 <= action < self.spec.action_count:
            raise ValueError(f"action {action} out of range [0, {self.spec.action_count})")
        executed = action
        if self.slip_probability > 0.0 and self.rng.random() < self.slip_probability:
            executed = 1 - action
        if executed == self.RIGHT:
            self.position = min(self.position + 1, self.length - 1)
        else:
            self.position = max(self.position - 1, 0)
        self._steps += 1
        at_goal = self.position == self.length - 1
        reward = 1.0 if at_goal else self.STEP_PENALTY
        terminal = at_goal or self._steps >= self.spec.max_episode_steps
        if terminal:
            self._needs_reset = True
        return StepResult(self.observe(), reward, terminal)


def make_env(name: str, *, rng: np.random.Generator | None = None, **params):
    """Build an environment from config-file fields."""
    if name == "gridworld":
        return GridWorld(**params)
    if name == "chainwalk":
        return ChainWalk(rng=rng, **params)
    raise ValueError(f"unknown environment {name!r}")


def evaluate_deterministic(agent: "QAgent", env, episodes: int,
                           rng: np.random.Generator | None = None) -> float:
    """Mean undiscounted return of greedy (argmax-Q) episodes.

    ``rng`` replaces the environment's stream for the evaluation so that
    scoring never consumes training randomness. Greedy action choice
    itself draws nothing.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    if rng is not None:
        env.seed(rng)
    net = agent.online
    total = 0.0
    for _ in range(episodes):
        obs = env.reset()
        episode_return = 0.0
        while True:
            action = int(np.argmax(net.forward(obs)))
            result = env.step(action)
            episode_return += result.reward
            if result.terminal:
                break
            obs = result.next_observation
        total += episode_return
    return total / episodes
