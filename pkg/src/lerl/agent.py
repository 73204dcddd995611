"""Minimal DQN learner: replay buffer, epsilon-greedy policy, manual gradients.

The loss for a batch is the mean squared temporal-difference error

    mean_i (r_i + discount * (1 - done_i) * max_a' q_target(s'_i, a') - q(s_i, a_i))^2

with the target network treated as a constant. Gradients flow only
through the q(s_i, a_i) coordinate of the online network and are derived
by hand for the dense layers, which keeps the finite-difference oracle
in the tests meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .net import LayeredNet, glorot_init


@dataclass
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


class ReplayBuffer:
    """Ring buffer over transitions; insertion beyond capacity evicts oldest."""

    def __init__(self, capacity: int, observation_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.states = np.zeros((capacity, observation_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, observation_dim))
        self.dones = np.zeros(capacity, dtype=bool)
        self.size = 0
        self._cursor = 0

    def push(self, state: np.ndarray, action: int, reward: float,
             next_state: np.ndarray, done: bool) -> None:
        i = self._cursor
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.dones[i] = done
        self._cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def push_transition(self, t: Transition) -> None:
        self.push(t.state, t.action, t.reward, t.next_state, t.done)

    def contents(self) -> list[Transition]:
        """Stored transitions, oldest first."""
        if self.size < self.capacity:
            order = range(self.size)
        else:
            order = [(self._cursor + k) % self.capacity for k in range(self.capacity)]
        return [Transition(self.states[i].copy(), int(self.actions[i]),
                           float(self.rewards[i]), self.next_states[i].copy(),
                           bool(self.dones[i])) for i in order]

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.size, size=batch_size)


@dataclass(frozen=True)
class DQNConfig:
    discount: float = 0.99
    learning_rate: float = 1e-3
    batch_size: int = 32
    buffer_capacity: int = 10_000
    target_sync_interval: int = 100
    warmup_steps: int = 500
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_steps: int = 20_000
    hidden_sizes: tuple[int, ...] = (64, 64)
    partition_index: int = 1

    def __post_init__(self):
        # [0, 1]: the degenerate discount 0 (pure reward regression) is a
        # legitimate learner setting, unlike for environment returns.
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must be in [0, 1]")
        if self.learning_rate < 0.0:
            raise ValueError("learning_rate must be nonnegative")
        if not self.epsilon_start >= self.epsilon_end >= 0.0:
            raise ValueError("need epsilon_start >= epsilon_end >= 0")
        if self.batch_size > self.warmup_steps:
            raise ValueError("batch_size must not exceed warmup_steps")
        if self.batch_size < 1 or self.buffer_capacity < 1:
            raise ValueError("batch_size and buffer_capacity must be >= 1")
        if self.target_sync_interval < 1 or self.epsilon_decay_steps < 1:
            raise ValueError("target_sync_interval and epsilon_decay_steps must be >= 1")
        if not self.hidden_sizes:
            raise ValueError("need at least one hidden layer")
        if not 1 <= self.partition_index <= len(self.hidden_sizes):
            raise ValueError("partition_index must fall inside the layer stack")


def epsilon_at(config: DQNConfig, env_steps: int) -> float:
    """Linear exploration schedule: start at step 0, end after decay_steps."""
    frac = min(env_steps / config.epsilon_decay_steps, 1.0)
    return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac


class QAgent:
    """One population member: online/target nets, private buffer, private RNG."""

    def __init__(self, observation_dim: int, action_count: int, config: DQNConfig,
                 seed: int):
        self.config = config
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        dims = [observation_dim, *config.hidden_sizes, action_count]
        self.online = glorot_init(dims, config.partition_index, self.rng)
        self.target = self.online.copy()
        self.buffer = ReplayBuffer(config.buffer_capacity, observation_dim)
        self.env_steps = 0
        self.train_steps = 0
        self.lineage = 0.5
        self._episode_return = 0.0

    @classmethod
    def from_net(cls, net: LayeredNet, config: DQNConfig, seed: int) -> "QAgent":
        agent = cls.__new__(cls)
        agent.config = config
        agent.seed = seed
        agent.rng = np.random.default_rng(seed)
        agent.online = net
        agent.target = net.copy()
        agent.buffer = ReplayBuffer(config.buffer_capacity, net.input_dim)
        agent.env_steps = 0
        agent.train_steps = 0
        agent.lineage = 0.5
        agent._episode_return = 0.0
        return agent

    @property
    def action_count(self) -> int:
        return self.online.output_dim


def select_action(agent: QAgent, observation: np.ndarray, epsilon: float) -> int:
    """Epsilon-greedy over online Q-values; argmax ties go to the lowest index."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    if epsilon > 0.0 and agent.rng.random() < epsilon:
        return int(agent.rng.integers(agent.action_count))
    return int(np.argmax(agent.online.forward(observation)))


def td_loss(agent: QAgent, states: np.ndarray, actions: np.ndarray,
            rewards: np.ndarray, next_states: np.ndarray, dones: np.ndarray):
    """Mean squared TD error and its gradient w.r.t. the online parameters.

    Returns (loss, grads) with grads a list of (dW, db) per layer.
    """
    batch = states.shape[0]
    if batch == 0:
        raise ValueError("batch must be non-empty")
    dones = np.asarray(dones, dtype=bool)
    net = agent.online
    max_next = agent.target.forward_batch(next_states).max(axis=1)
    max_next[dones] = 0.0
    targets = rewards + agent.config.discount * max_next

    q, pre, inputs = net.forward_batch_cached(states)
    rows = np.arange(batch)
    residual = q[rows, actions] - targets
    loss = float(residual @ residual) / batch

    # Loss gradient enters only at the taken-action output coordinate.
    grad = np.zeros_like(q)
    grad[rows, actions] = 2.0 * residual / batch

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * net.layer_count
    for layer in range(net.layer_count - 1, -1, -1):
        grads[layer] = (grad.T @ inputs[layer], grad.sum(axis=0))
        if layer > 0:
            grad = (grad @ net.weights[layer]) * (pre[layer - 1] > 0.0)
    return loss, grads


def td_loss_batch(agent: QAgent, batch: list[Transition]):
    """`td_loss` over a list of transitions (convenience for tests/tools)."""
    states = np.stack([t.state for t in batch])
    actions = np.array([t.action for t in batch], dtype=np.int64)
    rewards = np.array([t.reward for t in batch])
    next_states = np.stack([t.next_state for t in batch])
    dones = np.array([t.done for t in batch], dtype=bool)
    return td_loss(agent, states, actions, rewards, next_states, dones)


def train_step(agent: QAgent) -> float | None:
    """One SGD step on a uniformly sampled batch.

    Returns the batch loss, or None (no-op) while the buffer is still
    below warmup_steps.
    """
    cfg = agent.config
    if agent.buffer.size < cfg.warmup_steps:
        return None
    idx = agent.buffer.sample_indices(cfg.batch_size, agent.rng)
    buf = agent.buffer
    loss, grads = td_loss(agent, buf.states[idx], buf.actions[idx],
                          buf.rewards[idx], buf.next_states[idx], buf.dones[idx])
    net = agent.online
    for layer, (dw, db) in enumerate(grads):
        net.weights[layer] -= cfg.learning_rate * dw
        net.biases[layer] -= cfg.learning_rate * db
    agent.train_steps += 1
    if agent.train_steps % cfg.target_sync_interval == 0:
        agent.target.copy_from(net)
    return loss


@dataclass
class IterationStats:
    steps: int
    episodes: int
    mean_return: float  # NaN when no episode finished inside the call


def run_iteration(agent: QAgent, env, iteration_budget: int) -> IterationStats:
    """Interact for exactly iteration_budget env steps, training after each.

    Episodes reset automatically; an episode left unfinished at the end
    of one call continues (and is credited) in the next.
    """
    if iteration_budget < 1:
        raise ValueError("iteration_budget must be >= 1")
    cfg = agent.config
    episodes = 0
    finished_returns: list[float] = []
    if env.needs_reset:
        obs = env.reset()
        agent._episode_return = 0.0
    else:
        obs = env.observe()
    for _ in range(iteration_budget):
        epsilon = epsilon_at(cfg, agent.env_steps)
        action = select_action(agent, obs, epsilon)
        result = env.step(action)
        agent.buffer.push(obs, action, result.reward, result.next_observation,
                          result.terminal)
        agent.env_steps += 1
        agent._episode_return += result.reward
        if result.terminal:
            episodes += 1
            finished_returns.append(agent._episode_return)
            agent._episode_return = 0.0
            obs = env.reset()
        else:
            obs = result.next_observation
        train_step(agent)
    mean_return = float(np.mean(finished_returns)) if finished_returns else float("nan")
    return IterationStats(steps=iteration_budget, episodes=episodes,
                          mean_return=mean_return)


def clone_for_evolution(agent: QAgent, seed: int = 0) -> QAgent:
    """Deep-copy the online network into a fresh agent.

    The clone gets target == online, an empty replay buffer, a fresh RNG
    stream seeded with ``seed``, zeroed step counters, and the parent's
    lineage value (callers apply inheritance decay themselves).
    """
    clone = QAgent.from_net(agent.online.copy(), agent.config, seed)
    clone.lineage = agent.lineage
    return clone
