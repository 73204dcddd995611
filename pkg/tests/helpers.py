"""Shared test utilities: tiny agents, parameter snapshots, comparisons."""

from __future__ import annotations

import numpy as np

from lerl import DQNConfig, LayeredNet, QAgent


def tiny_config(**overrides) -> DQNConfig:
    base = dict(discount=0.9, learning_rate=1e-2, batch_size=4,
                buffer_capacity=64, target_sync_interval=10, warmup_steps=4,
                epsilon_start=1.0, epsilon_end=0.05, epsilon_decay_steps=200,
                hidden_sizes=(8,), partition_index=1)
    base.update(overrides)
    return DQNConfig(**base)


def tiny_agent(obs_dim=3, actions=2, seed=0, **overrides) -> QAgent:
    return QAgent(obs_dim, actions, tiny_config(**overrides), seed=seed)


def net_from_q(bias: np.ndarray, obs_dim: int) -> LayeredNet:
    """Net whose output is constant: zero weights, fixed output bias."""
    actions = len(bias)
    return LayeredNet(
        [np.zeros((2, obs_dim)), np.zeros((actions, 2))],
        [np.zeros(2), np.asarray(bias, dtype=np.float64)],
        partition_index=1)


def agent_with_q(bias, obs_dim=3, seed=0, **overrides) -> QAgent:
    return QAgent.from_net(net_from_q(np.asarray(bias, dtype=np.float64), obs_dim),
                           tiny_config(**overrides), seed=seed)


def snapshot_params(agent: QAgent) -> list[np.ndarray]:
    out = []
    for net in (agent.online, agent.target):
        out.extend(w.copy() for w in net.weights)
        out.extend(b.copy() for b in net.biases)
    return out


def params_equal(agent: QAgent, snapshot: list[np.ndarray]) -> bool:
    current = []
    for net in (agent.online, agent.target):
        current.extend(net.weights)
        current.extend(net.biases)
    return all(np.array_equal(a, b) for a, b in zip(current, snapshot))


def nets_equal(a: LayeredNet, b: LayeredNet) -> bool:
    return (all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))
            and all(np.array_equal(x, y) for x, y in zip(a.biases, b.biases)))


def random_net(rng: np.random.Generator, dims, partition_index=1,
               scale=0.5) -> LayeredNet:
    weights = [rng.normal(scale=scale, size=(o, i))
               for i, o in zip(dims[:-1], dims[1:])]
    biases = [rng.normal(scale=scale, size=o) for o in dims[1:]]
    return LayeredNet(weights, biases, partition_index)
