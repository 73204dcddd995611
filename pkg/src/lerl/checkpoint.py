"""Binary agent checkpoints.

One file per agent, little-endian throughout:

    magic   4 bytes  b"LERL"
    version u32      currently 1
    layers  u32      layer count
    dims    per layer: rows u32, cols u32
    params  per layer: weights row-major f64, then bias f64
    lineage f64
    seed    u64      the agent's RNG seed

Replay buffers and step counters are not persisted; a restored agent
starts a fresh stream from its stored seed. Round trips are byte-exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .agent import DQNConfig, QAgent
from .net import LayeredNet

MAGIC = b"LERL"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Malformed checkpoint file; message carries the byte offset."""


def save_agent(agent: QAgent, path: str | Path) -> None:
    net = agent.online
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, net.layer_count)]
    for w in net.weights:
        parts.append(struct.pack("<II", w.shape[0], w.shape[1]))
    for w, b in zip(net.weights, net.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.asarray(b, dtype="<f8").tobytes())
    parts.append(struct.pack("<d", agent.lineage))
    parts.append(struct.pack("<Q", agent.seed % 2 ** 64))
    Path(path).write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes, name: str):
        self.data = data
        self.name = name
        self.offset = 0

    def take(self, count: int, what: str) -> bytes:
        if self.offset + count > len(self.data):
            raise CheckpointError(
                f"{self.name}: truncated reading {what} at offset {self.offset} "
                f"(need {count} bytes, have {len(self.data) - self.offset})")
        chunk = self.data[self.offset:self.offset + count]
        self.offset += count
        return chunk

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def f64_array(self, count: int, what: str) -> np.ndarray:
        raw = self.take(count * 8, what)
        return np.frombuffer(raw, dtype="<f8").astype(np.float64)


def load_agent(path: str | Path, config: DQNConfig | None = None,
               partition_index: int | None = None) -> QAgent:
    """Rebuild an agent from a checkpoint file.

    The file stores only network parameters, lineage, and the RNG seed;
    the learner config and partition index come from the caller (the run
    config snapshot in practice) and default to the stock DQNConfig.
    """
    config = config if config is not None else DQNConfig()
    if partition_index is None:
        partition_index = config.partition_index
    path = Path(path)
    r = _Reader(path.read_bytes(), path.name)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise CheckpointError(f"{path.name}: bad magic {magic!r} at offset 0")
    version = r.u32("version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path.name}: unsupported format version {version} "
                              f"at offset 4 (supported: {FORMAT_VERSION})")
    layer_count = r.u32("layer count")
    if layer_count < 1:
        raise CheckpointError(f"{path.name}: zero layers at offset 8")
    dims = [(r.u32(f"layer {i} rows"), r.u32(f"layer {i} cols"))
            for i in range(layer_count)]
    weights = []
    biases = []
    for i, (rows, cols) in enumerate(dims):
        weights.append(r.f64_array(rows * cols, f"layer {i} weights").reshape(rows, cols))
        biases.append(r.f64_array(rows, f"layer {i} bias"))
    lineage = struct.unpack("<d", r.take(8, "lineage"))[0]
    seed = struct.unpack("<Q", r.take(8, "seed"))[0]
    if r.offset != len(r.data):
        raise CheckpointError(f"{path.name}: {len(r.data) - r.offset} trailing bytes "
                              f"at offset {r.offset}")

    net = LayeredNet(weights, biases, partition_index)
    agent = QAgent.from_net(net, config, seed)
    agent.lineage = lineage
    return agent


def checkpoint_population(population: list[QAgent], directory: str | Path) -> list[Path]:
    """Write one agent_NNN.lerl file per agent; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, agent in enumerate(population):
        path = directory / f"agent_{i:03d}.lerl"
        save_agent(agent, path)
        paths.append(path)
    return paths


def restore_population(directory: str | Path, config: DQNConfig | None = None,
                       partition_index: int | None = None) -> list[QAgent]:
    """Load every agent_*.lerl under ``directory`` in id order.

    Raises before returning anything if any file is malformed, so a
    partially valid directory never yields a partial population.
    """
    directory = Path(directory)
    files = sorted(directory.glob("agent_*.lerl"))
    if not files:
        raise CheckpointError(f"no agent_*.lerl files in {directory}")
    return [load_agent(path, config, partition_index) for path in files]
