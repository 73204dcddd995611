"""Dense Q-network with an explicit perception/thinking split.

The network is a plain MLP: rectified hidden layers, identity output.
Layers below ``partition_index`` form the perception block (feature
extraction), the rest form the thinking block (decision). Evolution
operators swap or perturb whole blocks, so the split is part of the
network's identity, not a training detail.

Gradients are derived by hand (see ``lerl.agent.td_loss``); this module
only stores parameters and runs forward passes.
"""

from __future__ import annotations

import numpy as np


class LayeredNet:
    """Ordered dense layers: weights[i] is (out, in), biases[i] is (out,).

    Invariants checked at construction: consecutive shapes compose,
    all parameters finite, 1 <= partition_index < layer_count.
    """

    __slots__ = ("weights", "biases", "partition_index")

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray],
                 partition_index: int = 1):
        if len(weights) != len(biases) or not weights:
            raise ValueError("need one bias per weight matrix and at least one layer")
        if not 1 <= partition_index < len(weights):
            raise ValueError(f"partition_index {partition_index} outside [1, {len(weights) - 1}]")
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
                raise ValueError(f"layer {i}: weight {w.shape} incompatible with bias {b.shape}")
            if i > 0 and w.shape[1] != weights[i - 1].shape[0]:
                raise ValueError(f"layer {i}: input dim {w.shape[1]} does not match "
                                 f"previous output dim {weights[i - 1].shape[0]}")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise ValueError(f"layer {i}: non-finite parameters")
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]
        self.partition_index = partition_index

    # ---- structure -------------------------------------------------

    @property
    def layer_count(self) -> int:
        return len(self.weights)

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    def shapes(self) -> list[tuple[int, int]]:
        return [w.shape for w in self.weights]

    def same_architecture(self, other: "LayeredNet") -> bool:
        return (self.shapes() == other.shapes()
                and self.partition_index == other.partition_index)

    def copy(self) -> "LayeredNet":
        return LayeredNet([w.copy() for w in self.weights],
                          [b.copy() for b in self.biases],
                          self.partition_index)

    def copy_from(self, other: "LayeredNet") -> None:
        """Overwrite parameters in place (target-network sync)."""
        for w, b, ow, ob in zip(self.weights, self.biases, other.weights, other.biases):
            np.copyto(w, ow)
            np.copyto(b, ob)

    # ---- forward ---------------------------------------------------

    def forward(self, observation: np.ndarray) -> np.ndarray:
        """Q-values for a single observation vector."""
        x = np.asarray(observation, dtype=np.float64)
        if x.shape != (self.input_dim,):
            raise ValueError(f"observation shape {x.shape}, expected ({self.input_dim},)")
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            x = np.maximum(w @ x + b, 0.0)
        return self.weights[-1] @ x + self.biases[-1]

    def forward_batch(self, observations: np.ndarray) -> np.ndarray:
        """Q-values for a (batch, input_dim) matrix."""
        x = observations
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            x = np.maximum(x @ w.T + b, 0.0)
        return x @ self.weights[-1].T + self.biases[-1]

    def forward_batch_cached(self, observations: np.ndarray):
        """Forward pass keeping pre-activations and layer inputs for backprop.

        Returns (q, pre_activations, layer_inputs) where layer_inputs[i] is
        what layer i consumed and pre_activations[i] is W_i x + b_i before
        the rectifier (last layer has no rectifier).
        """
        inputs = [observations]
        pre = []
        x = observations
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            z = x @ w.T + b
            pre.append(z)
            x = np.maximum(z, 0.0)
            inputs.append(x)
        q = x @ self.weights[-1].T + self.biases[-1]
        pre.append(q)
        return q, pre, inputs


def glorot_init(layer_dims: list[int], partition_index: int,
                rng: np.random.Generator) -> LayeredNet:
    """Fresh network with uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases."""
    weights = []
    biases = []
    for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return LayeredNet(weights, biases, partition_index)
