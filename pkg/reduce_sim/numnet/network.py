"""Feedforward ReLU classifier backed by NumPy arrays."""

from __future__ import annotations

import hashlib
import json
from enum import Enum
from typing import TYPE_CHECKING, Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from reduce_sim.errors import EmptyDatasetError, LabelRangeError, ShapeMismatchError

if TYPE_CHECKING:
    from reduce_sim.dataio.dataset import Dataset
    from reduce_sim.faultsim.masks import MaskSet


class Activation(str, Enum):
    RELU = "relu"


class NetworkSpec(BaseModel):
    """Layer widths from input features to class count."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    layer_dims: list[int] = Field(min_length=2)
    activation: Activation = Activation.RELU

    @field_validator("layer_dims")
    @classmethod
    def _dims_positive(cls, dims: list[int]) -> list[int]:
        if any(d < 1 for d in dims):
            raise ValueError(f"layer dims must be >= 1, got {dims}")
        return dims

    @property
    def num_classes(self) -> int:
        return self.layer_dims[-1]

    @property
    def num_features(self) -> int:
        return self.layer_dims[0]

    def weight_shapes(self) -> list[tuple[int, int]]:
        return list(zip(self.layer_dims[:-1], self.layer_dims[1:]))

    def spec_hash(self) -> str:
        """Short stable digest recorded in resilience tables."""
        payload = json.dumps({"layer_dims": self.layer_dims, "activation": self.activation.value})
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


class NetworkParams:
    """Weights and biases of every layer.

    ``weights[l]`` has rows indexed by input feature and columns by output
    neuron, the layout the systolic array maps onto PEs.
    """
    __slots__ = ("weights", "biases")

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]) -> None:
        if len(weights) != len(biases):
            raise ShapeMismatchError(
                f"{len(weights)} weight matrices but {len(biases)} bias vectors"
            )
        for layer, (w, b) in enumerate(zip(weights, biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ShapeMismatchError(
                    f"layer {layer}: weight {w.shape} incompatible with bias {b.shape}"
                )
            if layer and weights[layer - 1].shape[1] != w.shape[0]:
                raise ShapeMismatchError(
                    f"layer {layer}: expects {w.shape[0]} inputs, "
                    f"previous layer produces {weights[layer - 1].shape[1]}"
                )
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]

    @property
    def layer_dims(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> NetworkParams:
        return NetworkParams(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )

    def is_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in (*self.weights, *self.biases))

    def equals(self, other: NetworkParams) -> bool:
        """Bit-exact comparison of every array."""
        if self.layer_dims != other.layer_dims:
            return False
        return all(
            np.array_equal(a, b)
            for a, b in zip((*self.weights, *self.biases), (*other.weights, *other.biases))
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "layer_dims": self.layer_dims,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> NetworkParams:
        params = cls(
            [np.array(w, dtype=np.float64).reshape(len(w), -1) for w in data["weights"]],
            [np.array(b, dtype=np.float64) for b in data["biases"]],
        )
        if params.layer_dims != list(data["layer_dims"]):
            raise ShapeMismatchError(
                f"layer_dims {data['layer_dims']} disagree with arrays {params.layer_dims}"
            )
        if not params.is_finite():
            raise ValueError("network parameters contain non-finite values")
        return params


def init_params(spec: NetworkSpec, seed: int) -> NetworkParams:
    """Zero-mean normal weights scaled by 1/sqrt(fan_in), zero biases."""
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in spec.weight_shapes():
        weights.append(rng.standard_normal((fan_in, fan_out)) / np.sqrt(fan_in))
        biases.append(np.zeros(fan_out))
    return NetworkParams(weights, biases)


def _check_inputs(params: NetworkParams, inputs: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    if x.shape[1] != params.weights[0].shape[0]:
        raise ShapeMismatchError(
            f"inputs have {x.shape[1]} features, network expects {params.weights[0].shape[0]}"
        )
    return x


def _forward_cache(
    params: NetworkParams, x: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
    """Return (layer inputs, hidden pre-activations, output logits)."""
    layer_inputs = []
    pre_activations = []
    h = x
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        layer_inputs.append(h)
        z = h @ w + b
        pre_activations.append(z)
        h = np.maximum(z, 0.0)
    layer_inputs.append(h)
    logits = h @ params.weights[-1] + params.biases[-1]
    return layer_inputs, pre_activations, logits


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def forward(params: NetworkParams, inputs: np.ndarray) -> np.ndarray:
    """Class probabilities, one row per sample."""
    x = _check_inputs(params, inputs)
    _, _, logits = _forward_cache(params, x)
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def loss_and_grads(
    params: NetworkParams, inputs: np.ndarray, labels: np.ndarray
) -> tuple[float, NetworkParams]:
    """Mean cross-entropy and its gradient, shaped like ``params``."""
    x = _check_inputs(params, inputs)
    y = np.asarray(labels, dtype=np.int64).reshape(-1)
    if y.shape[0] != x.shape[0]:
        raise ShapeMismatchError(f"{x.shape[0]} samples but {y.shape[0]} labels")
    if x.shape[0] == 0:
        raise EmptyDatasetError("cannot compute a loss on an empty batch")
    num_classes = params.weights[-1].shape[1]
    if y.size and (y.min() < 0 or y.max() >= num_classes):
        raise LabelRangeError(f"labels must lie in [0, {num_classes})")

    layer_inputs, pre_activations, logits = _forward_cache(params, x)
    n = x.shape[0]
    log_probs = _log_softmax(logits)
    loss = float(-log_probs[np.arange(n), y].mean())

    # d(loss)/d(logits) for softmax + cross-entropy
    delta = np.exp(log_probs)
    delta[np.arange(n), y] -= 1.0
    delta /= n

    grad_w: list[np.ndarray] = [np.empty(0)] * params.num_layers
    grad_b: list[np.ndarray] = [np.empty(0)] * params.num_layers
    for layer in range(params.num_layers - 1, -1, -1):
        grad_w[layer] = layer_inputs[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer:
            delta = (delta @ params.weights[layer].T) * (pre_activations[layer - 1] > 0.0)
    return loss, NetworkParams(grad_w, grad_b)


def predict(params: NetworkParams, inputs: np.ndarray) -> np.ndarray:
    # argmax returns the first maximum, so ties go to the lowest class index
    return np.argmax(forward(params, inputs), axis=1)


def evaluate(params: NetworkParams, data: Dataset) -> float:
    """Fraction of samples whose predicted class equals the label."""
    if len(data) == 0:
        raise EmptyDatasetError("cannot evaluate on an empty dataset")
    return float(np.mean(predict(params, data.inputs) == data.labels))


def apply_mask(params: NetworkParams, masks: MaskSet) -> NetworkParams:
    """Zero every weight whose mask entry is 0. Biases are never masked."""
    masks.check_compatible(params)
    return NetworkParams(
        [np.where(m != 0, w, 0.0) for w, m in zip(params.weights, masks.layers)],
        [b.copy() for b in params.biases],
    )
