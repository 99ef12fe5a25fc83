"""Masked mini-batch SGD with momentum."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from reduce_sim.config import BATCH_SIZE, LEARNING_RATE, MOMENTUM
from reduce_sim.errors import ShapeMismatchError
from reduce_sim.numnet.network import NetworkParams, apply_mask, evaluate, loss_and_grads

if TYPE_CHECKING:
    from reduce_sim.dataio.dataset import Dataset
    from reduce_sim.faultsim.masks import MaskSet

logger = logging.getLogger(__name__)


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    learning_rate: float = Field(default=LEARNING_RATE, gt=0.0)
    momentum: float = Field(default=MOMENTUM, ge=0.0, lt=1.0)
    batch_size: int = Field(default=BATCH_SIZE, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)


class EpochTrace(BaseModel):
    """Test accuracy after k epochs; entry 0 is before any training."""

    model_config = ConfigDict(frozen=True)

    accuracies: list[float] = Field(min_length=1)

    @property
    def epochs(self) -> int:
        return len(self.accuracies) - 1

    @property
    def final_accuracy(self) -> float:
        return self.accuracies[-1]


class MomentumSGD:
    """Classical momentum: v <- mu*v - lr*g; w <- w + v.

    After each step weights are projected back onto the mask so pruned
    positions stay exactly zero.
    """

    def __init__(self, params: NetworkParams, cfg: TrainConfig, masks: MaskSet | None = None) -> None:
        self.params = params
        self.lr = cfg.learning_rate
        self.momentum = cfg.momentum
        self.masks = masks
        self.velocity_w = [np.zeros_like(w) for w in params.weights]
        self.velocity_b = [np.zeros_like(b) for b in params.biases]

    def step(self, grads: NetworkParams) -> None:
        p = self.params
        for layer in range(p.num_layers):
            self.velocity_w[layer] = self.momentum * self.velocity_w[layer] - self.lr * grads.weights[layer]
            self.velocity_b[layer] = self.momentum * self.velocity_b[layer] - self.lr * grads.biases[layer]
            weights = p.weights[layer] + self.velocity_w[layer]
            if self.masks is not None:
                weights = np.where(self.masks.layers[layer] != 0, weights, 0.0)
            p.weights[layer] = weights
            p.biases[layer] = p.biases[layer] + self.velocity_b[layer]


def _epoch_order(num_samples: int, seed: int, epoch: int) -> np.ndarray:
    rng = np.random.default_rng([seed, epoch])
    return rng.permutation(num_samples)


def train_masked(
    params: NetworkParams,
    masks: MaskSet | None,
    train_data: Dataset,
    test_data: Dataset,
    epochs: int,
    cfg: TrainConfig,
) -> tuple[NetworkParams, EpochTrace]:
    """Fault-aware retraining: SGD with masked weights held at zero.

    The input params are never modified. ``masks=None`` trains without
    pruning and matches an all-ones mask bit for bit.
    """
    if epochs < 0:
        raise ValueError(f"epochs must be >= 0, got {epochs}")
    if train_data.num_features != params.layer_dims[0] or test_data.num_features != params.layer_dims[0]:
        raise ShapeMismatchError(
            f"datasets have {train_data.num_features}/{test_data.num_features} features, "
            f"network expects {params.layer_dims[0]}"
        )
    if epochs and cfg.batch_size > len(train_data):
        raise ValueError(
            f"batch_size {cfg.batch_size} exceeds training set size {len(train_data)}"
        )

    current = apply_mask(params, masks) if masks is not None else params.copy()
    accuracies = [evaluate(current, test_data)]
    optimizer = MomentumSGD(current, cfg, masks)

    n = len(train_data)
    for epoch in range(epochs):
        order = _epoch_order(n, cfg.seed, epoch)
        for start in range(0, n, cfg.batch_size):
            inputs, labels = train_data.subset(order[start:start + cfg.batch_size])
            _, grads = loss_and_grads(current, inputs, labels)
            optimizer.step(grads)
        accuracies.append(evaluate(current, test_data))
        logger.debug("epoch %d/%d: accuracy %.4f", epoch + 1, epochs, accuracies[-1])

    return current, EpochTrace(accuracies=accuracies)


def train_unmasked(
    params: NetworkParams,
    train_data: Dataset,
    test_data: Dataset,
    epochs: int,
    cfg: TrainConfig,
) -> tuple[NetworkParams, EpochTrace]:
    """Fault-free training, used to produce the pre-trained network."""
    return train_masked(params, None, train_data, test_data, epochs, cfg)
