"""In-memory classification dataset."""

from __future__ import annotations

import csv
from enum import Enum
from pathlib import Path

import numpy as np

from reduce_sim.errors import LabelRangeError, ShapeMismatchError


class Split(str, Enum):
    TRAIN = "train"
    TEST = "test"


class Dataset:
    """Samples x features inputs with integer labels.

    Arrays are made read-only on construction.
    """
    __slots__ = ("inputs", "labels", "num_classes", "split")

    def __init__(
        self,
        inputs: np.ndarray,
        labels: np.ndarray,
        num_classes: int,
        split: Split = Split.TRAIN,
    ) -> None:
        inputs = np.array(inputs, dtype=np.float64, ndmin=2)
        labels = np.array(labels, dtype=np.int64).reshape(-1)
        if inputs.shape[0] != labels.shape[0]:
            raise ShapeMismatchError(
                f"{inputs.shape[0]} input rows but {labels.shape[0]} labels"
            )
        if num_classes < 1:
            raise ValueError(f"num_classes must be >= 1, got {num_classes}")
        if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
            raise LabelRangeError(f"labels must lie in [0, {num_classes})")
        if not np.isfinite(inputs).all():
            raise ValueError("dataset features must be finite")
        inputs.flags.writeable = False
        labels.flags.writeable = False
        self.inputs = inputs
        self.labels = labels
        self.num_classes = num_classes
        self.split = Split(split)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def __repr__(self) -> str:
        return (
            f"Dataset({self.split.value}, samples={len(self)}, "
            f"features={self.num_features}, classes={self.num_classes})"
        )

    @property
    def num_features(self) -> int:
        return int(self.inputs.shape[1])

    def subset(self, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Inputs and labels at ``indices`` (used for mini-batches)."""
        return self.inputs[indices], self.labels[indices]


def dataset_to_csv(dataset: Dataset, path: Path) -> None:
    """One row per sample, label in the last column."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{i}" for i in range(dataset.num_features)] + ["label"])
        for row, label in zip(dataset.inputs, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
