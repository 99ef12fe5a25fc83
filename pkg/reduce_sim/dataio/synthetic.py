"""Seeded Gaussian-cluster classification data."""

from __future__ import annotations

import numpy as np

from reduce_sim.config import CLUSTER_CENTER_SCALE, TEST_EVERY
from reduce_sim.dataio.dataset import Dataset, Split


def synth_clusters(
    num_classes: int,
    features: int,
    samples_per_class: int,
    cluster_spread: float,
    seed: int,
) -> tuple[Dataset, Dataset]:
    """Generate (train, test) datasets of Gaussian blobs.

    Samples are interleaved class by class (0, 1, ..., K-1, 0, 1, ...) and
    every ``TEST_EVERY``-th sample goes to the test split, giving an 80/20
    split that needs no extra randomness.
    """
    if min(num_classes, features, samples_per_class) < 1:
        raise ValueError("num_classes, features and samples_per_class must be >= 1")
    if cluster_spread < 0:
        raise ValueError(f"cluster_spread must be >= 0, got {cluster_spread}")

    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((num_classes, features)) * CLUSTER_CENTER_SCALE
    noise = rng.standard_normal((samples_per_class, num_classes, features))

    # [sample, class, feature] flattened in C order interleaves the classes
    inputs = (centers[np.newaxis, :, :] + cluster_spread * noise).reshape(-1, features)
    labels = np.tile(np.arange(num_classes), samples_per_class)

    is_test = (np.arange(labels.shape[0]) % TEST_EVERY) == TEST_EVERY - 1
    train = Dataset(inputs[~is_test], labels[~is_test], num_classes, Split.TRAIN)
    test = Dataset(inputs[is_test], labels[is_test], num_classes, Split.TEST)
    return train, test

