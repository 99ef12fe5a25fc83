"""Shared test fixtures."""

import pytest

from reduce_sim.dataio.synthetic import synth_clusters
from reduce_sim.faultsim.array import ArrayConfig
from reduce_sim.numnet.network import NetworkSpec, init_params
from reduce_sim.numnet.training import TrainConfig, train_unmasked
from reduce_sim.resilience.table import ResilienceEntry, ResilienceTable


@pytest.fixture
def tiny_spec():
    return NetworkSpec(layer_dims=[4, 3, 2])


@pytest.fixture
def small_array():
    """A 4x4 array so fault maps stay readable."""
    return ArrayConfig(rows=4, cols=4)


@pytest.fixture
def cluster_data():
    """Balanced 3-class task: 96 train / 24 test samples."""
    return synth_clusters(num_classes=3, features=6, samples_per_class=40, cluster_spread=0.3, seed=11)


@pytest.fixture
def train_cfg():
    return TrainConfig(learning_rate=0.05, momentum=0.9, batch_size=16, seed=5)


@pytest.fixture
def pretrained(cluster_data, train_cfg):
    """(spec, params) of a [6, 8, 3] network trained fault-free for 15 epochs."""
    train, test = cluster_data
    spec = NetworkSpec(layer_dims=[6, 8, 3])
    params, _ = train_unmasked(init_params(spec, seed=3), train, test, 15, train_cfg)
    return spec, params


def make_table(points, target=0.91, array=None):
    """Hand-built table from {fault_rate: [epochs or None per repeat]}."""
    entries = [ResilienceEntry.from_repeats(rate, epochs) for rate, epochs in sorted(points.items())]
    return ResilienceTable(
        accuracy_target=target,
        array=array or ArrayConfig(rows=4, cols=4),
        network_hash="handmade",
        entries=entries,
        profile_config={},
    )
