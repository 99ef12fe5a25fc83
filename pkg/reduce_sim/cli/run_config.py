"""Run configuration: one JSON document, unknown keys rejected."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from reduce_sim.config import (
    ACCURACY_CONSTRAINT,
    FLEET_SIZE,
    PRETRAIN_EPOCHS,
    PROFILE_MAX_EPOCHS,
    PROFILE_REPEATS,
)
from reduce_sim.dataio.dataset import Dataset, Split
from reduce_sim.dataio.idx import load_idx
from reduce_sim.dataio.synthetic import synth_clusters
from reduce_sim.errors import ConfigFileError, ShapeMismatchError
from reduce_sim.faultsim.array import ArrayConfig
from reduce_sim.fleet.chips import ExplicitRates, RateDistribution, UniformRates
from reduce_sim.numnet.network import NetworkSpec
from reduce_sim.numnet.training import TrainConfig
from reduce_sim.runtime.seeding import derive_seed


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SyntheticSource(_Section):
    kind: Literal["synthetic"] = "synthetic"
    num_classes: int = Field(ge=1)
    features: int = Field(ge=1)
    samples_per_class: int = Field(ge=1)
    cluster_spread: float = Field(default=1.0, ge=0.0)


class IdxSource(_Section):
    kind: Literal["idx"] = "idx"
    train_images: Path
    train_labels: Path
    test_images: Path
    test_labels: Path
    normalize: bool = True


DatasetSource = Annotated[Union[SyntheticSource, IdxSource], Field(discriminator="kind")]


class ProfileSection(_Section):
    fault_rates: list[float] = Field(min_length=1)
    repeats: int = Field(default=PROFILE_REPEATS, ge=1)
    max_epochs: int = Field(default=PROFILE_MAX_EPOCHS, ge=1)


class FleetSection(_Section):
    count: int = Field(default=FLEET_SIZE, ge=1)
    # None: uniform over the profiled fault-rate range
    distribution: RateDistribution | None = None
    max_fixed_epochs: int = Field(default=PROFILE_MAX_EPOCHS, ge=0)
    policies: list[str] = Field(default_factory=lambda: ["reduce:max", "reduce:mean", "fixed:0"])


class RunConfig(_Section):
    network: NetworkSpec
    train: TrainConfig = Field(default_factory=TrainConfig)
    array: ArrayConfig = Field(default_factory=ArrayConfig)
    dataset: DatasetSource
    accuracy_constraint: float | None = Field(default=None, gt=0.0, le=1.0)
    relative_constraint: float | None = Field(default=None, gt=0.0, le=1.0)
    pretrain_epochs: int = Field(default=PRETRAIN_EPOCHS, ge=0)
    profile: ProfileSection
    fleet: FleetSection = Field(default_factory=FleetSection)
    output_dir: Path = Path("runs")
    master_seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _at_most_one_constraint(self) -> RunConfig:
        if self.accuracy_constraint is not None and self.relative_constraint is not None:
            raise ValueError("set at most one of accuracy_constraint and relative_constraint")
        return self

    def seed_for(self, purpose: str) -> int:
        return derive_seed(self.master_seed, purpose)

    def train_cfg_for(self, purpose: str) -> TrainConfig:
        return self.train.model_copy(update={"seed": self.seed_for(purpose)})

    def fleet_distribution(self) -> UniformRates | ExplicitRates:
        if self.fleet.distribution is not None:
            return self.fleet.distribution
        rates = self.profile.fault_rates
        return UniformRates(lo=min(rates), hi=max(rates))

    def resolve_constraint(self, baseline_accuracy: float) -> float:
        """Absolute accuracy constraint, scaling a relative one by the baseline."""
        if self.relative_constraint is not None:
            return self.relative_constraint * baseline_accuracy
        if self.accuracy_constraint is not None:
            return self.accuracy_constraint
        return ACCURACY_CONSTRAINT

    def load_datasets(self) -> tuple[Dataset, Dataset]:
        source = self.dataset
        if isinstance(source, SyntheticSource):
            train, test = synth_clusters(
                source.num_classes,
                source.features,
                source.samples_per_class,
                source.cluster_spread,
                self.seed_for("data"),
            )
        else:
            train = load_idx(source.train_images, source.train_labels, source.normalize, Split.TRAIN)
            test = load_idx(source.test_images, source.test_labels, source.normalize, Split.TEST)
        if train.num_features != self.network.num_features:
            raise ShapeMismatchError(
                f"dataset has {train.num_features} features, network expects {self.network.num_features}"
            )
        num_classes = max(train.num_classes, test.num_classes)
        if num_classes > self.network.num_classes:
            raise ShapeMismatchError(
                f"dataset has {num_classes} classes, network outputs {self.network.num_classes}"
            )
        return train, test


def load_run_config(path: Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigFileError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigFileError(f"config {path} is not valid JSON: {exc}") from exc
    return RunConfig.model_validate(data)
