"""Populations of simulated faulty chips."""

from __future__ import annotations

import logging
from typing import Annotated, Any, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from reduce_sim.faultsim.array import ArrayConfig, FaultMap, fault_rate
from reduce_sim.faultsim.faultgen import generate_fault_map
from reduce_sim.runtime.seeding import derive_seed

logger = logging.getLogger(__name__)


class UniformRates(BaseModel):
    """Chip fault rates drawn uniformly from [lo, hi]."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["uniform"] = "uniform"
    lo: float
    hi: float

    @model_validator(mode="after")
    def _bounds(self) -> UniformRates:
        if not 0.0 <= self.lo <= self.hi <= 1.0:
            raise ValueError(f"uniform bounds must satisfy 0 <= lo <= hi <= 1, got ({self.lo}, {self.hi})")
        return self

    def draw(self, seed: int) -> float:
        return float(np.random.default_rng(seed).uniform(self.lo, self.hi))


class ExplicitRates(BaseModel):
    """Fixed list of chip fault rates, cycled when the fleet is larger."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["explicit"] = "explicit"
    rates: list[float] = Field(min_length=1)

    @model_validator(mode="after")
    def _bounds(self) -> ExplicitRates:
        if any(not 0.0 <= r <= 1.0 for r in self.rates):
            raise ValueError(f"explicit rates must lie in [0, 1], got {self.rates}")
        return self

    def rate_for(self, index: int) -> float:
        return self.rates[index % len(self.rates)]


RateDistribution = Annotated[Union[UniformRates, ExplicitRates], Field(discriminator="kind")]


class ChipRecord:
    """One fabricated chip and its fault map."""
    __slots__ = ("chip_id", "fault_map", "requested_rate")

    def __init__(self, chip_id: str, fault_map: FaultMap, requested_rate: float) -> None:
        self.chip_id = chip_id
        self.fault_map = fault_map
        self.requested_rate = requested_rate

    @property
    def fault_rate(self) -> float:
        return fault_rate(self.fault_map)

    def __repr__(self) -> str:
        return f"ChipRecord({self.chip_id!r}, rate={self.fault_rate:.4f})"

    def serialize(self) -> dict[str, Any]:
        return {
            "chip_id": self.chip_id,
            "requested_rate": self.requested_rate,
            "fault_rate": self.fault_rate,
            "fault_map": self.fault_map.to_dict(),
        }


def chip_id_for(index: int) -> str:
    return f"chip-{index:04d}"


def generate_fleet(
    array_cfg: ArrayConfig,
    count: int,
    distribution: UniformRates | ExplicitRates,
    seed: int,
) -> list[ChipRecord]:
    """Chips with independent fault maps; chip i uses seed derive_seed(seed, i)."""
    if count < 1:
        raise ValueError(f"fleet size must be >= 1, got {count}")
    chips = []
    for index in range(count):
        chip_seed = derive_seed(seed, index)
        if isinstance(distribution, UniformRates):
            rate = distribution.draw(derive_seed(chip_seed, "rate"))
        else:
            rate = distribution.rate_for(index)
        fault_map = generate_fault_map(array_cfg, rate, chip_seed)
        chips.append(ChipRecord(chip_id_for(index), fault_map, rate))
    logger.info("Generated fleet of %d chips on a %dx%d array", count, array_cfg.rows, array_cfg.cols)
    return chips
