"""Fault-injection profiling: retraining curves across fault rates and repeats."""

from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, Field, field_validator

from reduce_sim.config import PROFILE_MAX_EPOCHS, PROFILE_REPEATS
from reduce_sim.faultsim.faultgen import faults_for_rate, generate_fault_map, realized_rate
from reduce_sim.faultsim.masks import derive_maskset
from reduce_sim.numnet.network import evaluate
from reduce_sim.numnet.training import EpochTrace, TrainConfig, train_masked
from reduce_sim.resilience.table import ResilienceTable, table_at_target
from reduce_sim.runtime.jobs import run_jobs
from reduce_sim.runtime.seeding import derive_seed

if TYPE_CHECKING:
    from reduce_sim.dataio.dataset import Dataset
    from reduce_sim.faultsim.array import ArrayConfig
    from reduce_sim.numnet.network import NetworkParams, NetworkSpec

logger = logging.getLogger(__name__)


class ProfileConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    fault_rates: list[float] = Field(min_length=1)
    repeats: int = Field(default=PROFILE_REPEATS, ge=1)
    max_epochs: int = Field(default=PROFILE_MAX_EPOCHS, ge=1)
    accuracy_target: float = Field(gt=0.0, le=1.0)
    train_cfg: TrainConfig = Field(default_factory=TrainConfig)
    base_seed: int = 0

    @field_validator("fault_rates")
    @classmethod
    def _rates_valid(cls, rates: list[float]) -> list[float]:
        if any(not 0.0 <= r <= 1.0 for r in rates):
            raise ValueError(f"fault rates must lie in [0, 1], got {rates}")
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ValueError(f"fault rates must be strictly increasing, got {rates}")
        return rates


@dataclass(frozen=True)
class ProfileGrid:
    """Every retraining trace of a profiling run, ``traces[rate_index][repeat]``."""

    config: ProfileConfig
    array: ArrayConfig
    network_hash: str
    traces: list[list[EpochTrace]]

    def curve_rows(self) -> list[tuple[float, int, int, float]]:
        """(fault_rate, repeat, epoch, accuracy) rows for accuracy-vs-retraining plots."""
        return [
            (realized_rate(self.array, rate), repeat, epoch, accuracy)
            for rate, per_rate in zip(self.config.fault_rates, self.traces)
            for repeat, trace in enumerate(per_rate)
            for epoch, accuracy in enumerate(trace.accuracies)
        ]


def check_distinct_fault_counts(array_cfg: ArrayConfig, rates: list[float]) -> list[int]:
    """Fault count per profiled rate; rates that round to the same count are refused."""
    counts = [faults_for_rate(array_cfg, r) for r in rates]
    for i in range(1, len(counts)):
        if counts[i] == counts[i - 1]:
            raise ValueError(
                f"fault rates {rates[i - 1]} and {rates[i]} both give {counts[i]} faulty PEs "
                f"on a {array_cfg.rows}x{array_cfg.cols} array"
            )
    return counts


def _profile_cell(
    params: NetworkParams,
    spec: NetworkSpec,
    train_data: Dataset,
    test_data: Dataset,
    array_cfg: ArrayConfig,
    cfg: ProfileConfig,
    rate_index: int,
    repeat: int,
) -> EpochTrace:
    """Inject one fault map and retrain the pre-trained params on it."""
    rate = cfg.fault_rates[rate_index]
    fault_map = generate_fault_map(array_cfg, rate, derive_seed(cfg.base_seed, rate_index, repeat))
    masks = derive_maskset(spec, fault_map)
    train_cfg = cfg.train_cfg.model_copy(
        update={"seed": derive_seed(cfg.train_cfg.seed, "profile", rate_index, repeat)}
    )
    _, trace = train_masked(params, masks, train_data, test_data, cfg.max_epochs, train_cfg)
    logger.debug(
        "rate %.4f repeat %d: %d faults, accuracy %.4f -> %.4f",
        rate, repeat, fault_map.fault_count, trace.accuracies[0], trace.final_accuracy,
    )
    return trace


async def profile_grid_async(
    params: NetworkParams,
    spec: NetworkSpec,
    train_data: Dataset,
    test_data: Dataset,
    array_cfg: ArrayConfig,
    cfg: ProfileConfig,
    jobs: int = 1,
) -> ProfileGrid:
    """Run the (rate x repeat) grid; cells are independent and seeded individually."""
    check_distinct_fault_counts(array_cfg, cfg.fault_rates)
    cells = [
        (rate_index, repeat)
        for rate_index in range(len(cfg.fault_rates))
        for repeat in range(cfg.repeats)
    ]
    logger.info(
        "Profiling %d rates x %d repeats (%d epochs each) on %d workers",
        len(cfg.fault_rates), cfg.repeats, cfg.max_epochs, jobs,
    )
    results = await run_jobs(
        [
            lambda ri=ri, k=k: _profile_cell(
                params, spec, train_data, test_data, array_cfg, cfg, ri, k
            )
            for ri, k in cells
        ],
        jobs,
    )
    traces = [results[i * cfg.repeats:(i + 1) * cfg.repeats] for i in range(len(cfg.fault_rates))]
    return ProfileGrid(cfg, array_cfg, spec.spec_hash(), traces)


async def profile_async(
    params: NetworkParams,
    spec: NetworkSpec,
    train_data: Dataset,
    test_data: Dataset,
    array_cfg: ArrayConfig,
    cfg: ProfileConfig,
    jobs: int = 1,
) -> tuple[ResilienceTable, ProfileGrid]:
    baseline = evaluate(params, test_data)
    if baseline < cfg.accuracy_target:
        logger.warning(
            "Baseline accuracy %.4f is below target %.4f: target unreachable even fault-free",
            baseline, cfg.accuracy_target,
        )
    grid = await profile_grid_async(params, spec, train_data, test_data, array_cfg, cfg, jobs)
    table = table_at_target(grid, cfg.accuracy_target, baseline)
    for entry in table.entries:
        logger.info(
            "rate %.4f: epochs %s (reachable=%s)",
            entry.fault_rate, entry.epochs_per_repeat, entry.reachable,
        )
    return table, grid


def profile(
    params: NetworkParams,
    spec: NetworkSpec,
    train_data: Dataset,
    test_data: Dataset,
    array_cfg: ArrayConfig,
    cfg: ProfileConfig,
    jobs: int = 1,
) -> ResilienceTable:
    """Build the resilience table of ``params`` under random PE faults."""
    table, _ = asyncio.run(
        profile_async(params, spec, train_data, test_data, array_cfg, cfg, jobs)
    )
    return table
