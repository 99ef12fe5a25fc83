"""Retrain every chip of a fleet under one policy and tally the outcome."""

from __future__ import annotations

import asyncio
import logging
import math
from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict

from reduce_sim.config import ACCURACY_SPLIT
from reduce_sim.errors import FailureReason, PolicyError, UncertifiableChipError
from reduce_sim.faultsim.masks import derive_maskset
from reduce_sim.fleet.policy import Policy, PolicyKind
from reduce_sim.numnet.network import apply_mask, evaluate
from reduce_sim.numnet.training import TrainConfig, train_masked
from reduce_sim.resilience.budget import select_budget
from reduce_sim.runtime.jobs import run_jobs
from reduce_sim.runtime.seeding import derive_seed

if TYPE_CHECKING:
    from reduce_sim.dataio.dataset import Dataset
    from reduce_sim.fleet.chips import ChipRecord
    from reduce_sim.numnet.network import NetworkParams, NetworkSpec
    from reduce_sim.resilience.table import ResilienceTable

logger = logging.getLogger(__name__)


class ChipResult(BaseModel):
    """Outcome for one chip. ``budget_epochs`` is None when the chip FAILED."""

    model_config = ConfigDict(frozen=True)

    chip_id: str
    fault_rate: float
    budget_epochs: int | None
    failure: FailureReason | None = None
    final_accuracy: float | None
    pre_retrain_accuracy: float
    mask_density: float
    meets_constraint: bool

    @property
    def failed(self) -> bool:
        return self.failure is not None


class FleetReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    policy: str
    accuracy_constraint: float
    results: list[ChipResult]
    total_epochs: int
    num_meeting: int
    num_failed: int
    yield_fraction: float
    accuracy_split: str = ACCURACY_SPLIT

    @classmethod
    def assemble(cls, policy: Policy, constraint: float, results: list[ChipResult]) -> FleetReport:
        ordered = sorted(results, key=lambda r: r.chip_id)
        num_meeting = sum(r.meets_constraint for r in ordered)
        return cls(
            policy=policy.label,
            accuracy_constraint=constraint,
            results=ordered,
            total_epochs=sum(r.budget_epochs for r in ordered if r.budget_epochs is not None),
            num_meeting=num_meeting,
            num_failed=sum(r.failed for r in ordered),
            yield_fraction=num_meeting / len(ordered) if ordered else 0.0,
        )

    @property
    def fleet_size(self) -> int:
        return len(self.results)

    def csv_rows(self) -> list[tuple]:
        """(chip_id, fault_rate, policy, budget_epochs, final_accuracy, meets_constraint)."""
        return [
            (
                r.chip_id,
                r.fault_rate,
                self.policy,
                r.budget_epochs if r.budget_epochs is not None else f"FAILED({r.failure.value})",
                r.final_accuracy,
                r.meets_constraint,
            )
            for r in self.results
        ]


def _check_table(policy: Policy, table: ResilienceTable | None, constraint: float, fleet: list[ChipRecord]) -> None:
    if policy.kind is not PolicyKind.REDUCE:
        return
    if table is None:
        raise PolicyError(f"{policy.label} needs a resilience table")
    if not math.isclose(table.accuracy_target, constraint, rel_tol=0.0, abs_tol=1e-12):
        raise PolicyError(
            f"table was profiled for target {table.accuracy_target}, constraint is {constraint}"
        )
    for chip in fleet:
        if chip.fault_map.config != table.array:
            raise PolicyError(
                f"{chip.chip_id} has a {chip.fault_map.rows}x{chip.fault_map.cols} array, "
                f"table was profiled on {table.array.rows}x{table.array.cols}"
            )


def _run_chip(
    params: NetworkParams,
    spec: NetworkSpec,
    train_data: Dataset,
    test_data: Dataset,
    chip: ChipRecord,
    policy: Policy,
    table: ResilienceTable | None,
    constraint: float,
    train_cfg: TrainConfig,
) -> ChipResult:
    rate = chip.fault_rate
    masks = derive_maskset(spec, chip.fault_map)
    pre_accuracy = evaluate(apply_mask(params, masks), test_data)

    if policy.kind is PolicyKind.FIXED:
        budget = policy.epochs
    else:
        try:
            budget = select_budget(table, rate, policy.statistic)
        except UncertifiableChipError as exc:
            logger.debug("%s FAILED: %s", chip.chip_id, exc)
            return ChipResult(
                chip_id=chip.chip_id,
                fault_rate=rate,
                budget_epochs=None,
                failure=exc.reason,
                final_accuracy=None,
                pre_retrain_accuracy=pre_accuracy,
                mask_density=masks.density(),
                meets_constraint=False,
            )

    # Chip retraining streams depend only on the chip, so every policy sees the same order
    chip_cfg = train_cfg.model_copy(update={"seed": derive_seed(train_cfg.seed, "chip", chip.chip_id)})
    _, trace = train_masked(params, masks, train_data, test_data, budget, chip_cfg)
    logger.debug(
        "%s rate %.4f: %d epochs, accuracy %.4f -> %.4f",
        chip.chip_id, rate, budget, trace.accuracies[0], trace.final_accuracy,
    )
    return ChipResult(
        chip_id=chip.chip_id,
        fault_rate=rate,
        budget_epochs=budget,
        final_accuracy=trace.final_accuracy,
        pre_retrain_accuracy=pre_accuracy,
        mask_density=masks.density(),
        meets_constraint=trace.final_accuracy >= constraint,
    )


async def run_policy_async(
    params: NetworkParams,
    spec: NetworkSpec,
    train_data: Dataset,
    test_data: Dataset,
    fleet: list[ChipRecord],
    policy: Policy,
    table: ResilienceTable | None,
    constraint: float,
    train_cfg: TrainConfig,
    jobs: int = 1,
) -> FleetReport:
    _check_table(policy, table, constraint, fleet)
    ids = [chip.chip_id for chip in fleet]
    if len(set(ids)) != len(ids):
        raise PolicyError("chip ids must be unique within a fleet")

    results = await run_jobs(
        [
            lambda chip=chip: _run_chip(
                params, spec, train_data, test_data, chip, policy, table, constraint, train_cfg
            )
            for chip in fleet
        ],
        jobs,
    )
    report = FleetReport.assemble(policy, constraint, results)
    logger.info(
        "%s: total %d epochs, %d/%d chips meet %.4f, %d failed",
        report.policy, report.total_epochs, report.num_meeting, report.fleet_size,
        constraint, report.num_failed,
    )
    return report


def run_policy(
    params: NetworkParams,
    spec: NetworkSpec,
    train_data: Dataset,
    test_data: Dataset,
    fleet: list[ChipRecord],
    policy: Policy,
    table: ResilienceTable | None,
    constraint: float,
    train_cfg: TrainConfig,
    jobs: int = 1,
) -> FleetReport:
    """Retrain each chip from the pre-trained params with the policy's budget."""
    return asyncio.run(
        run_policy_async(
            params, spec, train_data, test_data, fleet, policy, table, constraint, train_cfg, jobs
        )
    )
