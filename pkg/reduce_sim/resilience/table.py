"""Resilience table: epochs of retraining needed per fault rate."""

from __future__ import annotations

import statistics
from typing import TYPE_CHECKING, Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

from reduce_sim.config import ACCURACY_SPLIT, INTERPOLATION_RULE
from reduce_sim.faultsim.array import ArrayConfig
from reduce_sim.faultsim.faultgen import realized_rate

if TYPE_CHECKING:
    from reduce_sim.numnet.training import EpochTrace
    from reduce_sim.resilience.profiler import ProfileConfig, ProfileGrid


def epochs_to_target(trace: EpochTrace, target: float) -> int | None:
    """First epoch count whose accuracy reaches ``target``; None if never."""
    for k, accuracy in enumerate(trace.accuracies):
        if accuracy >= target:
            return k
    return None


class ResilienceEntry(BaseModel):
    """Statistics of epochs-to-target over the repeats at one fault rate.

    min/mean/max are taken over the repeats that reached the target.
    """

    model_config = ConfigDict(frozen=True)

    fault_rate: float
    epochs_per_repeat: list[int | None]
    min: float | None = None
    mean: float | None = None
    max: float | None = None
    reachable: bool
    mean_accuracy_curve: list[float] = Field(default_factory=list)

    @classmethod
    def from_repeats(
        cls,
        fault_rate: float,
        epochs_per_repeat: list[int | None],
        mean_accuracy_curve: list[float] | None = None,
    ) -> ResilienceEntry:
        reached = [e for e in epochs_per_repeat if e is not None]
        return cls(
            fault_rate=fault_rate,
            epochs_per_repeat=list(epochs_per_repeat),
            min=float(min(reached)) if reached else None,
            mean=float(statistics.fmean(reached)) if reached else None,
            max=float(max(reached)) if reached else None,
            reachable=len(reached) == len(epochs_per_repeat),
            mean_accuracy_curve=mean_accuracy_curve or [],
        )

    def statistic(self, name: str) -> float | None:
        return {"min": self.min, "mean": self.mean, "max": self.max}[name]


class ResilienceTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    accuracy_target: float
    array: ArrayConfig
    network_hash: str
    entries: list[ResilienceEntry] = Field(min_length=1)
    profile_config: dict[str, Any]
    baseline_accuracy: float | None = None
    accuracy_split: str = ACCURACY_SPLIT
    interpolation: str = INTERPOLATION_RULE

    @model_validator(mode="after")
    def _rates_strictly_increasing(self) -> ResilienceTable:
        rates = [e.fault_rate for e in self.entries]
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ValueError(f"entries must have strictly increasing fault rates, got {rates}")
        return self

    @property
    def fault_rates(self) -> list[float]:
        return [e.fault_rate for e in self.entries]

    def max_budget(self) -> int:
        """Largest max-statistic among reachable entries (0 if none)."""
        values = [e.max for e in self.entries if e.reachable and e.max is not None]
        return int(max(values)) if values else 0

    def epoch_rows(self) -> list[tuple[float, int, int | None]]:
        """(fault_rate, repeat, epochs) rows for the companion CSV."""
        return [
            (entry.fault_rate, repeat, epochs)
            for entry in self.entries
            for repeat, epochs in enumerate(entry.epochs_per_repeat)
        ]


def table_at_target(grid: ProfileGrid, target: float, baseline_accuracy: float | None = None) -> ResilienceTable:
    """Build a table for ``target`` from already-profiled traces.

    Entries carry the realized rate of the profiled maps, so a chip generated
    at a profiled rate hits its entry exactly.
    """
    cfg: ProfileConfig = grid.config
    entries = []
    for rate_index, rate in enumerate(cfg.fault_rates):
        traces = grid.traces[rate_index]
        curve_len = min(len(t.accuracies) for t in traces)
        curve = [
            statistics.fmean(t.accuracies[k] for t in traces) for k in range(curve_len)
        ]
        entries.append(
            ResilienceEntry.from_repeats(
                realized_rate(grid.array, rate),
                [epochs_to_target(t, target) for t in traces],
                curve,
            )
        )
    return ResilienceTable(
        accuracy_target=target,
        array=grid.array,
        network_hash=grid.network_hash,
        entries=entries,
        profile_config=cfg.model_dump(mode="json"),
        baseline_accuracy=baseline_accuracy,
    )
