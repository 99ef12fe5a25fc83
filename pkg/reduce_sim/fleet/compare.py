"""Side-by-side summary of fleet reports produced under different policies."""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict

from reduce_sim.errors import FleetMismatchError
from reduce_sim.fleet.runner import FleetReport


class ComparisonRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    policy: str
    total_epochs: int
    num_meeting: int
    num_failed: int
    fleet_size: int
    yield_fraction: float


class PolicyComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    accuracy_constraint: float
    rows: list[ComparisonRow]
    accuracies: dict[str, list[float | None]]

    def row(self, policy: str) -> ComparisonRow:
        for row in self.rows:
            if row.policy == policy:
                return row
        raise KeyError(policy)


def compare_policies(reports: list[FleetReport]) -> PolicyComparison:
    """Totals per policy plus per-chip accuracies for histograms."""
    if not reports:
        raise ValueError("nothing to compare")
    first = reports[0]
    fleet = [(r.chip_id, r.fault_rate) for r in first.results]
    for report in reports[1:]:
        if [(r.chip_id, r.fault_rate) for r in report.results] != fleet:
            raise FleetMismatchError(f"{report.policy} was run on a different fleet than {first.policy}")
        if not math.isclose(report.accuracy_constraint, first.accuracy_constraint, rel_tol=0.0, abs_tol=1e-12):
            raise FleetMismatchError(
                f"{report.policy} uses constraint {report.accuracy_constraint}, "
                f"{first.policy} uses {first.accuracy_constraint}"
            )

    rows = [
        ComparisonRow(
            policy=report.policy,
            total_epochs=report.total_epochs,
            num_meeting=report.num_meeting,
            num_failed=report.num_failed,
            fleet_size=report.fleet_size,
            yield_fraction=report.yield_fraction,
        )
        for report in reports
    ]
    accuracies = {report.policy: [r.final_accuracy for r in report.results] for report in reports}
    return PolicyComparison(
        accuracy_constraint=first.accuracy_constraint, rows=rows, accuracies=accuracies
    )
