"""Serialization of experiment artefacts to JSON and CSV files.

Output is byte-stable: fixed key order, fixed float formatting, ``\\n`` line
endings, no timestamps.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

from pydantic import BaseModel

from reduce_sim.faultsim.array import FaultMap
from reduce_sim.fleet.compare import PolicyComparison
from reduce_sim.fleet.runner import FleetReport
from reduce_sim.numnet.network import NetworkParams
from reduce_sim.resilience.profiler import ProfileGrid
from reduce_sim.resilience.table import ResilienceTable


def write_json(path: Path, payload: dict[str, Any] | BaseModel) -> Path:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def read_json(path: Path) -> dict[str, Any]:
    return json.loads(Path(path).read_text())


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])
    return path


def save_params(path: Path, params: NetworkParams) -> Path:
    return write_json(path, params.to_dict())


def load_params(path: Path) -> NetworkParams:
    return NetworkParams.from_dict(read_json(path))


def save_fault_map(path: Path, fault_map: FaultMap) -> Path:
    return write_json(path, fault_map.to_dict())


def load_fault_map(path: Path) -> FaultMap:
    return FaultMap.from_dict(read_json(path))


def save_table(path: Path, table: ResilienceTable) -> Path:
    return write_json(path, table)


def load_table(path: Path) -> ResilienceTable:
    return ResilienceTable.model_validate(read_json(path))


def save_table_csv(path: Path, table: ResilienceTable) -> Path:
    return write_csv(path, ("fault_rate", "repeat", "epochs"), table.epoch_rows())


def save_curves_csv(path: Path, grid: ProfileGrid) -> Path:
    return write_csv(path, ("fault_rate", "repeat", "epoch", "accuracy"), grid.curve_rows())


def save_fleet_report(json_path: Path, csv_path: Path, report: FleetReport) -> None:
    write_json(json_path, report)
    write_csv(
        csv_path,
        ("chip_id", "fault_rate", "policy", "budget_epochs", "final_accuracy", "meets_constraint"),
        report.csv_rows(),
    )


def save_comparison(json_path: Path, csv_path: Path, comparison: PolicyComparison) -> None:
    write_json(json_path, comparison)
    write_csv(
        csv_path,
        ("policy", "total_epochs", "num_meeting", "num_failed", "fleet_size", "yield_fraction"),
        [
            (r.policy, r.total_epochs, r.num_meeting, r.num_failed, r.fleet_size, r.yield_fraction)
            for r in comparison.rows
        ],
    )
