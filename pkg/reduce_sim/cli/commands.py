"""Pipeline commands: pretrain -> profile -> select -> retrain -> fleet."""

from __future__ import annotations

import asyncio
import logging
from pathlib import Path

from reduce_sim.cli.run_config import RunConfig
from reduce_sim.config import ACCURACY_SPLIT
from reduce_sim.errors import BaselineBelowTargetError, PolicyError
from reduce_sim.faultsim.array import fault_rate
from reduce_sim.faultsim.faultgen import generate_fault_map
from reduce_sim.faultsim.masks import derive_maskset
from reduce_sim.fleet.chips import generate_fleet
from reduce_sim.fleet.compare import PolicyComparison, compare_policies
from reduce_sim.fleet.policy import Policy, PolicyKind
from reduce_sim.fleet.runner import FleetReport, run_policy_async
from reduce_sim.numnet.network import evaluate, init_params
from reduce_sim.numnet.training import train_masked, train_unmasked
from reduce_sim.reports import serialization as ser
from reduce_sim.resilience.budget import Statistic, select_budget
from reduce_sim.resilience.profiler import ProfileConfig, profile_async
from reduce_sim.resilience.table import ResilienceTable

logger = logging.getLogger(__name__)

PARAMS_FILE = "params.json"
PRETRAIN_METRICS_FILE = "pretrain_metrics.json"
TABLE_FILE = "resilience_table.json"
TABLE_CSV_FILE = "resilience_epochs.csv"
CURVES_CSV_FILE = "resilience_curves.csv"
RETRAINED_PARAMS_FILE = "retrained_params.json"
RETRAIN_METRICS_FILE = "retrain_metrics.json"
FAULT_MAP_FILE = "fault_map.json"
FLEET_CHIPS_FILE = "fleet_chips.csv"
COMPARISON_JSON_FILE = "comparison.json"
COMPARISON_CSV_FILE = "comparison.csv"


def policy_slug(policy: Policy) -> str:
    return policy.label.replace(":", "-")


def cmd_pretrain(cfg: RunConfig) -> Path:
    """Train the fault-free network the framework starts from."""
    train, test = cfg.load_datasets()
    params = init_params(cfg.network, cfg.seed_for("pretrain"))
    params, trace = train_unmasked(params, train, test, cfg.pretrain_epochs, cfg.train_cfg_for("pretrain"))
    baseline = trace.final_accuracy
    constraint = cfg.resolve_constraint(baseline)

    out = cfg.output_dir
    params_path = ser.save_params(out / PARAMS_FILE, params)
    ser.write_json(
        out / PRETRAIN_METRICS_FILE,
        {
            "baseline_accuracy": baseline,
            "accuracy_constraint": constraint,
            "accuracy_split": ACCURACY_SPLIT,
            "epochs": cfg.pretrain_epochs,
            "accuracies": trace.accuracies,
        },
    )
    logger.info("Pre-trained for %d epochs: baseline accuracy %.4f", cfg.pretrain_epochs, baseline)
    if baseline < constraint:
        raise BaselineBelowTargetError(
            f"baseline accuracy {baseline:.4f} is below the constraint {constraint:.4f}"
        )
    return params_path


def cmd_profile(cfg: RunConfig, params_path: Path, jobs: int = 1) -> ResilienceTable:
    """Profile epochs-to-target across fault rates and write the table."""
    params = ser.load_params(params_path)
    train, test = cfg.load_datasets()
    constraint = cfg.resolve_constraint(evaluate(params, test))
    profile_cfg = ProfileConfig(
        fault_rates=cfg.profile.fault_rates,
        repeats=cfg.profile.repeats,
        max_epochs=cfg.profile.max_epochs,
        accuracy_target=constraint,
        train_cfg=cfg.train_cfg_for("profile"),
        base_seed=cfg.seed_for("profile"),
    )
    table, grid = asyncio.run(
        profile_async(params, cfg.network, train, test, cfg.array, profile_cfg, jobs)
    )
    out = cfg.output_dir
    ser.save_table(out / TABLE_FILE, table)
    ser.save_table_csv(out / TABLE_CSV_FILE, table)
    ser.save_curves_csv(out / CURVES_CSV_FILE, grid)
    return table


def cmd_select(table_path: Path, fault_map_path: Path, statistic: Statistic | str) -> int:
    """Retraining budget for one chip's fault map."""
    table = ser.load_table(table_path)
    fault_map = ser.load_fault_map(fault_map_path)
    if fault_map.config != table.array:
        raise PolicyError(
            f"fault map is for a {fault_map.rows}x{fault_map.cols} array, "
            f"table was profiled on {table.array.rows}x{table.array.cols}"
        )
    return select_budget(table, fault_rate(fault_map), statistic)


def cmd_retrain(cfg: RunConfig, params_path: Path, fault_map_path: Path, epochs: int) -> Path:
    """Fault-aware retraining of the pre-trained params for one chip."""
    params = ser.load_params(params_path)
    fault_map = ser.load_fault_map(fault_map_path)
    train, test = cfg.load_datasets()
    masks = derive_maskset(cfg.network, fault_map)
    tuned, trace = train_masked(params, masks, train, test, epochs, cfg.train_cfg_for("retrain"))

    out = cfg.output_dir
    tuned_path = ser.save_params(out / RETRAINED_PARAMS_FILE, tuned)
    ser.write_json(
        out / RETRAIN_METRICS_FILE,
        {
            "epochs": epochs,
            "fault_rate": fault_rate(fault_map),
            "mask_density": masks.density(),
            "pre_retrain_accuracy": trace.accuracies[0],
            "final_accuracy": trace.final_accuracy,
            "accuracy_split": ACCURACY_SPLIT,
            "accuracies": trace.accuracies,
        },
    )
    logger.info(
        "Retrained %d epochs at fault rate %.4f: accuracy %.4f -> %.4f",
        epochs, fault_rate(fault_map), trace.accuracies[0], trace.final_accuracy,
    )
    return tuned_path


def cmd_fleet(
    cfg: RunConfig,
    params_path: Path,
    table_path: Path | None,
    policies: list[Policy],
    jobs: int = 1,
) -> PolicyComparison:
    """Run every policy over one simulated fleet and compare the outcomes."""
    params = ser.load_params(params_path)
    train, test = cfg.load_datasets()
    constraint = cfg.resolve_constraint(evaluate(params, test))

    needs_table = any(p.kind is PolicyKind.REDUCE for p in policies)
    table = ser.load_table(table_path) if needs_table and table_path is not None else None
    for policy in policies:
        policy.check_epoch_limit(cfg.fleet.max_fixed_epochs)

    fleet = generate_fleet(cfg.array, cfg.fleet.count, cfg.fleet_distribution(), cfg.seed_for("fleet"))
    out = cfg.output_dir
    ser.write_csv(
        out / FLEET_CHIPS_FILE,
        ("chip_id", "requested_rate", "fault_rate", "seed"),
        [(c.chip_id, c.requested_rate, c.fault_rate, c.fault_map.seed) for c in fleet],
    )

    train_cfg = cfg.train_cfg_for("fleet")
    reports: list[FleetReport] = []
    for policy in policies:
        report = asyncio.run(
            run_policy_async(
                params, cfg.network, train, test, fleet, policy, table, constraint, train_cfg, jobs
            )
        )
        slug = policy_slug(policy)
        ser.save_fleet_report(out / f"fleet_{slug}.json", out / f"fleet_{slug}.csv", report)
        reports.append(report)

    comparison = compare_policies(reports)
    ser.save_comparison(out / COMPARISON_JSON_FILE, out / COMPARISON_CSV_FILE, comparison)
    return comparison


def cmd_faultmap(cfg: RunConfig, rate: float, seed: int) -> Path:
    """Write a random fault map for the configured array."""
    fault_map = generate_fault_map(cfg.array, rate, seed)
    logger.info("Generated %r", fault_map)
    return ser.save_fault_map(cfg.output_dir / FAULT_MAP_FILE, fault_map)

