"""Random permanent-fault injection for systolic arrays."""

from __future__ import annotations

import math

import numpy as np

from reduce_sim.faultsim.array import ArrayConfig, FaultMap


def faults_for_rate(config: ArrayConfig, rate: float) -> int:
    """Number of faulty PEs for ``rate``: round-half-up of rate * R * C."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"fault rate must lie in [0, 1], got {rate}")
    return min(config.num_pes, int(math.floor(rate * config.num_pes + 0.5)))


def generate_fault_map(config: ArrayConfig, rate: float, seed: int) -> FaultMap:
    """Mark exactly ``faults_for_rate`` distinct PEs faulty, uniformly at random."""
    count = faults_for_rate(config, rate)
    rng = np.random.default_rng(seed)
    flat = rng.choice(config.num_pes, size=count, replace=False)
    rows, cols = np.divmod(np.sort(flat), config.cols)
    return FaultMap(config, zip(rows.tolist(), cols.tolist()), seed=seed)


def realized_rate(config: ArrayConfig, rate: float) -> float:
    """Fault rate of every map ``generate_fault_map`` builds for ``rate``."""
    return faults_for_rate(config, rate) / config.num_pes
