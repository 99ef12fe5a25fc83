"""Per-chip retraining budget selection from a resilience table."""

from __future__ import annotations

import bisect
import math
from enum import Enum

from reduce_sim.config import BUDGET_EPSILON
from reduce_sim.errors import RateBeyondProfileError, UnrecoverableRateError
from reduce_sim.resilience.table import ResilienceTable


class Statistic(str, Enum):
    MIN = "min"
    MEAN = "mean"
    MAX = "max"


def budget_curve(table: ResilienceTable, statistic: Statistic) -> list[float | None]:
    """Chosen statistic per entry under a running-max envelope.

    Unreachable entries stay None and do not reset the envelope.
    """
    curve: list[float | None] = []
    running = -math.inf
    for entry in table.entries:
        value = entry.statistic(Statistic(statistic).value) if entry.reachable else None
        if value is None:
            curve.append(None)
            continue
        running = max(running, value)
        curve.append(running)
    return curve


def _ceil(value: float) -> int:
    return max(0, math.ceil(value - BUDGET_EPSILON))


def select_budget(
    table: ResilienceTable,
    chip_rate: float,
    statistic: Statistic | str = Statistic.MAX,
) -> int:
    """Epochs of fault-aware retraining for a chip with ``chip_rate`` faulty PEs.

    Between tabulated rates the envelope is interpolated linearly and
    rounded up. Rates above the profiled range are refused.
    """
    if chip_rate < 0:
        raise ValueError(f"chip fault rate must be >= 0, got {chip_rate}")
    statistic = Statistic(statistic)
    rates = table.fault_rates
    curve = budget_curve(table, statistic)

    if chip_rate > rates[-1]:
        raise RateBeyondProfileError(
            f"chip rate {chip_rate:.4f} exceeds the largest profiled rate {rates[-1]:.4f}"
        )

    hi = bisect.bisect_left(rates, chip_rate)
    if chip_rate <= rates[0] or rates[hi] == chip_rate:
        idx = 0 if chip_rate <= rates[0] else hi
        value = curve[idx]
        if value is None:
            raise UnrecoverableRateError(
                f"profiled rate {rates[idx]:.4f} never reached the accuracy target"
            )
        return _ceil(value)

    lo = hi - 1
    lo_value, hi_value = curve[lo], curve[hi]
    if lo_value is None or hi_value is None:
        raise UnrecoverableRateError(
            f"chip rate {chip_rate:.4f} is bracketed by an unreachable profiled rate "
            f"({rates[lo]:.4f}, {rates[hi]:.4f})"
        )
    fraction = (chip_rate - rates[lo]) / (rates[hi] - rates[lo])
    return _ceil(lo_value + (hi_value - lo_value) * fraction)
