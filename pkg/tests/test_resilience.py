"""Tests for resilience profiling and per-chip budget selection."""

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from reduce_sim.errors import RateBeyondProfileError, UnrecoverableRateError
from reduce_sim.faultsim.array import ArrayConfig, fault_rate
from reduce_sim.faultsim.faultgen import generate_fault_map
from reduce_sim.numnet.training import EpochTrace
from reduce_sim.resilience.budget import Statistic, budget_curve, select_budget
from reduce_sim.resilience.profiler import (
    ProfileConfig,
    ProfileGrid,
    check_distinct_fault_counts,
    profile,
    profile_async,
)
from reduce_sim.resilience.table import ResilienceEntry, ResilienceTable, epochs_to_target, table_at_target

from tests.conftest import make_table


def trace(*accuracies):
    return EpochTrace(accuracies=list(accuracies))


def reached_after(epochs, target=0.9):
    return trace(*([target - 0.4] * epochs), target + 0.05)


class TestEpochsToTarget:
    def test_already_met(self):
        assert epochs_to_target(trace(0.95, 0.96, 0.97), 0.91) == 0

    def test_first_crossing(self):
        assert epochs_to_target(trace(0.10, 0.50, 0.92, 0.90), 0.91) == 2

    def test_not_reached(self):
        assert epochs_to_target(trace(0.10, 0.20), 0.91) is None

    def test_equal_counts_as_reached(self):
        assert epochs_to_target(trace(0.5, 0.91), 0.91) == 1

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30), st.floats(0.01, 1.0))
    def test_result_is_first_crossing(self, accuracies, target):
        result = epochs_to_target(trace(*accuracies), target)
        if result is None:
            assert all(a < target for a in accuracies)
        else:
            assert accuracies[result] >= target
            assert all(a < target for a in accuracies[:result])


class TestResilienceEntry:
    def test_statistics(self):
        entry = ResilienceEntry.from_repeats(0.1, [2, 3, 7])
        assert (entry.min, entry.mean, entry.max) == (2.0, 4.0, 7.0)
        assert entry.reachable

    def test_partially_reachable(self):
        entry = ResilienceEntry.from_repeats(0.1, [2, None, 4])
        assert not entry.reachable
        assert (entry.min, entry.max) == (2.0, 4.0)

    def test_never_reached(self):
        entry = ResilienceEntry.from_repeats(0.5, [None, None])
        assert entry.min is entry.mean is entry.max is None
        assert not entry.reachable


class TestResilienceTable:
    def test_rates_must_increase(self):
        entries = [ResilienceEntry.from_repeats(0.2, [1]), ResilienceEntry.from_repeats(0.1, [1])]
        with pytest.raises(ValidationError):
            ResilienceTable(
                accuracy_target=0.9, array=ArrayConfig(rows=4, cols=4),
                network_hash="x", entries=entries, profile_config={},
            )

    def test_duplicate_rates_rejected(self):
        entries = [ResilienceEntry.from_repeats(0.1, [1]), ResilienceEntry.from_repeats(0.1, [2])]
        with pytest.raises(ValidationError):
            ResilienceTable(
                accuracy_target=0.9, array=ArrayConfig(rows=4, cols=4),
                network_hash="x", entries=entries, profile_config={},
            )

    def test_epoch_rows(self):
        table = make_table({0.0: [0, 0], 0.1: [3, None]})
        assert table.epoch_rows() == [(0.0, 0, 0), (0.0, 1, 0), (0.1, 0, 3), (0.1, 1, None)]

    def test_max_budget_skips_unreachable(self):
        assert make_table({0.0: [0], 0.1: [4, 6], 0.2: [9, None]}).max_budget() == 6

    def test_json_null_for_not_reached(self):
        data = make_table({0.0: [0], 0.3: [None]}).model_dump(mode="json")
        assert data["entries"][1]["epochs_per_repeat"] == [None]
        assert data["entries"][1]["reachable"] is False
        assert ResilienceTable.model_validate(data) == make_table({0.0: [0], 0.3: [None]})


class TestTableAtTarget:
    def test_from_traces(self):
        cfg = ProfileConfig(fault_rates=[0.0, 0.5], repeats=2, max_epochs=2, accuracy_target=0.9)
        grid = ProfileGrid(
            cfg, ArrayConfig(rows=4, cols=4), "abc",
            [
                [trace(0.95, 0.95, 0.96), trace(0.95, 0.94, 0.97)],
                [trace(0.3, 0.6, 0.8), trace(0.4, 0.85, 0.9)],
            ],
        )
        table = table_at_target(grid, 0.85, baseline_accuracy=0.95)
        assert table.accuracy_target == 0.85
        assert table.entries[0].epochs_per_repeat == [0, 0]
        assert table.entries[1].epochs_per_repeat == [None, 1]
        assert table.entries[1].mean_accuracy_curve == pytest.approx([0.35, 0.725, 0.85])
        assert table.network_hash == "abc"
        assert table.profile_config["fault_rates"] == [0.0, 0.5]
        assert grid.curve_rows()[:3] == [(0.0, 0, 0, 0.95), (0.0, 0, 1, 0.95), (0.0, 0, 2, 0.96)]
        assert len(grid.curve_rows()) == 12

    def test_entries_carry_realized_rates(self):
        array = ArrayConfig(rows=16, cols=16)
        cfg = ProfileConfig(fault_rates=[0.0, 0.1, 0.2, 0.3], repeats=1, max_epochs=12, accuracy_target=0.9)
        grid = ProfileGrid(
            cfg, array, "abc",
            [[reached_after(0)], [reached_after(4)], [reached_after(9)], [reached_after(12)]],
        )
        table = table_at_target(grid, 0.9)
        # 25.6, 51.2 and 76.8 faulty PEs round to 26, 51 and 77
        assert table.fault_rates == [0.0, 26 / 256, 51 / 256, 77 / 256]
        assert [row[0] for row in grid.curve_rows()[1:3]] == [26 / 256, 26 / 256]

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_chip_at_profiled_rate_hits_its_entry(self, seed):
        array = ArrayConfig(rows=16, cols=16)
        cfg = ProfileConfig(fault_rates=[0.0, 0.1, 0.2, 0.3], repeats=1, max_epochs=12, accuracy_target=0.9)
        grid = ProfileGrid(
            cfg, array, "abc",
            [[reached_after(0)], [reached_after(4)], [reached_after(9)], [reached_after(12)]],
        )
        table = table_at_target(grid, 0.9)
        for rate, expected in zip(cfg.fault_rates, [0, 4, 9, 12]):
            chip = generate_fault_map(array, rate, seed)
            assert select_budget(table, fault_rate(chip)) == expected


class TestSelectBudget:
    @pytest.fixture
    def table(self):
        return make_table({0.0: [0], 0.1: [4], 0.2: [9]})

    def test_exact_hit(self, table):
        assert select_budget(table, 0.1) == 4

    def test_linear_interpolation_rounds_up(self, table):
        assert select_budget(table, 0.15) == 7

    def test_interpolation_lands_on_integer(self, table):
        assert select_budget(table, 0.05) == 2

    def test_running_max_envelope(self):
        table = make_table({0.0: [0], 0.1: [6], 0.2: [5]})
        assert budget_curve(table, Statistic.MAX) == [0.0, 6.0, 6.0]
        assert select_budget(table, 0.2) == 6
        assert select_budget(table, 0.15) == 6

    def test_zero_fault_identity(self, table):
        assert select_budget(table, 0.0) == 0

    def test_below_profiled_range(self):
        assert select_budget(make_table({0.05: [2], 0.1: [4]}), 0.01) == 2

    def test_beyond_profile(self, table):
        with pytest.raises(RateBeyondProfileError) as exc_info:
            select_budget(table, 0.25)
        assert exc_info.value.reason.value == "RATE_BEYOND_PROFILE"

    def test_unrecoverable_exact(self):
        table = make_table({0.0: [0], 0.1: [3, None]})
        with pytest.raises(UnrecoverableRateError) as exc_info:
            select_budget(table, 0.1)
        assert exc_info.value.reason.value == "UNRECOVERABLE"

    def test_unrecoverable_bracketed(self):
        table = make_table({0.0: [0], 0.1: [None], 0.2: [8]})
        with pytest.raises(UnrecoverableRateError):
            select_budget(table, 0.05)
        assert select_budget(table, 0.2) == 8

    def test_statistics(self):
        table = make_table({0.0: [0, 0, 0], 0.1: [2, 3, 7]})
        assert select_budget(table, 0.1, "min") == 2
        assert select_budget(table, 0.1, Statistic.MEAN) == 4
        assert select_budget(table, 0.1, Statistic.MAX) == 7

    def test_mean_rounds_up(self):
        table = make_table({0.0: [0, 0], 0.1: [3, 4]})
        assert select_budget(table, 0.1, Statistic.MEAN) == 4

    def test_negative_rate(self, table):
        with pytest.raises(ValueError):
            select_budget(table, -0.1)

    def test_unknown_statistic(self, table):
        with pytest.raises(ValueError):
            select_budget(table, 0.1, "median")


@st.composite
def reachable_tables(draw):
    """Tables where every repeat reaches the target."""
    n = draw(st.integers(1, 6))
    rates = sorted(draw(st.sets(st.integers(0, 100), min_size=n, max_size=n)))
    repeats = draw(st.integers(1, 5))
    points = {
        r / 100: draw(st.lists(st.integers(0, 40), min_size=repeats, max_size=repeats))
        for r in rates
    }
    return make_table(points)


class TestSelectBudgetProperties:
    @given(reachable_tables(), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.sampled_from(list(Statistic)))
    @settings(max_examples=200)
    def test_monotone_in_rate(self, table, a, b, statistic):
        lo, hi = sorted((a, b))
        assume(hi <= table.fault_rates[-1])
        assert select_budget(table, lo, statistic) <= select_budget(table, hi, statistic)

    @given(reachable_tables(), st.floats(0.0, 1.0))
    @settings(max_examples=200)
    def test_statistic_ordering(self, table, rate):
        assume(rate <= table.fault_rates[-1])
        low = select_budget(table, rate, Statistic.MIN)
        mid = select_budget(table, rate, Statistic.MEAN)
        high = select_budget(table, rate, Statistic.MAX)
        assert low <= mid <= high

    @given(reachable_tables())
    def test_never_below_tabulated_value(self, table):
        envelope = budget_curve(table, Statistic.MAX)
        for rate, value in zip(table.fault_rates, envelope):
            assert select_budget(table, rate) == int(value)


class TestProfileConfig:
    def test_empty_rates(self):
        with pytest.raises(ValidationError):
            ProfileConfig(fault_rates=[], accuracy_target=0.9)

    def test_rates_strictly_increasing(self):
        with pytest.raises(ValidationError):
            ProfileConfig(fault_rates=[0.1, 0.1], accuracy_target=0.9)

    def test_rate_range(self):
        with pytest.raises(ValidationError):
            ProfileConfig(fault_rates=[0.0, 1.5], accuracy_target=0.9)

    def test_target_range(self):
        with pytest.raises(ValidationError):
            ProfileConfig(fault_rates=[0.0], accuracy_target=0.0)

    def test_fault_counts_per_rate(self):
        counts = check_distinct_fault_counts(ArrayConfig(rows=16, cols=16), [0.0, 0.05, 0.1, 0.2, 0.3])
        assert counts == [0, 13, 26, 51, 77]

    def test_rates_with_same_fault_count_rejected(self, small_array):
        # 0.01 * 16 rounds to 0 faults, like rate 0
        with pytest.raises(ValueError):
            check_distinct_fault_counts(small_array, [0.0, 0.01, 0.5])


class TestProfile:
    @pytest.fixture
    def setup(self, pretrained, cluster_data, small_array, train_cfg):
        spec, params = pretrained
        train, test = cluster_data
        return spec, params, train, test, small_array, train_cfg

    def test_fault_free_needs_no_retraining(self, setup):
        spec, params, train, test, array, train_cfg = setup
        cfg = ProfileConfig(
            fault_rates=[0.0], repeats=3, max_epochs=2, accuracy_target=0.8, train_cfg=train_cfg
        )
        table = profile(params, spec, train, test, array, cfg)
        assert table.entries[0].epochs_per_repeat == [0, 0, 0]
        assert table.entries[0].max == 0.0
        assert table.baseline_accuracy >= 0.8

    def test_repeats_per_entry(self, setup):
        spec, params, train, test, array, train_cfg = setup
        cfg = ProfileConfig(
            fault_rates=[0.0, 0.25], repeats=5, max_epochs=2, accuracy_target=0.8, train_cfg=train_cfg
        )
        table = profile(params, spec, train, test, array, cfg)
        assert [len(e.epochs_per_repeat) for e in table.entries] == [5, 5]
        assert all(len(e.mean_accuracy_curve) == 3 for e in table.entries)
        assert table.network_hash == spec.spec_hash()
        assert table.array == array

    def test_colliding_rates_refused_before_training(self, setup):
        spec, params, train, test, array, train_cfg = setup
        cfg = ProfileConfig(
            fault_rates=[0.0, 0.01], repeats=2, max_epochs=2, accuracy_target=0.8, train_cfg=train_cfg
        )
        with pytest.raises(ValueError):
            profile(params, spec, train, test, array, cfg)

    def test_all_faulty_unreachable(self, setup):
        spec, params, train, test, array, train_cfg = setup
        cfg = ProfileConfig(
            fault_rates=[0.0, 1.0], repeats=2, max_epochs=2, accuracy_target=0.6, train_cfg=train_cfg
        )
        table = profile(params, spec, train, test, array, cfg)
        assert table.entries[1].epochs_per_repeat == [None, None]
        assert not table.entries[1].reachable
        with pytest.raises(UnrecoverableRateError):
            select_budget(table, 1.0)

    async def test_scheduling_does_not_change_results(self, setup):
        spec, params, train, test, array, train_cfg = setup
        cfg = ProfileConfig(
            fault_rates=[0.0, 0.25, 0.5], repeats=3, max_epochs=3,
            accuracy_target=0.8, train_cfg=train_cfg, base_seed=77,
        )
        serial, serial_grid = await profile_async(params, spec, train, test, array, cfg, jobs=1)
        parallel, parallel_grid = await profile_async(params, spec, train, test, array, cfg, jobs=3)
        assert serial == parallel
        assert serial_grid.traces == parallel_grid.traces

    def test_rerun_is_identical(self, setup):
        spec, params, train, test, array, train_cfg = setup
        cfg = ProfileConfig(
            fault_rates=[0.0, 0.5], repeats=2, max_epochs=2, accuracy_target=0.8, train_cfg=train_cfg
        )
        first = profile(params, spec, train, test, array, cfg)
        second = profile(params, spec, train, test, array, cfg)
        assert first.model_dump_json() == second.model_dump_json()
