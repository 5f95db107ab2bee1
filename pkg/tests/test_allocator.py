"""Tests for the per-vehicle compute split."""

import dataclasses
import math

import numpy as np
import pytest
from result import Err, Ok

from cave_sim.domain.allocator import (
    AllocationPolicy,
    VehicleTaskLoad,
    allocation_cost,
    allocator_for,
    equal_allocation,
    kkt_residual,
    optimal_allocation,
)
from cave_sim.domain.oracles import numerical_allocation_cost, random_load

TOL = 1e-6


def load_of(*compute: float, capacity: float = 1e4) -> VehicleTaskLoad:
    return VehicleTaskLoad(
        vehicle_id=1, tasks=tuple((i + 1, c) for i, c in enumerate(compute)), capacity=capacity
    )


class TestOptimalAllocation:
    def test_single_task_takes_everything(self):
        [(task_id, g)] = optimal_allocation(load_of(1000.0))
        assert task_id == 1
        assert g == pytest.approx(1e4)

    def test_shares_follow_square_roots(self):
        shares = dict(optimal_allocation(load_of(100.0, 400.0)))
        assert shares[1] == pytest.approx(1e4 / 3)
        assert shares[2] == pytest.approx(2e4 / 3)

    def test_equal_demands_split_equally(self):
        shares = [g for _, g in optimal_allocation(load_of(500.0, 500.0, 500.0, 500.0))]
        assert shares == pytest.approx([2500.0] * 4)

    def test_uses_the_whole_capacity(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            load = random_load(rng)
            total = math.fsum(g for _, g in optimal_allocation(load))
            assert total == pytest.approx(load.capacity, rel=1e-12)

    def test_empty_load(self):
        assert optimal_allocation(load_of()) == []

    def test_beats_the_equal_split(self):
        load = load_of(100.0, 400.0, 1600.0)
        kkt = allocation_cost(load, optimal_allocation(load))
        equal = allocation_cost(load, equal_allocation(load))
        assert kkt < equal

    @pytest.mark.parametrize("seed", range(5))
    def test_shares_scale_with_capacity_not_with_demand(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(20):
            load = random_load(rng)
            factor = float(rng.uniform(0.1, 10.0))
            shares = dict(optimal_allocation(load))
            bigger = dataclasses.replace(load, capacity=load.capacity * factor)
            heavier = dataclasses.replace(
                load, tasks=tuple((task_id, c * factor) for task_id, c in load.tasks)
            )
            for task_id, g in optimal_allocation(bigger):
                assert g == pytest.approx(shares[task_id] * factor, rel=1e-9)
            for task_id, g in optimal_allocation(heavier):
                assert g == pytest.approx(shares[task_id], rel=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_task_order_does_not_matter(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(20):
            load = random_load(rng)
            order = rng.permutation(len(load.tasks))
            shuffled = dataclasses.replace(load, tasks=tuple(load.tasks[k] for k in order))
            shares = dict(optimal_allocation(load))
            for task_id, g in optimal_allocation(shuffled):
                assert g == pytest.approx(shares[task_id], rel=1e-12)


class TestKktResidual:
    def test_optimum_satisfies_the_conditions(self):
        load = load_of(100.0, 400.0, 900.0)
        stationarity, slackness = kkt_residual(load, optimal_allocation(load)).unwrap()
        assert stationarity < TOL
        assert slackness < TOL

    def test_equal_split_of_unequal_demands_is_not_stationary(self):
        load = load_of(100.0, 400.0)
        stationarity, slackness = kkt_residual(load, equal_allocation(load)).unwrap()
        assert stationarity > 0
        assert slackness == pytest.approx(0.0, abs=TOL)

    def test_empty_load_has_no_residual(self):
        assert kkt_residual(load_of(), []) == Ok((0.0, 0.0))

    def test_missing_share_is_an_error(self):
        load = load_of(100.0, 400.0)
        assert isinstance(kkt_residual(load, [(1, 5000.0), (2, 0.0)]), Err)
        assert isinstance(kkt_residual(load, [(1, 5000.0)]), Err)


class TestAllocatorFor:
    def test_policies(self):
        assert allocator_for(AllocationPolicy.KKT) is optimal_allocation
        assert allocator_for(AllocationPolicy.EQUAL) is equal_allocation

    def test_equal_split(self):
        assert equal_allocation(load_of(100.0, 400.0)) == [(1, 5000.0), (2, 5000.0)]


class TestVehicleTaskLoad:
    def test_rejects_nonpositive_capacity(self):
        with pytest.raises(ValueError, match="capacity"):
            VehicleTaskLoad(1, ((1, 100.0),), capacity=0.0)

    def test_rejects_nonpositive_compute(self):
        with pytest.raises(ValueError, match="compute"):
            VehicleTaskLoad(1, ((1, 0.0),), capacity=1e4)


def test_closed_form_matches_numerical_minimizer():
    rng = np.random.default_rng(11)
    for _ in range(10):
        load = random_load(rng)
        closed = allocation_cost(load, optimal_allocation(load))
        numerical = numerical_allocation_cost(load)
        assert (closed - numerical) / numerical < TOL
