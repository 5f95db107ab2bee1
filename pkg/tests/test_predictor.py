"""Tests for the link-rate predictor and presumed allocations."""

import pytest
from result import Err, Ok

from cave_sim.domain.predictor import PredictorConfig, RateHistory, presumed_allocation
from cave_sim.domain.types import Direction


def history(**overrides: float) -> RateHistory:
    return RateHistory(PredictorConfig(**overrides))


class TestObserve:
    def test_first_sample_starts_the_history(self):
        rates = history(window=3)
        assert rates.observe(1, Direction.DOWN, 0.0, 1e7, 1) == Ok(None)
        assert len(rates.history(1, Direction.DOWN)) == 1

    def test_window_keeps_the_newest_samples(self):
        rates = history(window=3)
        for step in range(4):
            rates.observe(1, Direction.DOWN, step * 0.001, 1e6 * (step + 1), 1).unwrap()
        kept = rates.history(1, Direction.DOWN)
        assert len(kept) == 3
        assert [s.rate for s in kept] == [2e6, 3e6, 4e6]

    def test_same_timestamp_is_rejected(self):
        rates = history()
        rates.observe(1, Direction.UP, 0.5, 1e7, 1).unwrap()
        assert isinstance(rates.observe(1, Direction.UP, 0.5, 2e7, 1), Err)
        assert len(rates.history(1, Direction.UP)) == 1

    def test_directions_are_independent(self):
        rates = history()
        rates.observe(1, Direction.UP, 0.5, 1e7, 1).unwrap()
        assert rates.observe(1, Direction.DOWN, 0.1, 1e7, 1) == Ok(None)

    @pytest.mark.parametrize(("rate", "flows"), [(0.0, 1), (-5.0, 1), (1e7, 0)])
    def test_degenerate_samples_are_rejected(self, rate, flows):
        rates = history()
        assert isinstance(rates.observe(1, Direction.DOWN, 0.0, rate, flows), Err)
        assert rates.history(1, Direction.DOWN) == ()


class TestPredictRates:
    def test_prior_before_any_observation(self):
        rates = history(prior_down_rate=1e7, prior_up_rate=5e6)
        predicted = rates.predict_rates(4, planned_extra_flows=1)
        assert predicted.down_rate == 1e7
        assert predicted.up_rate == 5e6

    def test_aggregate_is_shared_by_active_and_planned_flows(self):
        rates = history()
        rates.observe(1, Direction.DOWN, 0.0, 1e7, 1).unwrap()
        assert rates.predict_rates(1, planned_extra_flows=1).down_rate == pytest.approx(5e6)

    def test_aggregate_counts_the_flows_of_each_sample(self):
        rates = history()
        rates.observe(1, Direction.DOWN, 0.0, 2.5e6, 4).unwrap()
        rates.set_active_flows(1, Direction.DOWN, 0)
        assert rates.predict_rates(1, planned_extra_flows=1).down_rate == pytest.approx(1e7)

    def test_ewma_weighs_the_newest_sample(self):
        rates = history(beta=0.5)
        rates.observe(1, Direction.DOWN, 0.0, 1e7, 1).unwrap()
        rates.observe(1, Direction.DOWN, 0.001, 2e7, 1).unwrap()
        rates.set_active_flows(1, Direction.DOWN, 0)
        assert rates.predict_rates(1, planned_extra_flows=1).down_rate == pytest.approx(1.5e7)

    def test_constant_rate_is_a_fixed_point(self):
        rates = history(beta=0.3, window=5)
        for step in range(10):
            rates.observe(2, Direction.UP, step * 0.001, 8e6, 1).unwrap()
        assert rates.aggregate_estimate(2, Direction.UP) == pytest.approx(8e6)

    def test_forget_returns_to_the_prior(self):
        rates = history(prior_down_rate=1e7)
        rates.observe(1, Direction.DOWN, 0.0, 3e6, 2).unwrap()
        rates.forget(1)
        assert rates.history(1, Direction.DOWN) == ()
        assert rates.active_flows(1, Direction.DOWN) == 0
        assert rates.predict_rates(1, planned_extra_flows=1).down_rate == 1e7


class TestPresumedAllocation:
    @pytest.mark.parametrize(
        ("hosted", "extra", "expected"), [(0, 1, 1e4), (3, 1, 2500.0), (1, 1, 5000.0)]
    )
    def test_equal_share(self, make_vehicle, hosted, extra, expected):
        vehicle = make_vehicle(in_progress=range(hosted))
        assert presumed_allocation(vehicle, extra) == pytest.approx(expected)

    def test_needs_at_least_one_new_task(self, make_vehicle):
        with pytest.raises(ValueError):
            presumed_allocation(make_vehicle(), 0)


class TestPredictorConfig:
    def test_defaults_are_valid(self):
        assert PredictorConfig().validate() == []

    def test_reports_every_problem(self):
        errors = PredictorConfig(beta=0.0, window=0, prior_down_rate=-1.0).validate()
        assert len(errors) == 3
