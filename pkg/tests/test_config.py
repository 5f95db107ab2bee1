"""Tests for scenario configuration and its validation."""

import dataclasses

import pytest
from result import Err, Ok

from cave_sim.domain.assigner import BarrierSign, SwarmConfig
from cave_sim.domain.config import (
    ScenarioConfig,
    SchedulerKind,
    scenario_from_mapping,
    scenario_to_mapping,
    validated,
)


class TestDefaults:
    def test_reference_evaluation(self):
        config = ScenarioConfig()
        assert config.validate() == []
        assert config.slot_dt == 0.001
        assert config.n_vehicles == 20
        assert config.arrival_intensity == 20.0
        assert config.capacity == 1e4
        assert config.fail_threshold == 0.2
        assert config.scheduler is SchedulerKind.CAVE
        assert config.n_slots == 60_000

    def test_workload_ranges_follow_the_scenario(self):
        ranges = ScenarioConfig(fail_threshold=0.1, compute_range=(500.0, 600.0)).ranges
        assert ranges.fail_threshold == 0.1
        assert ranges.compute_range == (500.0, 600.0)


class TestValidation:
    @pytest.mark.parametrize(
        ("field", "value"),
        [
            ("slot_dt", 0.0),
            ("duration", -1.0),
            ("n_vehicles", 0),
            ("arrival_intensity", -0.5),
            ("fail_threshold", 0.0),
            ("fail_threshold", 1.5),
            ("capacity", 0.0),
            ("coverage_radius", 50.0),
            ("compute_range", (2000.0, 1000.0)),
            ("ego_capacity", -1.0),
            ("excess_loss_db", -3.0),
        ],
    )
    def test_rejects(self, field, value):
        config = dataclasses.replace(ScenarioConfig(), **{field: value})
        assert isinstance(validated(config), Err)

    def test_reports_every_problem(self):
        config = ScenarioConfig(n_vehicles=0, slot_dt=0.0, swarm=SwarmConfig(particles=1))
        errors = config.validate()
        assert len(errors) == 3
        assert any("swarm.particles" in e for e in errors)

    def test_zero_duration_is_allowed(self):
        assert validated(ScenarioConfig(duration=0.0)) == Ok(ScenarioConfig(duration=0.0))


class TestFromMapping:
    def test_empty_mapping_gives_the_defaults(self):
        assert scenario_from_mapping({}) == Ok(ScenarioConfig())

    def test_fields_and_nested_sections(self):
        config = scenario_from_mapping(
            {
                "duration": 5,
                "scheduler": "fpso_mr",
                "speed_range": [5, 10],
                "swarm": {"particles": 12, "barrier_sign": "literal"},
                "predictor": {"beta": 0.5},
            }
        ).unwrap()
        assert config.duration == 5.0
        assert config.scheduler is SchedulerKind.FPSO_MR
        assert config.speed_range == (5.0, 10.0)
        assert config.swarm.particles == 12
        assert config.swarm.iterations == SwarmConfig().iterations
        assert config.swarm.barrier_sign is BarrierSign.LITERAL
        assert config.predictor.beta == 0.5

    def test_unknown_keys_are_errors(self):
        result = scenario_from_mapping({"durration": 5.0, "swarm": {"size": 3}})
        assert isinstance(result, Err)
        assert "durration: unknown key" in result.err_value
        assert "swarm.size: unknown key" in result.err_value

    @pytest.mark.parametrize(
        ("data", "fragment"),
        [
            ({"n_vehicles": 2.5}, "n_vehicles"),
            ({"n_vehicles": True}, "n_vehicles"),
            ({"duration": "long"}, "duration"),
            ({"scheduler": "fastest"}, "scheduler"),
            ({"size_range": [1.0]}, "size_range"),
            ({"swarm": 3}, "swarm"),
        ],
    )
    def test_type_errors(self, data, fragment):
        result = scenario_from_mapping(data)
        assert isinstance(result, Err)
        assert fragment in result.err_value

    def test_collects_every_error(self):
        result = scenario_from_mapping({"seed": "x", "duration": "y", "bogus": 1})
        assert result.err_value.count(";") == 2

    def test_values_are_validated(self):
        result = scenario_from_mapping({"fail_threshold": 2.0})
        assert isinstance(result, Err)
        assert "fail_threshold" in result.err_value

    def test_written_mapping_reads_back(self):
        config = ScenarioConfig(
            duration=3.0,
            excess_loss_db=38.0,
            scheduler=SchedulerKind.BASELINE,
            swarm=SwarmConfig(particles=7, barrier_sign=BarrierSign.LITERAL),
        )
        assert scenario_from_mapping(scenario_to_mapping(config)) == Ok(config)
