"""Shared fixtures: task and vehicle factories, a predictor and a small scenario."""

from collections.abc import Callable, Iterable

import pytest

from cave_sim.domain.assigner import SwarmConfig
from cave_sim.domain.config import ScenarioConfig
from cave_sim.domain.predictor import PredictorConfig, RateHistory
from cave_sim.domain.types import TaskId, TaskSpec, VehicleState

type TaskFactory = Callable[..., TaskSpec]
type VehicleFactory = Callable[..., VehicleState]


@pytest.fixture
def make_task() -> TaskFactory:
    """Task with the reference payloads: C = 1000, D = 1e5, E = 5e4, H = 0.2."""

    def factory(
        task_id: TaskId = 1,
        compute: float = 1000.0,
        down_bits: float = 1e5,
        up_bits: float = 5e4,
        fail_threshold: float = 0.2,
        arrival_time: float = 0.0,
    ) -> TaskSpec:
        return TaskSpec(
            id=task_id,
            arrival_time=arrival_time,
            compute=compute,
            down_bits=down_bits,
            up_bits=up_bits,
            fail_threshold=fail_threshold,
        )

    return factory


@pytest.fixture
def make_vehicle() -> VehicleFactory:
    def factory(
        vehicle_id: int = 1,
        capacity: float = 1e4,
        reliability_rate: float = 1.0,
        in_progress: Iterable[TaskId] = (),
        position: tuple[float, float] = (10.0, 0.0),
        velocity: tuple[float, float] = (0.0, 0.0),
        local: bool = False,
    ) -> VehicleState:
        return VehicleState(
            id=vehicle_id,
            position=position,
            velocity=velocity,
            capacity=capacity,
            reliability_rate=reliability_rate,
            in_progress=frozenset(in_progress),
            local=local,
        )

    return factory


@pytest.fixture
def predictor() -> RateHistory:
    """No observations yet: 1e7 bit/s down, 5e6 bit/s up."""
    return RateHistory(PredictorConfig(prior_down_rate=1e7, prior_up_rate=5e6))


@pytest.fixture
def small_swarm() -> SwarmConfig:
    return SwarmConfig(particles=10, iterations=10, candidates=5)


@pytest.fixture
def small_scenario(small_swarm: SwarmConfig) -> ScenarioConfig:
    """One simulated second, five vehicles, a light swarm."""
    return ScenarioConfig(duration=1.0, n_vehicles=5, swarm=small_swarm)
