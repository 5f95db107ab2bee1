"""Scenario configuration and its validation.

``ScenarioConfig`` carries every knob of a simulation run with the defaults of
the reference evaluation: 20 passing-by vehicles within 100 m, 10 MHz links at
20 dBm, 20 tasks/s, payloads of 10-100 Kbit, 1000-2000 GFLOP per task, 10 TFLOPS
per vehicle, failure threshold 0.2 and P(x) = exp(-x).

Mappings (parsed JSON) are turned into configs by ``scenario_from_mapping``;
keys mirror field names exactly and every problem found is reported, not only
the first.
"""

import dataclasses
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

from result import Err, Ok, Result

from cave_sim.domain.assigner import SwarmConfig
from cave_sim.domain.predictor import PredictorConfig
from cave_sim.domain.types import Bits, ErrorMessage, Gflop, Gflops, Meters, Probability, Seconds
from cave_sim.domain.workload import WorkloadRanges
from cave_sim.utils.railway import collect_errors


class SchedulerKind(StrEnum):
    CAVE = "cave"
    BASELINE = "baseline"
    FPSO_MR = "fpso_mr"


@dataclass(frozen=True, slots=True)
class ScenarioConfig:
    """Full input of one simulation run.

    Attributes:
        slot_dt: Slot length (s)
        duration: Simulated time (s)
        n_vehicles: Passing-by vehicles kept in range
        spawn_radius: Radius of the disk new vehicles appear in (m)
        coverage_radius: Distance beyond which a vehicle is out of reach (m)
        speed_range: Uniform range of relative speeds (m/s)
        bandwidth: Bandwidth per direction (Hz)
        tx_power: Transmit power (dBm)
        excess_loss_db: Extra attenuation on every link, on top of the distance
            path loss (dB)
        arrival_intensity: Task arrivals per second
        size_range: Uniform range of each payload (bits)
        compute_range: Uniform range of compute demand (GFLOP)
        capacity: Compute capacity per vehicle (GFLOPS)
        fail_threshold: H^min of every task
        reliability_rate: Decay constant of P(x) = exp(-rate x) (1/s)
        ego_capacity: Compute of the ego itself; 0 disables local computing
        scheduler: Scheduling policy
        seed: Root seed of every random stream
        swarm: Swarm settings for the PSO-based schedulers
        predictor: Link-rate predictor settings
    """

    slot_dt: Seconds = 0.001
    duration: Seconds = 60.0
    n_vehicles: int = 20
    spawn_radius: Meters = 100.0
    coverage_radius: Meters = 300.0
    speed_range: tuple[float, float] = (8.0, 15.0)
    bandwidth: float = 10e6
    tx_power: float = 20.0
    excess_loss_db: float = 0.0
    arrival_intensity: float = 20.0
    size_range: tuple[Bits, Bits] = (1e4, 1e5)
    compute_range: tuple[Gflop, Gflop] = (1000.0, 2000.0)
    capacity: Gflops = 1e4
    fail_threshold: Probability = 0.2
    reliability_rate: float = 1.0
    ego_capacity: Gflops = 0.0
    scheduler: SchedulerKind = SchedulerKind.CAVE
    seed: int = 0
    swarm: SwarmConfig = field(default_factory=SwarmConfig)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)

    @property
    def ranges(self) -> WorkloadRanges:
        return WorkloadRanges(
            size_range=self.size_range,
            compute_range=self.compute_range,
            fail_threshold=self.fail_threshold,
        )

    @property
    def n_slots(self) -> int:
        return int(round(self.duration / self.slot_dt))

    def validate(self) -> list[ErrorMessage]:
        errors: list[ErrorMessage] = []
        positive = {
            "slot_dt": self.slot_dt,
            "spawn_radius": self.spawn_radius,
            "coverage_radius": self.coverage_radius,
            "bandwidth": self.bandwidth,
            "capacity": self.capacity,
            "reliability_rate": self.reliability_rate,
        }
        errors.extend(f"{name} must be > 0, got {value}" for name, value in positive.items()
                      if not value > 0)
        if self.duration < 0:
            errors.append(f"duration must be >= 0, got {self.duration}")
        if self.n_vehicles < 1:
            errors.append(f"n_vehicles must be >= 1, got {self.n_vehicles}")
        if self.arrival_intensity < 0:
            errors.append(f"arrival_intensity must be >= 0, got {self.arrival_intensity}")
        if self.excess_loss_db < 0:
            errors.append(f"excess_loss_db must be >= 0, got {self.excess_loss_db}")
        if self.ego_capacity < 0:
            errors.append(f"ego_capacity must be >= 0, got {self.ego_capacity}")
        if self.spawn_radius >= self.coverage_radius:
            errors.append("spawn_radius must be smaller than coverage_radius")
        if not 0 < self.fail_threshold <= 1:
            errors.append(f"fail_threshold must be in (0, 1], got {self.fail_threshold}")
        for name, (low, high), floor in (
            ("speed_range", self.speed_range, 0.0),
            ("size_range", self.size_range, 0.0),
            ("compute_range", self.compute_range, None),
        ):
            if low > high:
                errors.append(f"{name} is empty: [{low}, {high}]")
            if floor is not None and low < floor:
                errors.append(f"{name} must be >= {floor}")
            if floor is None and not low > 0:
                errors.append(f"{name} must be > 0")
        errors.extend(self.swarm.validate())
        errors.extend(self.predictor.validate())
        return errors


def validated(config: ScenarioConfig) -> Result[ScenarioConfig, ErrorMessage]:
    errors = config.validate()
    if errors:
        return Err("; ".join(errors))
    return Ok(config)


def _coerce(path: str, value: Any, default: Any) -> Result[Any, ErrorMessage]:
    """Convert a JSON value to the type of the field's default."""
    match default:
        case bool():
            if isinstance(value, bool):
                return Ok(value)
        case StrEnum():
            choices = [member.value for member in type(default)]
            if isinstance(value, str) and value in choices:
                return Ok(type(default)(value))
            return Err(f"{path}: expected one of {choices}, got {value!r}")
        case int():
            if isinstance(value, int) and not isinstance(value, bool):
                return Ok(value)
        case float():
            if isinstance(value, int | float) and not isinstance(value, bool):
                return Ok(float(value))
        case tuple():
            if (
                isinstance(value, list | tuple)
                and len(value) == 2
                and all(isinstance(v, int | float) and not isinstance(v, bool) for v in value)
            ):
                return Ok((float(value[0]), float(value[1])))
            return Err(f"{path}: expected a [low, high] pair, got {value!r}")
        case SwarmConfig() | PredictorConfig():
            if isinstance(value, Mapping):
                return _build(type(default), value, f"{path}.")
    return Err(f"{path}: expected {type(default).__name__}, got {type(value).__name__}")


def _build[T](cls: type[T], data: Mapping[str, Any], prefix: str = "") -> Result[T, ErrorMessage]:
    defaults = cls()
    names = {f.name for f in dataclasses.fields(cls)}  # type: ignore[arg-type]
    unknown = sorted(set(data) - names)
    results = [
        Err(f"{prefix}{key}: unknown key") for key in unknown
    ] + [
        _coerce(f"{prefix}{key}", data[key], getattr(defaults, key)).map(lambda v, k=key: (k, v))
        for key in sorted(data)
        if key in names
    ]
    errors = collect_errors(iter(results))
    if errors:
        return Err("; ".join(errors))
    values = dict(result.ok_value for result in results)
    return Ok(cls(**values))


def scenario_from_mapping(data: Mapping[str, Any]) -> Result[ScenarioConfig, ErrorMessage]:
    """Build and validate a scenario from parsed JSON.

    Examples:
        >>> scenario_from_mapping({"duration": 1.0, "scheduler": "baseline"}).ok_value.duration
        1.0
    """
    match _build(ScenarioConfig, data):
        case Ok(config):
            return validated(config)
        case Err(error):
            return Err(error)


def scenario_to_mapping(config: ScenarioConfig) -> dict[str, Any]:
    """JSON-ready mapping that ``scenario_from_mapping`` reads back."""

    def plain(value: Any) -> Any:
        match value:
            case StrEnum():
                return value.value
            case tuple():
                return list(value)
            case SwarmConfig() | PredictorConfig():
                return {f.name: plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
            case _:
                return value

    return {f.name: plain(getattr(config, f.name)) for f in dataclasses.fields(config)}
