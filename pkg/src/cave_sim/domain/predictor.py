"""Ego-side estimation of link rates and presumed allocations.

The ego vehicle cannot control the wireless links, so it learns them: every
observed transmission contributes a sample of the aggregate link rate (the
per-flow rate times the number of flows sharing it), and the next rate a task
would see is the exponentially weighted average of the window, shared equally
among the flows expected on the link.
"""

import logging
from collections import deque
from dataclasses import dataclass

from result import Err, Ok, Result

from cave_sim.domain.types import (
    BitsPerSecond,
    Direction,
    ErrorMessage,
    Gflops,
    LinkRates,
    Seconds,
    VehicleId,
    VehicleState,
)

logger = logging.getLogger(__name__)

type HistoryKey = tuple[VehicleId, Direction]


@dataclass(frozen=True, slots=True)
class PredictorConfig:
    """Rate predictor settings.

    Attributes:
        beta: EWMA weight of the newest sample
        window: Samples kept per (vehicle, direction)
        prior_down_rate: Aggregate downlink rate assumed before any observation
        prior_up_rate: Aggregate uplink rate assumed before any observation
    """

    beta: float = 0.3
    window: int = 50
    prior_down_rate: BitsPerSecond = 1e7
    prior_up_rate: BitsPerSecond = 1e7

    def validate(self) -> list[ErrorMessage]:
        errors: list[ErrorMessage] = []
        if not 0 < self.beta <= 1:
            errors.append(f"predictor.beta must be in (0, 1], got {self.beta}")
        if self.window < 1:
            errors.append(f"predictor.window must be >= 1, got {self.window}")
        if not (self.prior_down_rate > 0 and self.prior_up_rate > 0):
            errors.append("predictor prior rates must be > 0")
        return errors


@dataclass(frozen=True, slots=True)
class RateSample:
    time: Seconds
    rate: BitsPerSecond
    concurrent_flows: int

    @property
    def aggregate(self) -> BitsPerSecond:
        return self.rate * self.concurrent_flows


class RateHistory:
    """Windowed rate observations per (vehicle, direction).

    Single writer (the simulation loop), any number of readers between writes.

    Examples:
        >>> history = RateHistory(PredictorConfig(prior_down_rate=1e7, prior_up_rate=1e7))
        >>> history.predict_rates(vehicle_id=3, planned_extra_flows=1).down_rate
        10000000.0
    """

    def __init__(self, config: PredictorConfig) -> None:
        self._config = config
        self._samples: dict[HistoryKey, deque[RateSample]] = {}
        self._flows: dict[HistoryKey, int] = {}

    @property
    def config(self) -> PredictorConfig:
        return self._config

    def observe(
        self,
        vehicle_id: VehicleId,
        direction: Direction,
        time: Seconds,
        rate: BitsPerSecond,
        concurrent_flows: int,
    ) -> Result[None, ErrorMessage]:
        """Record the per-flow rate seen while ``concurrent_flows`` shared the link.

        Returns:
            Ok(None), or Err for a non-increasing timestamp, a nonpositive rate or
            an empty flow count; rejected samples leave the history unchanged
        """
        key = (vehicle_id, direction)
        samples = self._samples.get(key)
        if samples and time <= samples[-1].time:
            return Err(
                f"out-of-order sample for vehicle {vehicle_id} {direction}: "
                f"{time} after {samples[-1].time}"
            )
        if not rate > 0:
            return Err(f"nonpositive rate {rate} for vehicle {vehicle_id} {direction}")
        if concurrent_flows < 1:
            return Err(f"observation needs at least one flow, got {concurrent_flows}")
        if samples is None:
            samples = self._samples[key] = deque(maxlen=self._config.window)
        samples.append(RateSample(time=time, rate=rate, concurrent_flows=concurrent_flows))
        self._flows[key] = concurrent_flows
        return Ok(None)

    def set_active_flows(self, vehicle_id: VehicleId, direction: Direction, count: int) -> None:
        """Number of tasks currently transmitting in ``direction`` with the vehicle."""
        self._flows[(vehicle_id, direction)] = max(0, count)

    def active_flows(self, vehicle_id: VehicleId, direction: Direction) -> int:
        return self._flows.get((vehicle_id, direction), 0)

    def history(self, vehicle_id: VehicleId, direction: Direction) -> tuple[RateSample, ...]:
        return tuple(self._samples.get((vehicle_id, direction), ()))

    def aggregate_estimate(self, vehicle_id: VehicleId, direction: Direction) -> BitsPerSecond:
        """EWMA of the aggregate link rate, or the prior before any sample."""
        samples = self._samples.get((vehicle_id, direction))
        if not samples:
            match direction:
                case Direction.DOWN:
                    return self._config.prior_down_rate
                case Direction.UP:
                    return self._config.prior_up_rate
        beta = self._config.beta
        estimate = samples[0].aggregate
        for sample in list(samples)[1:]:
            estimate = beta * sample.aggregate + (1.0 - beta) * estimate
        return estimate

    def predict_rates(self, vehicle_id: VehicleId, planned_extra_flows: int) -> LinkRates:
        """Next per-flow rates if ``planned_extra_flows`` more tasks join each link."""

        def per_flow(direction: Direction) -> BitsPerSecond:
            flows = self.active_flows(vehicle_id, direction) + planned_extra_flows
            return self.aggregate_estimate(vehicle_id, direction) / max(1, flows)

        return LinkRates(down_rate=per_flow(Direction.DOWN), up_rate=per_flow(Direction.UP))

    def forget(self, vehicle_id: VehicleId) -> None:
        """Drop everything known about a vehicle that left coverage."""
        for direction in Direction:
            self._samples.pop((vehicle_id, direction), None)
            self._flows.pop((vehicle_id, direction), None)
        logger.debug("forgot rate history of vehicle %d", vehicle_id)


def presumed_allocation(vehicle: VehicleState, extra_tasks: int) -> Gflops:
    """Equal share of the vehicle's capacity once ``extra_tasks`` join K_j.

    Examples:
        >>> v = VehicleState(1, (0.0, 0.0), (0.0, 0.0), capacity=1e4,
        ...                  in_progress=frozenset({1, 2, 3}))
        >>> presumed_allocation(v, 1)
        2500.0
    """
    if extra_tasks < 1:
        raise ValueError(f"extra_tasks must be >= 1, got {extra_tasks}")
    return vehicle.capacity / (len(vehicle.in_progress) + extra_tasks)
