"""Closed-form latency and reliability model.

Pure functions shared by the schedulers and the simulator: round-trip latency of
one replica, per-vehicle success probability, product-form task unreliability and
the aggregated-latency objective.
"""

import math
from collections.abc import Iterable, Mapping

from result import Err, Ok, Result

from cave_sim.domain.types import (
    Assignment,
    ErrorMessage,
    Gflops,
    LatencyResult,
    LinkRates,
    Pair,
    Probability,
    ProbabilityResult,
    Seconds,
    TaskSpec,
    VehicleState,
)


def round_trip_latency(task: TaskSpec, rates: LinkRates, g: Gflops) -> LatencyResult:
    """Latency of one replica: downlink + compute + uplink.

    Args:
        task: Task being executed
        rates: Downlink/uplink rates at the executing vehicle
        g: Compute allocated to the task (GFLOPS)

    Returns:
        Ok(D/R^d + C/g + E/R^u), or Err for a nonpositive allocation or rate,
        which means the caller passed an unassigned pair

    Examples:
        >>> task = TaskSpec(1, 0.0, 1000.0, 1e5, 5e4, 0.2)
        >>> round(round_trip_latency(task, LinkRates(1e7, 5e6), 1e4).ok_value, 6)
        0.12
    """
    if not g > 0:
        return Err(f"nonpositive allocation {g} for task {task.id}")
    if not (rates.down_rate > 0 and rates.up_rate > 0):
        return Err(f"nonpositive link rate {rates} for task {task.id}")
    return Ok(task.down_bits / rates.down_rate + task.compute / g + task.up_bits / rates.up_rate)


def reliability(vehicle: VehicleState, latency: Seconds) -> ProbabilityResult:
    """Probability that a replica with the given round-trip latency succeeds.

    P_j(x) = exp(-rate_j * x); the ego's own computer always succeeds.

    Examples:
        >>> v = VehicleState(1, (0.0, 0.0), (0.0, 0.0), capacity=1e4)
        >>> reliability(v, 0.0).ok_value
        1.0
    """
    if latency < 0:
        return Err(f"negative latency {latency} for vehicle {vehicle.id}")
    if vehicle.local:
        return Ok(1.0)
    return Ok(math.exp(-vehicle.reliability_rate * latency))


def task_unreliability(task_row: Iterable[tuple[VehicleState, Seconds]]) -> Probability:
    """Probability that every replica of a task fails.

    An empty row means the task runs nowhere, so it fails with certainty.

    Args:
        task_row: (vehicle, latency) for each assigned vehicle

    Returns:
        prod_j (1 - P_j(L_j))
    """
    factors: list[float] = []
    for vehicle, latency in task_row:
        match reliability(vehicle, latency):
            case Ok(p):
                factors.append(1.0 - p)
            case Err(error):
                raise ValueError(error)
    return float(math.prod(factors))


def objective_p0(
    tasks: Iterable[TaskSpec],
    assignment: Assignment,
    latencies: Mapping[Pair, Seconds],
) -> Result[Seconds, ErrorMessage]:
    """Aggregated latency of all assigned (task, vehicle) pairs."""
    task_ids = {task.id for task in tasks}
    terms: list[float] = []
    for pair in sorted(assignment.entries):
        if pair[0] not in task_ids:
            continue
        if pair not in latencies:
            return Err(f"no latency for assigned pair {pair}")
        terms.append(latencies[pair])
    return Ok(math.fsum(terms))
