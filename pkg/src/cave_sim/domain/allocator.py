"""Vehicle-side compute allocation.

Each vehicle splits its capacity across the tasks it hosts. The optimal split of
sum_i C_i / g_i under sum_i g_i <= G follows from the KKT conditions in closed
form: g_i is proportional to sqrt(C_i). Vehicles are independent, so the
function is evaluated per vehicle without coordination.
"""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import StrEnum

from result import Err, Ok, Result

from cave_sim.domain.types import ErrorMessage, Gflop, Gflops, TaskId, VehicleId

type TaskShare = tuple[TaskId, Gflops]


@dataclass(frozen=True, slots=True)
class VehicleTaskLoad:
    """Tasks hosted by one vehicle together with its capacity.

    Attributes:
        vehicle_id: Hosting vehicle
        tasks: (task id, compute) for incoming and in-progress tasks
        capacity: G_j^max (GFLOPS)

    Examples:
        >>> load = VehicleTaskLoad(1, ((1, 100.0), (2, 400.0)), capacity=1e4)
        >>> len(load.tasks)
        2
    """

    vehicle_id: VehicleId
    tasks: tuple[tuple[TaskId, Gflop], ...]
    capacity: Gflops

    def __post_init__(self) -> None:
        if not self.capacity > 0:
            raise ValueError(f"vehicle {self.vehicle_id}: capacity must be > 0")
        if any(not c > 0 for _, c in self.tasks):
            raise ValueError(f"vehicle {self.vehicle_id}: task compute must be > 0")


class AllocationPolicy(StrEnum):
    KKT = "kkt"
    EQUAL = "equal"


def optimal_allocation(load: VehicleTaskLoad) -> list[TaskShare]:
    """Closed-form optimum g_i = sqrt(C_i) * G / sum_k sqrt(C_k).

    Examples:
        >>> load = VehicleTaskLoad(1, ((1, 100.0), (2, 400.0)), capacity=1e4)
        >>> [round(g, 2) for _, g in optimal_allocation(load)]
        [3333.33, 6666.67]
    """
    if not load.tasks:
        return []
    roots = [math.sqrt(c) for _, c in load.tasks]
    total = math.fsum(roots)
    return [
        (task_id, root * load.capacity / total)
        for (task_id, _), root in zip(load.tasks, roots)
    ]


def equal_allocation(load: VehicleTaskLoad) -> list[TaskShare]:
    """Equal share of the capacity for every hosted task."""
    if not load.tasks:
        return []
    share = load.capacity / len(load.tasks)
    return [(task_id, share) for task_id, _ in load.tasks]


def allocator_for(policy: AllocationPolicy) -> Callable[[VehicleTaskLoad], list[TaskShare]]:
    """Split function a vehicle applies every slot under the given policy.

    Args:
        policy: ``KKT`` for the square-root split, ``EQUAL`` for G / |tasks| each

    Returns:
        A function from a vehicle's load to one (task id, GFLOPS) pair per task

    Examples:
        >>> split = allocator_for(AllocationPolicy.EQUAL)
        >>> split(VehicleTaskLoad(1, ((1, 100.0), (2, 400.0)), capacity=1e4))
        [(1, 5000.0), (2, 5000.0)]
    """
    match policy:
        case AllocationPolicy.KKT:
            return optimal_allocation
        case AllocationPolicy.EQUAL:
            return equal_allocation


def allocation_cost(load: VehicleTaskLoad, allocation: Sequence[TaskShare]) -> float:
    """Aggregated compute latency sum_i C_i / g_i of an allocation."""
    shares = dict(allocation)
    return math.fsum(c / shares[task_id] for task_id, c in load.tasks)


def kkt_residual(
    load: VehicleTaskLoad, allocation: Sequence[TaskShare]
) -> Result[tuple[float, float], ErrorMessage]:
    """Stationarity and complementary-slackness residuals of an allocation.

    The multiplier is fixed at its optimal value lambda = (sum sqrt(C) / G)^2, so
    any allocation other than the optimum shows a positive stationarity residual.

    Returns:
        Ok((max_i |-C_i / g_i^2 + lambda|, |sum_i g_i - G|)), (0, 0) for an empty
        load, or Err when a task has no positive allocation
    """
    if not load.tasks:
        return Ok((0.0, 0.0))
    shares = dict(allocation)
    for task_id, _ in load.tasks:
        if not shares.get(task_id, 0.0) > 0:
            return Err(f"task {task_id} on vehicle {load.vehicle_id} has no positive allocation")
    lam = (math.fsum(math.sqrt(c) for _, c in load.tasks) / load.capacity) ** 2
    stationarity = max(abs(-c / shares[task_id] ** 2 + lam) for task_id, c in load.tasks)
    slackness = abs(math.fsum(shares[task_id] for task_id, _ in load.tasks) - load.capacity)
    return Ok((stationarity, slackness))
