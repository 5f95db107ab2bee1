"""Scheduler port (interface).

This module defines the protocol the simulation loop uses to dispatch arriving
tasks. Implementations live in ``domain.schedulers``; the loop only sees the
protocol and the read-only ``FleetView`` it hands over.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Protocol

from result import Result

from cave_sim.domain.allocator import AllocationPolicy
from cave_sim.domain.assigner import AssignmentOutcome
from cave_sim.domain.predictor import RateHistory
from cave_sim.domain.types import ErrorMessage, InProgressTask, Seconds, TaskSpec, VehicleState


@dataclass(frozen=True, slots=True)
class FleetView:
    """What the ego vehicle knows when a batch of tasks arrives.

    Attributes:
        vehicles: Vehicles in coverage, with their in-progress task ids
        in_progress: Remaining work of every unfinished replica
        predictor: Link-rate estimates
        now: Current simulated time (s)
    """

    vehicles: tuple[VehicleState, ...]
    in_progress: tuple[InProgressTask, ...]
    predictor: RateHistory
    now: Seconds = 0.0


class Scheduler(Protocol):
    """Protocol for task assignment policies.

    Implementations return Err instead of raising when a batch cannot be placed
    at all; an infeasible but placeable batch is an Ok outcome flagged
    ``feasible=False``.

    Examples:
        >>> from result import Ok
        >>> from cave_sim.domain.types import Assignment
        >>>
        >>> class Nowhere:
        ...     allocation_policy = AllocationPolicy.EQUAL
        ...     def assign(self, incoming, view):
        ...         return Ok(AssignmentOutcome(Assignment(), True, 0.0, {}))
        >>>
        >>> scheduler: Scheduler = Nowhere()
        >>> scheduler.allocation_policy
        <AllocationPolicy.EQUAL: 'equal'>
    """

    @property
    def allocation_policy(self) -> AllocationPolicy:
        """How hosting vehicles split their capacity among the assigned tasks."""
        ...

    def assign(
        self, incoming: Sequence[TaskSpec], view: FleetView
    ) -> Result[AssignmentOutcome, ErrorMessage]:
        """Choose the vehicles that receive a replica of each incoming task."""
        ...
