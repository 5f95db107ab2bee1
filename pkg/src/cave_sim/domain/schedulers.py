"""Scheduling policies compared by the simulator.

- ``CaveScheduler``: swarm search aware of in-progress tasks, KKT allocation on
  the vehicles.
- ``FpsoMrScheduler``: the same swarm search with in-progress latency left out
  of its objective, and capacity split equally on the vehicles.
- ``BaselineScheduler``: one replica on the least-loaded vehicle, equal split.
"""

import logging
from collections.abc import Sequence

import numpy as np
from result import Err, Ok, Result

from cave_sim.domain.allocator import AllocationPolicy
from cave_sim.domain.assigner import (
    AssignmentOutcome,
    SwarmConfig,
    build_problem,
    feasibility_check,
    objective_p1,
    predicted_unreliability,
    pso_assign,
)
from cave_sim.domain.config import SchedulerKind
from cave_sim.domain.predictor import RateHistory
from cave_sim.domain.types import (
    Assignment,
    ErrorMessage,
    TaskSpec,
    VehicleState,
)
from cave_sim.ports.scheduler import FleetView, Scheduler

logger = logging.getLogger(__name__)


def assign_baseline(task: TaskSpec, vehicles: Sequence[VehicleState]) -> Assignment:
    """Single replica on the vehicle with the fewest in-progress tasks, lowest id on ties.

    Examples:
        >>> v = [VehicleState(i, (0.0, 0.0), (0.0, 0.0), 1e4, in_progress=frozenset(range(k)))
        ...      for i, k in ((1, 3), (2, 1), (3, 2))]
        >>> assign_baseline(TaskSpec(9, 0.0, 1000.0, 0.0, 0.0, 0.2), v).vehicles_for(9)
        (2,)
    """
    if not vehicles:
        raise ValueError("baseline assignment needs at least one vehicle")
    target = min(vehicles, key=lambda vehicle: (len(vehicle.in_progress), vehicle.id))
    return Assignment.of([(task.id, target.id)])


def assign_fpso_mr(
    incoming: Sequence[TaskSpec],
    vehicles: Sequence[VehicleState],
    predictor: RateHistory,
    config: SwarmConfig,
    *,
    rng: np.random.Generator | None = None,
) -> Result[AssignmentOutcome, ErrorMessage]:
    """Swarm assignment that does not optimize for in-progress tasks.

    Predictions still see what the vehicles are running: a busy vehicle offers
    an equal share of its capacity and its links are shared with the active
    flows. What changes is the objective, which scores the incoming tasks only,
    so a choice that stretches running work costs nothing.

    Args:
        incoming: Tasks to assign, nonempty
        vehicles: Visible vehicles with their in-progress task ids
        predictor: Link-rate estimates and active flow counts
        config: Same swarm settings as the aware search
        rng: Random stream; defaults to one seeded with ``config.seed``

    Returns:
        Ok(outcome), or Err when there is nothing to assign or nowhere to assign it
    """
    return pso_assign(
        incoming, (), vehicles, predictor, config, rng=rng, include_in_progress=False
    )


class CaveScheduler:
    """Swarm assignment aware of in-progress tasks, KKT split on the vehicles.

    Args:
        swarm: Swarm and barrier settings
        rng: Stream every decision draws from; successive decisions advance it

    Examples:
        >>> scheduler = CaveScheduler(SwarmConfig(), np.random.default_rng(0))
        >>> scheduler.allocation_policy
        <AllocationPolicy.KKT: 'kkt'>
    """

    def __init__(self, swarm: SwarmConfig, rng: np.random.Generator) -> None:
        self._swarm = swarm
        self._rng = rng

    @property
    def allocation_policy(self) -> AllocationPolicy:
        return AllocationPolicy.KKT

    def assign(
        self, incoming: Sequence[TaskSpec], view: FleetView
    ) -> Result[AssignmentOutcome, ErrorMessage]:
        return pso_assign(
            incoming, view.in_progress, view.vehicles, view.predictor, self._swarm, rng=self._rng
        )


class FpsoMrScheduler:
    """Swarm assignment without in-progress latency, equal split on the vehicles.

    Args:
        swarm: Swarm settings, shared with ``CaveScheduler`` in comparisons
        rng: Stream every decision draws from
    """

    def __init__(self, swarm: SwarmConfig, rng: np.random.Generator) -> None:
        self._swarm = swarm
        self._rng = rng

    @property
    def allocation_policy(self) -> AllocationPolicy:
        return AllocationPolicy.EQUAL

    def assign(
        self, incoming: Sequence[TaskSpec], view: FleetView
    ) -> Result[AssignmentOutcome, ErrorMessage]:
        return assign_fpso_mr(incoming, view.vehicles, view.predictor, self._swarm, rng=self._rng)


class BaselineScheduler:
    """Least-workload placement; tasks of one batch are placed one after another.

    Each task gets a single replica on the vehicle with the fewest in-progress
    tasks, lowest id on ties, and counts towards that vehicle's load for the
    rest of the batch. The outcome reports the predicted reliability of the
    placement but the placement never depends on it.

    Examples:
        >>> BaselineScheduler().allocation_policy
        <AllocationPolicy.EQUAL: 'equal'>
    """

    @property
    def allocation_policy(self) -> AllocationPolicy:
        return AllocationPolicy.EQUAL

    def assign(
        self, incoming: Sequence[TaskSpec], view: FleetView
    ) -> Result[AssignmentOutcome, ErrorMessage]:
        if not view.vehicles:
            return Err("no vehicles available to host tasks")
        fleet = {vehicle.id: vehicle for vehicle in view.vehicles}
        assignment = Assignment()
        for task in incoming:
            placed = assign_baseline(task, list(fleet.values()))
            assignment = assignment.merged(placed)
            for _, vehicle_id in placed.entries:
                host = fleet[vehicle_id]
                fleet[vehicle_id] = host.with_in_progress(host.in_progress | {task.id})

        problem = build_problem(incoming, view.in_progress, view.vehicles, view.predictor)
        return Ok(
            AssignmentOutcome(
                assignment=assignment,
                feasible=all(feasibility_check(assignment, problem).values()),
                objective=objective_p1(assignment, problem),
                predicted_unreliability=predicted_unreliability(assignment, problem),
                candidates=tuple(vehicle.id for vehicle in view.vehicles),
            )
        )


def make_scheduler(
    kind: SchedulerKind, swarm: SwarmConfig, rng: np.random.Generator
) -> Scheduler:
    """Factory that creates the scheduler named in the scenario."""
    match kind:
        case SchedulerKind.CAVE:
            return CaveScheduler(swarm, rng)
        case SchedulerKind.FPSO_MR:
            return FpsoMrScheduler(swarm, rng)
        case SchedulerKind.BASELINE:
            return BaselineScheduler()
