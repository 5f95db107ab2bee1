"""Per-task and per-replica bookkeeping of a simulation run.

Unlike the value types in ``types``, these records are updated in place by the
simulation loop: a replica walks Down -> Compute -> Up -> Done, or ends Failed
when its vehicle leaves coverage.
"""

import math
from dataclasses import dataclass, field
from enum import StrEnum

from cave_sim.domain.types import Probability, Seconds, TaskSpec, VehicleId, VehicleState


class Phase(StrEnum):
    DOWN = "down"
    COMPUTE = "compute"
    UP = "up"
    DONE = "done"
    FAILED = "failed"


WORK_PHASES = (Phase.DOWN, Phase.COMPUTE, Phase.UP)


@dataclass(frozen=True, slots=True)
class TaskSucceeded:
    latency: Seconds


@dataclass(frozen=True, slots=True)
class TaskFailed:
    pass


type Outcome = TaskSucceeded | TaskFailed


def _per_phase() -> dict[Phase, float]:
    return dict.fromkeys(WORK_PHASES, 0.0)


@dataclass(slots=True)
class ReplicaRecord:
    """One replica of a task on one vehicle.

    Attributes:
        vehicle: Snapshot of the executing vehicle at dispatch
        phase: Current lifecycle phase
        remaining: Bits or GFLOP left in the current phase
        dispatched_at: Dispatch time (s)
        phase_times: Time spent in each work phase (s)
        deducted: Work removed in each work phase (bits or GFLOP)
        finished_at: Time the replica became terminal
        succeeded: Realized Bernoulli outcome, set once the task is realized
    """

    vehicle: VehicleState
    phase: Phase
    remaining: float
    dispatched_at: Seconds
    phase_times: dict[Phase, Seconds] = field(default_factory=_per_phase)
    deducted: dict[Phase, float] = field(default_factory=_per_phase)
    finished_at: Seconds | None = None
    succeeded: bool | None = None

    @property
    def vehicle_id(self) -> VehicleId:
        return self.vehicle.id

    @property
    def terminal(self) -> bool:
        return self.phase in (Phase.DONE, Phase.FAILED)

    @property
    def latency(self) -> Seconds:
        """Sum of the three phase durations."""
        return math.fsum(self.phase_times.values())


@dataclass(slots=True)
class TaskRecord:
    """Lifecycle of one task: its replicas and, once they are all terminal, its outcome.

    Attributes:
        spec: Immutable description of the task
        replicas: One record per hosting vehicle, fixed at dispatch
        predicted_unreliability: U_i predicted by the scheduler at dispatch
        outcome: Settled outcome; None while a replica still works
        realized_unreliability: U_i at the realized latencies, failed replicas
            counting as certain failures
    """

    spec: TaskSpec
    replicas: dict[VehicleId, ReplicaRecord]
    predicted_unreliability: Probability
    outcome: Outcome | None = None
    realized_unreliability: Probability | None = None

    @property
    def terminal(self) -> bool:
        return all(replica.terminal for replica in self.replicas.values())

    @property
    def redundancy(self) -> int:
        return len(self.replicas)
