"""Domain types for cave-sim.

This module defines the core domain types shared by the schedulers and the
simulator. Units are fixed project-wide: seconds, bits, bits/s, GFLOP and GFLOPS.
All types are immutable and represent pure domain concepts.
"""

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum

from result import Result

# Type aliases using Python 3.12 syntax
type Seconds = float
type Bits = float
type BitsPerSecond = float
type Gflop = float
type Gflops = float
type Probability = float
type Meters = float
type Vec2 = tuple[float, float]
type TaskId = int
type VehicleId = int
type ErrorMessage = str
type Pair = tuple[TaskId, VehicleId]

EGO_POSITION: Vec2 = (0.0, 0.0)


class Direction(StrEnum):
    """Transmission direction as seen from the ego vehicle."""

    DOWN = "down"  # ego -> passing-by vehicle
    UP = "up"  # passing-by vehicle -> ego


@dataclass(frozen=True, slots=True)
class TaskSpec:
    """One passenger task originated at the ego vehicle.

    Attributes:
        id: Unique task id
        arrival_time: Arrival at the ego vehicle (s)
        compute: Computation demand C_i (GFLOP)
        down_bits: Ego-to-vehicle payload D_i (bits)
        up_bits: Vehicle-to-ego payload E_i (bits)
        fail_threshold: Maximum tolerated failure probability H_i^min

    Examples:
        >>> task = TaskSpec(1, 0.0, compute=1000.0, down_bits=1e5, up_bits=5e4,
        ...                 fail_threshold=0.2)
        >>> task.compute
        1000.0
    """

    id: TaskId
    arrival_time: Seconds
    compute: Gflop
    down_bits: Bits
    up_bits: Bits
    fail_threshold: Probability

    def __post_init__(self) -> None:
        if not self.compute > 0:
            raise ValueError(f"task {self.id}: compute must be > 0, got {self.compute}")
        if self.down_bits < 0 or self.up_bits < 0:
            raise ValueError(f"task {self.id}: payload sizes must be >= 0")
        if not 0 < self.fail_threshold <= 1:
            raise ValueError(
                f"task {self.id}: fail_threshold must be in (0, 1], got {self.fail_threshold}"
            )


@dataclass(frozen=True, slots=True)
class VehicleState:
    """One passing-by vehicle as seen by the ego vehicle.

    Positions and velocities are relative to the ego vehicle, which sits at the
    origin. A ``local`` vehicle stands for the ego's own computer: its links are
    never used and its replicas always succeed.

    Attributes:
        id: Unique vehicle id
        position: Relative position (m)
        velocity: Relative velocity (m/s)
        capacity: Compute capacity G_j^max (GFLOPS)
        reliability_rate: Decay constant of P_j(x) = exp(-rate * x) (1/s)
        in_progress: Ids of tasks with an unfinished replica here (K_j)
        local: True for the ego's own computer
    """

    id: VehicleId
    position: Vec2
    velocity: Vec2
    capacity: Gflops
    reliability_rate: float = 1.0
    in_progress: frozenset[TaskId] = frozenset()
    local: bool = False

    def __post_init__(self) -> None:
        if not self.capacity > 0:
            raise ValueError(f"vehicle {self.id}: capacity must be > 0, got {self.capacity}")
        if not self.reliability_rate > 0:
            raise ValueError(
                f"vehicle {self.id}: reliability_rate must be > 0, got {self.reliability_rate}"
            )

    @property
    def distance(self) -> Meters:
        """Distance to the ego vehicle."""
        return math.hypot(self.position[0] - EGO_POSITION[0], self.position[1] - EGO_POSITION[1])

    def moved(self, dt: Seconds) -> "VehicleState":
        """Constant-velocity motion over ``dt`` seconds."""
        x, y = self.position
        vx, vy = self.velocity
        return VehicleState(
            id=self.id,
            position=(x + vx * dt, y + vy * dt),
            velocity=self.velocity,
            capacity=self.capacity,
            reliability_rate=self.reliability_rate,
            in_progress=self.in_progress,
            local=self.local,
        )

    def with_in_progress(self, task_ids: Iterable[TaskId]) -> "VehicleState":
        return VehicleState(
            id=self.id,
            position=self.position,
            velocity=self.velocity,
            capacity=self.capacity,
            reliability_rate=self.reliability_rate,
            in_progress=frozenset(task_ids),
            local=self.local,
        )


@dataclass(frozen=True, slots=True)
class LinkRates:
    """Downlink and uplink rates experienced by one task at one vehicle.

    Rates are checked where they are consumed (see ``round_trip_latency``);
    ``math.inf`` marks the ego's own computer, whose transmission stages vanish.
    """

    down_rate: BitsPerSecond
    up_rate: BitsPerSecond


LOCAL_LINK = LinkRates(down_rate=math.inf, up_rate=math.inf)


@dataclass(frozen=True, slots=True)
class Assignment:
    """Sparse binary task assignment: alpha_{i,j} = 1 iff (i, j) is present.

    Examples:
        >>> a = Assignment.of([(1, 10), (1, 11), (2, 10)])
        >>> a.vehicles_for(1)
        (10, 11)
        >>> a.redundancy(2)
        1
    """

    entries: frozenset[Pair] = frozenset()

    @classmethod
    def of(cls, pairs: Iterable[Pair]) -> "Assignment":
        return cls(entries=frozenset(pairs))

    def __contains__(self, pair: object) -> bool:
        return pair in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def vehicles_for(self, task_id: TaskId) -> tuple[VehicleId, ...]:
        return tuple(sorted(v for t, v in self.entries if t == task_id))

    def tasks_on(self, vehicle_id: VehicleId) -> tuple[TaskId, ...]:
        return tuple(sorted(t for t, v in self.entries if v == vehicle_id))

    def redundancy(self, task_id: TaskId) -> int:
        return sum(1 for t, _ in self.entries if t == task_id)

    def task_ids(self) -> tuple[TaskId, ...]:
        return tuple(sorted({t for t, _ in self.entries}))

    def merged(self, other: "Assignment") -> "Assignment":
        return Assignment(entries=self.entries | other.entries)


@dataclass(frozen=True, slots=True)
class Allocation:
    """Compute split g_{i,j} (GFLOPS) per (task, vehicle) pair.

    Pairs absent from ``entries`` hold zero resources.
    """

    entries: Mapping[Pair, Gflops] = field(default_factory=dict)

    def get(self, task_id: TaskId, vehicle_id: VehicleId) -> Gflops:
        return self.entries.get((task_id, vehicle_id), 0.0)

    def total_on(self, vehicle_id: VehicleId) -> Gflops:
        return math.fsum(g for (_, v), g in self.entries.items() if v == vehicle_id)

    def respects(self, assignment: Assignment) -> bool:
        """True iff g > 0 exactly on the assigned pairs."""
        positive = {pair for pair, g in self.entries.items() if g > 0}
        return positive == set(assignment.entries)


@dataclass(frozen=True, slots=True)
class InProgressTask:
    """Remaining work of a dispatched replica whose assignment is frozen.

    Attributes:
        task_id: Task the replica belongs to
        vehicle_id: Vehicle executing the replica
        remaining_down: Bits still to send ego -> vehicle
        remaining_compute: GFLOP still to compute
        remaining_up: Bits still to send vehicle -> ego
    """

    task_id: TaskId
    vehicle_id: VehicleId
    remaining_down: Bits
    remaining_compute: Gflop
    remaining_up: Bits


class FailureKind(StrEnum):
    INVALID = "invalid"
    IO = "io"
    TOLERANCE = "tolerance"


@dataclass(frozen=True, slots=True)
class Failure:
    """Error value crossing the adapter/CLI boundary.

    Domain functions report plain ``ErrorMessage`` strings; adapters classify
    them so the CLI can choose an exit code.
    """

    kind: FailureKind
    message: ErrorMessage


# Result types for Railway-Oriented Programming
type LatencyResult = Result[Seconds, ErrorMessage]
type ProbabilityResult = Result[Probability, ErrorMessage]
type BoundaryResult[T] = Result[T, Failure]
