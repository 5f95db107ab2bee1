"""Time-slotted simulation of the task lifecycle.

Every slot of ``slot_dt`` seconds runs the same sequence:

1. spawn the tasks arriving in the slot and dispatch them through the scheduler;
2. downlink: replicas in ``Down`` share their vehicle's link equally;
3. compute: every hosting vehicle re-splits its capacity among the replicas in
   ``Compute`` (KKT or equal split, per the scheduler);
4. uplink: replicas in ``Up`` share the return link;
5. move vehicles, fail the replicas of those beyond coverage and replace them;
6. realize the outcome of tasks whose replicas are all terminal.

A replica that finishes a phase mid-slot starts the next one with the unused
part of the slot, so work is never lost at slot boundaries.
"""

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np
from result import Err, Ok, Result

from cave_sim.domain.allocator import VehicleTaskLoad, allocator_for
from cave_sim.domain.channel import link_rate
from cave_sim.domain.config import ScenarioConfig, validated
from cave_sim.domain.metrics import MetricsReport, build_report
from cave_sim.domain.model import reliability, task_unreliability
from cave_sim.domain.predictor import RateHistory
from cave_sim.domain.records import (
    Outcome,
    Phase,
    ReplicaRecord,
    TaskFailed,
    TaskRecord,
    TaskSucceeded,
)
from cave_sim.domain.schedulers import assign_baseline, make_scheduler
from cave_sim.domain.types import (
    EGO_POSITION,
    Allocation,
    Assignment,
    Direction,
    ErrorMessage,
    InProgressTask,
    Seconds,
    TaskId,
    TaskSpec,
    VehicleId,
    VehicleState,
)
from cave_sim.domain.workload import spawn_tasks
from cave_sim.ports.scheduler import FleetView, Scheduler

logger = logging.getLogger(__name__)

LOCAL_VEHICLE_ID: VehicleId = 0

type Budgets = dict[tuple[TaskId, VehicleId], Seconds]


@dataclass(slots=True)
class SlotAudit:
    """Running checks over every slot of a run.

    Attributes:
        slots: Slots simulated
        max_load_ratio: Largest sum_i g_ij / G_j seen on any vehicle
        bits_sent: Bits moved over all links, both directions
        compute_done: GFLOP computed on all vehicles
        allocation_faults: Vehicle-slots whose split was not positive on
            exactly the replicas computing there
    """

    slots: int = 0
    max_load_ratio: float = 0.0
    bits_sent: float = 0.0
    compute_done: float = 0.0
    allocation_faults: int = 0


@dataclass(frozen=True, slots=True)
class RandomStreams:
    """Independent generators derived from one root seed."""

    workload: np.random.Generator
    mobility: np.random.Generator
    scheduler: np.random.Generator
    outcome: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "RandomStreams":
        workload, mobility, scheduler, outcome = np.random.SeedSequence(seed).spawn(4)
        return cls(
            workload=np.random.default_rng(workload),
            mobility=np.random.default_rng(mobility),
            scheduler=np.random.default_rng(scheduler),
            outcome=np.random.default_rng(outcome),
        )


@dataclass(slots=True)
class SimulationState:
    """Everything one run carries from slot to slot, mutated in place.

    Attributes:
        config: Validated scenario of the run
        scheduler: Policy placing arriving tasks
        predictor: Link history shared by scheduling and transmission
        streams: Random streams of the run
        vehicles: Vehicles in range by id, the ego's own computer included
        records: Every task spawned so far
        live: Tasks with at least one working replica
        audit: Running totals checked by the tests
        now: Start of the next slot (s)
        slot: Slots simulated
        next_task_id: Id the next spawned task gets
        next_vehicle_id: Id the next arriving vehicle gets
        departures: Vehicles that left coverage

    Examples:
        >>> state = initial_state(ScenarioConfig(duration=0.01, n_vehicles=3))
        >>> sorted(state.vehicles)
        [1, 2, 3]
        >>> advance_slot(state).slot
        1
    """

    config: ScenarioConfig
    scheduler: Scheduler
    predictor: RateHistory
    streams: RandomStreams
    vehicles: dict[VehicleId, VehicleState]
    records: dict[TaskId, TaskRecord] = field(default_factory=dict)
    live: dict[TaskId, TaskRecord] = field(default_factory=dict)
    audit: SlotAudit = field(default_factory=SlotAudit)
    now: Seconds = 0.0
    slot: int = 0
    next_task_id: TaskId = 0
    next_vehicle_id: VehicleId = LOCAL_VEHICLE_ID + 1
    departures: int = 0

    def live_replicas(self) -> Iterator[tuple[TaskRecord, ReplicaRecord]]:
        for record in self.live.values():
            for replica in record.replicas.values():
                if not replica.terminal:
                    yield record, replica


def spawn_vehicle(
    rng: np.random.Generator, vehicle_id: VehicleId, config: ScenarioConfig
) -> VehicleState:
    """New vehicle placed uniformly in the spawn disk.

    Radius R sqrt(u) gives a uniform density over the disk; heading and speed
    are drawn independently of the position.
    """
    radius = config.spawn_radius * math.sqrt(float(rng.random()))
    angle = float(rng.uniform(0.0, 2.0 * math.pi))
    heading = float(rng.uniform(0.0, 2.0 * math.pi))
    speed = float(rng.uniform(*config.speed_range))
    return VehicleState(
        id=vehicle_id,
        position=(radius * math.cos(angle), radius * math.sin(angle)),
        velocity=(speed * math.cos(heading), speed * math.sin(heading)),
        capacity=config.capacity,
        reliability_rate=config.reliability_rate,
    )


def initial_state(config: ScenarioConfig) -> SimulationState:
    """Fresh state with ``n_vehicles`` spawned and, if enabled, the ego's own computer."""
    streams = RandomStreams.from_seed(config.seed)
    vehicles: dict[VehicleId, VehicleState] = {}
    if config.ego_capacity > 0:
        vehicles[LOCAL_VEHICLE_ID] = VehicleState(
            id=LOCAL_VEHICLE_ID,
            position=EGO_POSITION,
            velocity=(0.0, 0.0),
            capacity=config.ego_capacity,
            reliability_rate=config.reliability_rate,
            local=True,
        )
    first = LOCAL_VEHICLE_ID + 1
    for vehicle_id in range(first, first + config.n_vehicles):
        vehicles[vehicle_id] = spawn_vehicle(streams.mobility, vehicle_id, config)
    return SimulationState(
        config=config,
        scheduler=make_scheduler(config.scheduler, config.swarm, streams.scheduler),
        predictor=RateHistory(config.predictor),
        streams=streams,
        vehicles=vehicles,
        next_vehicle_id=first + config.n_vehicles,
    )


def _remaining_work(record: TaskRecord, replica: ReplicaRecord) -> InProgressTask:
    spec = record.spec
    match replica.phase:
        case Phase.DOWN:
            down, compute, up = replica.remaining, spec.compute, spec.up_bits
        case Phase.COMPUTE:
            down, compute, up = 0.0, replica.remaining, spec.up_bits
        case _:
            down, compute, up = 0.0, 0.0, replica.remaining
    return InProgressTask(
        task_id=spec.id,
        vehicle_id=replica.vehicle_id,
        remaining_down=down,
        remaining_compute=compute,
        remaining_up=up,
    )


def _refresh_fleet(state: SimulationState) -> None:
    """Recompute K_j and the active flow counts from the live replicas."""
    hosted: dict[VehicleId, set[TaskId]] = {vid: set() for vid in state.vehicles}
    flows = {(vid, d): 0 for vid in state.vehicles for d in Direction}
    for record, replica in state.live_replicas():
        hosted[replica.vehicle_id].add(record.spec.id)
        match replica.phase:
            case Phase.DOWN:
                flows[(replica.vehicle_id, Direction.DOWN)] += 1
            case Phase.UP:
                flows[(replica.vehicle_id, Direction.UP)] += 1
    for vid, vehicle in state.vehicles.items():
        state.vehicles[vid] = vehicle.with_in_progress(hosted[vid])
    for (vid, direction), count in flows.items():
        state.predictor.set_active_flows(vid, direction, count)


def dispatch(state: SimulationState, incoming: list[TaskSpec]) -> None:
    """Assign a batch of arriving tasks and start one replica per assigned vehicle."""
    if not incoming:
        return
    _refresh_fleet(state)
    view = FleetView(
        vehicles=tuple(state.vehicles[vid] for vid in sorted(state.vehicles)),
        in_progress=tuple(_remaining_work(r, rep) for r, rep in state.live_replicas()),
        predictor=state.predictor,
        now=state.now,
    )
    match state.scheduler.assign(incoming, view):
        case Ok(outcome):
            assignment = outcome.assignment
            predicted = outcome.predicted_unreliability
        case Err(error):
            logger.warning("could not place tasks %s: %s", [t.id for t in incoming], error)
            assignment, predicted = Assignment(), {}

    for task in incoming:
        hosts = assignment.vehicles_for(task.id)
        if not hosts and view.vehicles:
            hosts = assign_baseline(task, view.vehicles).vehicles_for(task.id)
        record = TaskRecord(
            spec=task,
            replicas={
                vid: ReplicaRecord(
                    vehicle=state.vehicles[vid],
                    phase=Phase.DOWN,
                    remaining=task.down_bits,
                    dispatched_at=state.now,
                )
                for vid in hosts
            },
            predicted_unreliability=predicted.get(task.id, 1.0),
        )
        state.records[task.id] = record
        if record.replicas:
            state.live[task.id] = record
        else:
            record.outcome = TaskFailed()
            record.realized_unreliability = 1.0
        logger.debug("task %d dispatched to %s at t=%.3f", task.id, list(hosts), state.now)
    _refresh_fleet(state)


def deduct_work(replica: ReplicaRecord, rate: float, budget: Seconds) -> Seconds:
    """Work off the current phase at ``rate`` for at most ``budget`` seconds.

    Returns:
        The part of the budget left once the phase is complete, else 0
    """
    phase = replica.phase
    work = replica.remaining
    if work <= 0 or math.isinf(rate):
        replica.deducted[phase] += work
        replica.remaining = 0.0
        return budget
    if budget <= 0:
        return 0.0
    if rate <= 0:
        replica.phase_times[phase] += budget
        return 0.0
    if work <= rate * budget:
        spent = min(work / rate, budget)
        replica.phase_times[phase] += spent
        replica.deducted[phase] += work
        replica.remaining = 0.0
        return budget - spent
    done = rate * budget
    replica.phase_times[phase] += budget
    replica.deducted[phase] += done
    replica.remaining = work - done
    return 0.0


def _next_phase(replica: ReplicaRecord, spec: TaskSpec, finished_at: Seconds) -> None:
    match replica.phase:
        case Phase.DOWN:
            replica.phase, replica.remaining = Phase.COMPUTE, spec.compute
        case Phase.COMPUTE:
            replica.phase, replica.remaining = Phase.UP, spec.up_bits
        case Phase.UP:
            replica.phase, replica.finished_at = Phase.DONE, finished_at


def _stage_members(
    state: SimulationState, phase: Phase, budgets: Budgets
) -> dict[VehicleId, list[tuple[TaskRecord, ReplicaRecord]]]:
    members: dict[VehicleId, list[tuple[TaskRecord, ReplicaRecord]]] = {}
    for record, replica in state.live_replicas():
        if replica.phase is phase and budgets[(record.spec.id, replica.vehicle_id)] > 0:
            members.setdefault(replica.vehicle_id, []).append((record, replica))
    return members


def _work_off(
    state: SimulationState,
    record: TaskRecord,
    replica: ReplicaRecord,
    rate: float,
    budgets: Budgets,
    slot_start: Seconds,
) -> None:
    """Progress one replica and hand it to its next phase once done."""
    key = (record.spec.id, replica.vehicle_id)
    left = deduct_work(replica, rate, budgets[key])
    budgets[key] = left
    if replica.remaining <= 0:
        _next_phase(replica, record.spec, slot_start + state.config.slot_dt - left)


def _transmit(
    state: SimulationState, direction: Direction, budgets: Budgets, slot_start: Seconds
) -> None:
    """Move bits over every link that carries at least one flow this slot."""
    cfg = state.config
    phase = Phase.DOWN if direction is Direction.DOWN else Phase.UP
    members = _stage_members(state, phase, budgets)
    for vid in sorted(members):
        flows = members[vid]
        vehicle = state.vehicles[vid]
        if vehicle.local:
            rate = math.inf
        else:
            rate = link_rate(
                EGO_POSITION,
                vehicle.position,
                cfg.bandwidth,
                cfg.tx_power,
                len(flows),
                cfg.excess_loss_db,
            )
            match state.predictor.observe(vid, direction, slot_start, rate, len(flows)):
                case Err(error):
                    logger.warning("rate sample dropped: %s", error)
                case Ok(_):
                    pass
        for record, replica in flows:
            sent = replica.deducted[phase]
            _work_off(state, record, replica, rate, budgets, slot_start)
            state.audit.bits_sent += replica.deducted[phase] - sent


def _compute(state: SimulationState, budgets: Budgets, slot_start: Seconds) -> None:
    """Re-split every hosting vehicle's capacity and compute for one slot."""
    allocate = allocator_for(state.scheduler.allocation_policy)
    members = _stage_members(state, Phase.COMPUTE, budgets)
    for vid in sorted(members):
        hosted = members[vid]
        vehicle = state.vehicles[vid]
        load = VehicleTaskLoad(
            vehicle_id=vid,
            tasks=tuple((record.spec.id, replica.remaining) for record, replica in hosted),
            capacity=vehicle.capacity,
        )
        allocation = Allocation({(task_id, vid): g for task_id, g in allocate(load)})
        computing = Assignment.of((record.spec.id, vid) for record, _ in hosted)
        if not allocation.respects(computing):
            state.audit.allocation_faults += 1
            logger.warning("vehicle %d split %s does not cover %s", vid, allocation, computing)
        ratio = allocation.total_on(vid) / vehicle.capacity
        state.audit.max_load_ratio = max(state.audit.max_load_ratio, ratio)
        for record, replica in hosted:
            done = replica.deducted[Phase.COMPUTE]
            g = allocation.get(record.spec.id, vid)
            _work_off(state, record, replica, g, budgets, slot_start)
            state.audit.compute_done += replica.deducted[Phase.COMPUTE] - done


def _move_vehicles(state: SimulationState, slot_end: Seconds) -> None:
    """Constant-velocity motion; vehicles beyond coverage leave and are replaced."""
    cfg = state.config
    for vid in sorted(state.vehicles):
        vehicle = state.vehicles[vid]
        if vehicle.local:
            continue
        moved = vehicle.moved(cfg.slot_dt)
        if moved.distance <= cfg.coverage_radius:
            state.vehicles[vid] = moved
            continue

        del state.vehicles[vid]
        lost = [replica for _, replica in state.live_replicas() if replica.vehicle_id == vid]
        for replica in lost:
            replica.phase = Phase.FAILED
            replica.finished_at = slot_end
        state.predictor.forget(vid)
        new_id = state.next_vehicle_id
        state.next_vehicle_id += 1
        state.vehicles[new_id] = spawn_vehicle(state.streams.mobility, new_id, cfg)
        state.departures += 1
        logger.debug(
            "vehicle %d left coverage at t=%.3f (%d replicas failed); vehicle %d joined",
            vid,
            slot_end,
            len(lost),
            new_id,
        )


def realize_outcome(record: TaskRecord, rng: np.random.Generator) -> Outcome:
    """Draw the success of every finished replica and settle the task.

    Each ``Done`` replica succeeds independently with probability P_j at its
    realized round-trip latency; draws are taken in vehicle-id order. Failed
    replicas count with P = 0. The task's realized unreliability is recorded
    from the probabilities, whatever the draws turn out to be.

    Raises:
        ValueError: If some replica is still working
    """
    if not record.terminal:
        raise ValueError(f"task {record.spec.id} still has working replicas")
    finished: list[tuple[VehicleState, Seconds]] = []
    winners: list[Seconds] = []
    for vid in sorted(record.replicas):
        replica = record.replicas[vid]
        if replica.phase is not Phase.DONE:
            replica.succeeded = False
            continue
        latency = replica.latency
        finished.append((replica.vehicle, latency))
        replica.succeeded = bool(rng.random() < reliability(replica.vehicle, latency).unwrap())
        if replica.succeeded:
            winners.append(latency)

    record.realized_unreliability = task_unreliability(finished)
    record.outcome = TaskSucceeded(latency=min(winners)) if winners else TaskFailed()
    return record.outcome


def advance_slot(state: SimulationState) -> SimulationState:
    """Simulate one slot in place and return the state."""
    cfg = state.config
    slot_start = state.now
    incoming = spawn_tasks(
        state.streams.workload,
        cfg.arrival_intensity,
        cfg.slot_dt,
        cfg.ranges,
        now=slot_start,
        first_id=state.next_task_id,
    )
    state.next_task_id += len(incoming)
    dispatch(state, incoming)

    budgets: Budgets = {
        (record.spec.id, replica.vehicle_id): cfg.slot_dt
        for record, replica in state.live_replicas()
    }
    _transmit(state, Direction.DOWN, budgets, slot_start)
    _compute(state, budgets, slot_start)
    _transmit(state, Direction.UP, budgets, slot_start)

    slot_end = (state.slot + 1) * cfg.slot_dt
    _move_vehicles(state, slot_end)
    for task_id in [tid for tid, record in state.live.items() if record.terminal]:
        realize_outcome(state.live.pop(task_id), state.streams.outcome)
    _refresh_fleet(state)

    state.audit.slots += 1
    state.slot += 1
    state.now = slot_end
    return state


def simulate(config: ScenarioConfig) -> Result[SimulationState, ErrorMessage]:
    """Run every slot of a validated scenario and return the final state."""
    match validated(config):
        case Err(error):
            return Err(error)
        case Ok(scenario):
            pass
    state = initial_state(scenario)
    logger.info(
        "simulating %s for %.3f s (%d slots, %d vehicles, seed %d)",
        scenario.scheduler,
        scenario.duration,
        scenario.n_slots,
        scenario.n_vehicles,
        scenario.seed,
    )
    for _ in range(scenario.n_slots):
        advance_slot(state)
    logger.info(
        "simulation done: %d tasks, %d in flight, %d departures",
        len(state.records),
        len(state.live),
        state.departures,
    )
    return Ok(state)


def run(config: ScenarioConfig) -> Result[MetricsReport, ErrorMessage]:
    """Simulate a scenario and summarize it."""
    return simulate(config).map(
        lambda state: build_report(state.records.values(), state.audit, state.config)
    )
