"""Ego-side task assignment by particle swarm search under a log barrier.

Incoming tasks are assigned to a reduced set of candidate vehicles. Each
candidate assignment is scored with the aggregated latency of incoming and
in-progress tasks, predicted with the link estimates of ``RateHistory`` and an
equal split of each vehicle's capacity, plus a logarithmic barrier on every
incoming task's reliability slack H_i - U_i. The barrier weight mu decays every
iteration, so the search drifts from the interior of the feasible region
towards the pure latency optimum.

Particles live in the box [0, 1]^(|I| x n); a coordinate above 0.5 decodes to
alpha_{i,j} = 1. Particles whose decoded assignment violates a reliability
constraint are deleted and re-sampled uniformly over the box.

Every round draws from its own generator spawned off the scheduler stream, and
every block it draws has shape (particles, dims) with row k owned by particle k.
The numbers a particle sees depend only on the round and its index, so moving
particles one at a time or all at once gives the same search.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import NDArray
from result import Err, Ok, Result

from cave_sim.domain.model import round_trip_latency
from cave_sim.domain.predictor import RateHistory, presumed_allocation
from cave_sim.domain.types import (
    LOCAL_LINK,
    Assignment,
    Direction,
    ErrorMessage,
    InProgressTask,
    Probability,
    Seconds,
    TaskId,
    TaskSpec,
    VehicleId,
    VehicleState,
)

logger = logging.getLogger(__name__)

DECODE_THRESHOLD = 0.5

type FloatArray = NDArray[np.float64]
type BoolArray = NDArray[np.bool_]


class BarrierSign(StrEnum):
    """How the reliability slack enters the objective.

    ``interior`` adds -mu * sum ln(H - U), the usual log barrier that grows near
    the boundary. ``literal`` adds +mu * sum ln(H - U), which rewards approaching
    the boundary; it is kept only for comparison runs.
    """

    INTERIOR = "interior"
    LITERAL = "literal"

    @property
    def factor(self) -> float:
        match self:
            case BarrierSign.INTERIOR:
                return 1.0
            case BarrierSign.LITERAL:
                return -1.0


@dataclass(frozen=True, slots=True)
class SwarmConfig:
    """Swarm and barrier hyperparameters.

    Attributes:
        particles: Swarm size N
        iterations: Search iterations M
        inertia: Velocity inertia w
        cognitive: Pull towards the personal best c1
        social: Pull towards the global best c2
        candidates: Vehicles kept after candidate reduction n
        mu0: Initial barrier weight
        mu_decay: Per-iteration barrier decay factor
        v_max: Velocity clamp per coordinate
        seed: Seed used when no generator is supplied
        barrier_sign: Sign convention of the barrier term
    """

    particles: int = 30
    iterations: int = 100
    inertia: float = 0.7
    cognitive: float = 1.5
    social: float = 1.5
    candidates: int = 10
    mu0: float = 1.0
    mu_decay: float = 0.9
    v_max: float = 0.5
    seed: int = 0
    barrier_sign: BarrierSign = BarrierSign.INTERIOR

    def validate(self) -> list[ErrorMessage]:
        errors: list[ErrorMessage] = []
        if self.particles < 2:
            errors.append(f"swarm.particles must be >= 2, got {self.particles}")
        if self.iterations < 1:
            errors.append(f"swarm.iterations must be >= 1, got {self.iterations}")
        if self.candidates < 1:
            errors.append(f"swarm.candidates must be >= 1, got {self.candidates}")
        if not self.mu0 > 0:
            errors.append(f"swarm.mu0 must be > 0, got {self.mu0}")
        if not 0 < self.mu_decay < 1:
            errors.append(f"swarm.mu_decay must be in (0, 1), got {self.mu_decay}")
        if not self.v_max > 0:
            errors.append(f"swarm.v_max must be > 0, got {self.v_max}")
        if min(self.inertia, self.cognitive, self.social) < 0:
            errors.append("swarm weights must be >= 0")
        return errors


@dataclass(frozen=True, eq=False)
class AssignmentProblem:
    """Predicted parameters of one assignment decision, as arrays.

    Task arrays have shape (|I|,), vehicle arrays shape (n,). In-progress work is
    folded into per-vehicle sums; work on vehicles outside the candidate set
    only shifts the objective by ``offset``.
    """

    tasks: tuple[TaskSpec, ...]
    vehicles: tuple[VehicleState, ...]
    compute: FloatArray
    down_bits: FloatArray
    up_bits: FloatArray
    thresholds: FloatArray
    capacity: FloatArray
    base_load: FloatArray
    decay: FloatArray
    aggregate_down: FloatArray
    aggregate_up: FloatArray
    active_down: FloatArray
    active_up: FloatArray
    k_compute: FloatArray
    k_down: FloatArray
    k_up: FloatArray
    offset: float = 0.0

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.tasks), len(self.vehicles)

    @property
    def dims(self) -> int:
        rows, cols = self.shape
        return rows * cols

    def encode(self, assignment: Assignment) -> BoolArray:
        """Binary (|I|, n) matrix of the pairs this problem knows about."""
        task_index = {task.id: i for i, task in enumerate(self.tasks)}
        vehicle_index = {vehicle.id: j for j, vehicle in enumerate(self.vehicles)}
        alpha = np.zeros(self.shape, dtype=np.bool_)
        for task_id, vehicle_id in assignment.entries:
            if task_id in task_index and vehicle_id in vehicle_index:
                alpha[task_index[task_id], vehicle_index[vehicle_id]] = True
        return alpha

    def decode(self, alpha: BoolArray) -> Assignment:
        rows, cols = np.nonzero(alpha.reshape(self.shape))
        return Assignment.of(
            (self.tasks[i].id, self.vehicles[j].id) for i, j in zip(rows.tolist(), cols.tolist())
        )


@dataclass(frozen=True, eq=False)
class Evaluation:
    """Scores of a batch of decoded assignments.

    Attributes:
        p1: Predicted aggregated latency of incoming and in-progress tasks (P,)
        penalty: sum_i -ln(H_i - U_i), +inf when some slack is not positive (P,)
        unreliability: Predicted U_i per incoming task (P, |I|)
        feasible: U_i <= H_i for every incoming task (P,)
    """

    p1: FloatArray
    penalty: FloatArray
    unreliability: FloatArray
    feasible: BoolArray


def _presumed_rates(
    aggregate: FloatArray, active: FloatArray, count: FloatArray
) -> FloatArray:
    return aggregate / np.maximum(active + count, 1.0)


def evaluate(problem: AssignmentProblem, alpha: BoolArray) -> Evaluation:
    """Score a batch of binary assignments of shape (P, |I|, n).

    Vehicle j hosting c_j incoming replicas is presumed to give every task an
    equal share G_j / (|K_j| + c_j), and its links are presumed shared by the
    flows already active plus the c_j new ones.
    """
    a = alpha.astype(np.float64)
    count = a.sum(axis=1)
    share = problem.base_load + count
    g = problem.capacity / np.maximum(share, 1.0)
    rd = _presumed_rates(problem.aggregate_down, problem.active_down, count)
    ru = _presumed_rates(problem.aggregate_up, problem.active_up, count)
    latency = (
        problem.down_bits[None, :, None] / rd[:, None, :]
        + problem.compute[None, :, None] / g[:, None, :]
        + problem.up_bits[None, :, None] / ru[:, None, :]
    )
    success = np.exp(-problem.decay * latency)
    unreliability = np.prod(1.0 - a * success, axis=2)
    in_progress = (
        problem.k_compute * share / problem.capacity + problem.k_down / rd + problem.k_up / ru
    )
    p1 = (a * latency).sum(axis=(1, 2)) + in_progress.sum(axis=1) + problem.offset

    slack = problem.thresholds - unreliability
    positive = slack > 0
    logs = np.where(positive, np.log(np.where(positive, slack, 1.0)), -np.inf)
    penalty = -logs.sum(axis=1)
    feasible = np.all(unreliability <= problem.thresholds, axis=1)
    return Evaluation(p1=p1, penalty=penalty, unreliability=unreliability, feasible=feasible)


def _score(p1: FloatArray, penalty: FloatArray, mu: float, sign: BarrierSign) -> FloatArray:
    finite = np.isfinite(penalty) & np.isfinite(p1)
    value = p1 + sign.factor * mu * np.where(finite, penalty, 0.0)
    return np.where(finite, value, np.inf)


def _link_estimate(
    vehicle: VehicleState, predictor: RateHistory
) -> tuple[float, float, float, float]:
    if vehicle.local:
        return math.inf, math.inf, 0.0, 0.0
    active_down = predictor.active_flows(vehicle.id, Direction.DOWN)
    active_up = predictor.active_flows(vehicle.id, Direction.UP)
    return (
        predictor.aggregate_estimate(vehicle.id, Direction.DOWN),
        predictor.aggregate_estimate(vehicle.id, Direction.UP),
        float(active_down),
        float(active_up),
    )


def build_problem(
    incoming: Sequence[TaskSpec],
    in_progress: Sequence[InProgressTask],
    candidates: Sequence[VehicleState],
    predictor: RateHistory,
    *,
    include_in_progress: bool = True,
    fleet: Sequence[VehicleState] = (),
) -> AssignmentProblem:
    """Freeze the predicted parameters of one assignment decision.

    Args:
        incoming: Tasks to assign (I)
        in_progress: Dispatched replicas whose assignment is fixed (K)
        candidates: Vehicles the incoming tasks may go to
        predictor: Link-rate estimates
        include_in_progress: False leaves the latency of K out of the objective;
            K still shares the capacity and links the new tasks are predicted on
        fleet: Every visible vehicle; K on non-candidates adds a constant
    """
    index = {vehicle.id: j for j, vehicle in enumerate(candidates)}
    n = len(candidates)
    k_compute = np.zeros(n)
    k_down = np.zeros(n)
    k_up = np.zeros(n)
    offset = 0.0
    if include_in_progress:
        others = {vehicle.id: vehicle for vehicle in fleet if vehicle.id not in index}
        for item in in_progress:
            if item.vehicle_id in index:
                j = index[item.vehicle_id]
                k_compute[j] += item.remaining_compute
                k_down[j] += item.remaining_down
                k_up[j] += item.remaining_up
            elif item.vehicle_id in others:
                vehicle = others[item.vehicle_id]
                down, up, active_down, active_up = _link_estimate(vehicle, predictor)
                share = max(1, len(vehicle.in_progress))
                offset += (
                    item.remaining_down / (down / max(1.0, active_down))
                    + item.remaining_compute * share / vehicle.capacity
                    + item.remaining_up / (up / max(1.0, active_up))
                )

    links = [_link_estimate(v, predictor) for v in candidates]
    return AssignmentProblem(
        tasks=tuple(incoming),
        vehicles=tuple(candidates),
        compute=np.array([t.compute for t in incoming], dtype=np.float64),
        down_bits=np.array([t.down_bits for t in incoming], dtype=np.float64),
        up_bits=np.array([t.up_bits for t in incoming], dtype=np.float64),
        thresholds=np.array([t.fail_threshold for t in incoming], dtype=np.float64),
        capacity=np.array([v.capacity for v in candidates], dtype=np.float64),
        base_load=np.array([len(v.in_progress) for v in candidates], dtype=np.float64),
        decay=np.array([0.0 if v.local else v.reliability_rate for v in candidates]),
        aggregate_down=np.array([link[0] for link in links], dtype=np.float64),
        aggregate_up=np.array([link[1] for link in links], dtype=np.float64),
        active_down=np.array([link[2] for link in links], dtype=np.float64),
        active_up=np.array([link[3] for link in links], dtype=np.float64),
        k_compute=k_compute,
        k_down=k_down,
        k_up=k_up,
        offset=offset,
    )


def reduce_candidates(
    vehicles: Sequence[VehicleState],
    incoming: Sequence[TaskSpec],
    n: int,
    predictor: RateHistory,
) -> Result[list[VehicleState], ErrorMessage]:
    """Keep the ``n`` vehicles with the lowest estimated single-replica latency.

    Each vehicle is scored by the summed latency the incoming tasks would see
    there alone, under predicted rates with one extra flow and the presumed
    equal allocation; ties go to the lower vehicle id.
    """
    if not vehicles:
        return Err("no vehicles available to host tasks")
    if n < 1:
        return Err(f"candidate count must be >= 1, got {n}")

    def estimated_latency(vehicle: VehicleState) -> Seconds:
        if vehicle.local:
            rates = LOCAL_LINK
        else:
            rates = predictor.predict_rates(vehicle.id, planned_extra_flows=1)
        g = presumed_allocation(vehicle, 1)
        return math.fsum(round_trip_latency(task, rates, g).unwrap() for task in incoming)

    ranked = sorted(vehicles, key=lambda vehicle: (estimated_latency(vehicle), vehicle.id))
    return Ok(ranked[: min(n, len(ranked))])


def barrier_objective(
    assignment: Assignment,
    problem: AssignmentProblem,
    mu: float,
    sign: BarrierSign = BarrierSign.INTERIOR,
) -> float:
    """Barrier-augmented objective of one assignment; +inf outside the interior.

    Examples:
        With mu = 0 a feasible assignment scores its plain aggregated latency.
    """
    ev = evaluate(problem, problem.encode(assignment)[None])
    return float(_score(ev.p1, ev.penalty, mu, sign)[0])


def objective_p1(assignment: Assignment, problem: AssignmentProblem) -> Seconds:
    """Predicted aggregated latency of incoming and in-progress tasks."""
    return float(evaluate(problem, problem.encode(assignment)[None]).p1[0])


def predicted_unreliability(
    assignment: Assignment, problem: AssignmentProblem
) -> dict[TaskId, Probability]:
    ev = evaluate(problem, problem.encode(assignment)[None])
    return {task.id: float(u) for task, u in zip(problem.tasks, ev.unreliability[0])}


def feasibility_check(assignment: Assignment, problem: AssignmentProblem) -> dict[TaskId, bool]:
    """Per incoming task: U_i <= H_i under the predicted parameters."""
    ev = evaluate(problem, problem.encode(assignment)[None])
    return {
        task.id: bool(u <= task.fail_threshold)
        for task, u in zip(problem.tasks, ev.unreliability[0])
    }


@dataclass(frozen=True, eq=False)
class Swarm:
    """Swarm state after one evaluation round.

    ``decoded``, ``feasible``, ``last_p1`` and ``last_penalty`` describe the
    positions evaluated in that round, before infeasible particles were
    re-sampled; ``resampled`` marks the particles that were.
    """

    positions: FloatArray
    velocities: FloatArray
    best_positions: FloatArray
    best_p1: FloatArray
    best_penalty: FloatArray
    global_position: FloatArray
    global_p1: float
    global_penalty: float
    fallback_position: FloatArray
    fallback_umax: float
    fallback_p1: float
    decoded: BoolArray
    feasible: BoolArray
    last_p1: FloatArray
    last_penalty: FloatArray
    resampled: BoolArray

    @property
    def has_feasible(self) -> bool:
        return math.isfinite(self.global_p1)

    def global_value(self, mu: float, sign: BarrierSign = BarrierSign.INTERIOR) -> float:
        return float(
            _score(np.array([self.global_p1]), np.array([self.global_penalty]), mu, sign)[0]
        )


def _absorb(
    prev: Swarm,
    problem: AssignmentProblem,
    positions: FloatArray,
    velocities: FloatArray,
    mu: float,
    rng: np.random.Generator,
    config: SwarmConfig,
) -> Swarm:
    """Evaluate new positions, update bests, then delete and re-sample infeasible particles."""
    n_particles, dims = positions.shape
    decoded = positions > DECODE_THRESHOLD
    ev = evaluate(problem, decoded.reshape(n_particles, *problem.shape))
    sign = config.barrier_sign

    value = _score(ev.p1, ev.penalty, mu, sign)
    usable = ev.feasible & np.isfinite(value)
    best_value = _score(prev.best_p1, prev.best_penalty, mu, sign)
    improved = usable & (value < best_value)
    best_positions = np.where(improved[:, None], decoded.astype(np.float64), prev.best_positions)
    best_p1 = np.where(improved, ev.p1, prev.best_p1)
    best_penalty = np.where(improved, ev.penalty, prev.best_penalty)
    best_value = np.where(improved, value, best_value)

    global_position = prev.global_position
    global_p1, global_penalty = prev.global_p1, prev.global_penalty
    leader = int(np.argmin(best_value))
    if best_value[leader] < prev.global_value(mu, sign):
        global_position = best_positions[leader].copy()
        global_p1, global_penalty = float(best_p1[leader]), float(best_penalty[leader])

    fallback_position = prev.fallback_position
    fallback_umax, fallback_p1 = prev.fallback_umax, prev.fallback_p1
    umax = ev.unreliability.max(axis=1)
    closest = int(np.lexsort((ev.p1, umax))[0])
    if (umax[closest], ev.p1[closest]) < (fallback_umax, fallback_p1):
        fallback_position = decoded[closest].astype(np.float64)
        fallback_umax, fallback_p1 = float(umax[closest]), float(ev.p1[closest])
    if not math.isfinite(global_p1):
        global_position = fallback_position

    resampled = ~ev.feasible
    if resampled.any():
        # full blocks: row k is particle k whoever else is re-sampled
        fresh_positions = rng.random((n_particles, dims))
        fresh_velocities = rng.uniform(-config.v_max, config.v_max, (n_particles, dims))
        positions = np.where(resampled[:, None], fresh_positions, positions)
        velocities = np.where(resampled[:, None], fresh_velocities, velocities)
        fresh = resampled & ~np.isfinite(best_p1)
        best_positions[fresh] = (positions[fresh] > DECODE_THRESHOLD).astype(np.float64)

    return Swarm(
        positions=positions,
        velocities=velocities,
        best_positions=best_positions,
        best_p1=best_p1,
        best_penalty=best_penalty,
        global_position=global_position,
        global_p1=global_p1,
        global_penalty=global_penalty,
        fallback_position=fallback_position,
        fallback_umax=fallback_umax,
        fallback_p1=fallback_p1,
        decoded=decoded,
        feasible=ev.feasible,
        last_p1=ev.p1,
        last_penalty=ev.penalty,
        resampled=resampled,
    )


def initialize_swarm(
    problem: AssignmentProblem, rng: np.random.Generator, config: SwarmConfig, mu: float
) -> Swarm:
    """Sample N particles uniformly over the box and evaluate them."""
    shape = (config.particles, problem.dims)
    positions = rng.random(shape)
    velocities = rng.uniform(-config.v_max, config.v_max, shape)
    blank = np.full(config.particles, np.inf)
    start = Swarm(
        positions=positions,
        velocities=velocities,
        best_positions=(positions > DECODE_THRESHOLD).astype(np.float64),
        best_p1=blank,
        best_penalty=blank.copy(),
        global_position=(positions[0] > DECODE_THRESHOLD).astype(np.float64),
        global_p1=math.inf,
        global_penalty=math.inf,
        fallback_position=(positions[0] > DECODE_THRESHOLD).astype(np.float64),
        fallback_umax=math.inf,
        fallback_p1=math.inf,
        decoded=np.zeros(shape, dtype=np.bool_),
        feasible=np.zeros(config.particles, dtype=np.bool_),
        last_p1=blank.copy(),
        last_penalty=blank.copy(),
        resampled=np.zeros(config.particles, dtype=np.bool_),
    )
    return _absorb(start, problem, positions, velocities, mu, rng, config)


def step_swarm(
    swarm: Swarm,
    problem: AssignmentProblem,
    mu: float,
    rng: np.random.Generator,
    config: SwarmConfig,
) -> Swarm:
    """One move-evaluate-resample round.

    v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x), clipped to +/- v_max;
    x <- clip(x + v, 0, 1). Before any feasible assignment is known, gbest is
    the assignment with the smallest worst-task unreliability seen so far.
    """
    r1 = rng.random(swarm.positions.shape)
    r2 = rng.random(swarm.positions.shape)
    velocities = (
        config.inertia * swarm.velocities
        + config.cognitive * r1 * (swarm.best_positions - swarm.positions)
        + config.social * r2 * (swarm.global_position - swarm.positions)
    )
    velocities = np.clip(velocities, -config.v_max, config.v_max)
    positions = np.clip(swarm.positions + velocities, 0.0, 1.0)
    return _absorb(swarm, problem, positions, velocities, mu, rng, config)


@dataclass(frozen=True, slots=True)
class AssignmentOutcome:
    """Decision for a batch of incoming tasks.

    Attributes:
        assignment: Chosen (task, vehicle) pairs
        feasible: False when no assignment met every reliability threshold and
            the least unreliable one seen is returned instead
        objective: Predicted aggregated latency of the chosen assignment
        predicted_unreliability: Predicted U_i per incoming task
        history: Global-best barrier objective after each round
        candidates: Vehicles the search ran over, best ranked first
    """

    assignment: Assignment
    feasible: bool
    objective: Seconds
    predicted_unreliability: dict[TaskId, Probability]
    history: tuple[float, ...] = ()
    candidates: tuple[VehicleId, ...] = ()


def _archive(archive: dict[bytes, tuple[float, float]], swarm: Swarm) -> None:
    for k in np.flatnonzero(swarm.feasible & np.isfinite(swarm.last_penalty)).tolist():
        archive.setdefault(
            swarm.decoded[k].tobytes(), (float(swarm.last_p1[k]), float(swarm.last_penalty[k]))
        )


def pso_assign(
    incoming: Sequence[TaskSpec],
    in_progress: Sequence[InProgressTask],
    vehicles: Sequence[VehicleState],
    predictor: RateHistory,
    config: SwarmConfig,
    *,
    rng: np.random.Generator | None = None,
    include_in_progress: bool = True,
) -> Result[AssignmentOutcome, ErrorMessage]:
    """Assign incoming tasks by barrier-penalized particle swarm search.

    Every distinct feasible assignment met during the search is remembered;
    the answer is the one with the lowest barrier objective at the final mu.
    In-progress assignments are never touched.

    Args:
        incoming: Tasks to assign, nonempty
        in_progress: Frozen replicas already running
        vehicles: Visible vehicles
        predictor: Link-rate estimates
        config: Swarm hyperparameters
        rng: Random stream; defaults to one seeded with ``config.seed``
        include_in_progress: False keeps the latency of in-progress work out of
            the objective

    Returns:
        Ok(outcome), or Err when there is nothing to assign or nowhere to assign it
    """
    if not incoming:
        return Err("no incoming tasks to assign")
    generator = rng if rng is not None else np.random.default_rng(config.seed)

    match reduce_candidates(vehicles, incoming, config.candidates, predictor):
        case Err(error):
            return Err(error)
        case Ok(candidates):
            pass

    problem = build_problem(
        incoming,
        in_progress,
        candidates,
        predictor,
        include_in_progress=include_in_progress,
        fleet=vehicles,
    )
    sign = config.barrier_sign
    mu = config.mu0
    archive: dict[bytes, tuple[float, float]] = {}
    rounds = generator.spawn(config.iterations + 1)
    swarm = initialize_swarm(problem, rounds[0], config, mu)
    _archive(archive, swarm)
    history = [swarm.global_value(mu, sign)]
    last_mu = mu
    for round_rng in rounds[1:]:
        swarm = step_swarm(swarm, problem, mu, round_rng, config)
        _archive(archive, swarm)
        history.append(swarm.global_value(mu, sign))
        last_mu = mu
        mu *= config.mu_decay

    if archive:
        key = min(
            archive,
            key=lambda k: (archive[k][0] + sign.factor * last_mu * archive[k][1], archive[k][0], k),
        )
        alpha = np.frombuffer(key, dtype=np.bool_).reshape(problem.shape).copy()
        feasible = True
    else:
        alpha = (swarm.fallback_position > DECODE_THRESHOLD).reshape(problem.shape)
        empty_rows = ~alpha.any(axis=1)
        alpha[empty_rows, 0] = True
        feasible = False
        logger.warning(
            "no feasible assignment for tasks %s; dispatching best effort",
            [task.id for task in incoming],
        )

    ev = evaluate(problem, alpha[None])
    outcome = AssignmentOutcome(
        assignment=problem.decode(alpha),
        feasible=feasible,
        objective=float(ev.p1[0]),
        predicted_unreliability={
            task.id: float(u) for task, u in zip(problem.tasks, ev.unreliability[0])
        },
        history=tuple(history),
        candidates=tuple(vehicle.id for vehicle in candidates),
    )
    logger.debug(
        "assigned tasks %s -> %s (feasible=%s, objective=%.6f)",
        [task.id for task in incoming],
        sorted(outcome.assignment.entries),
        feasible,
        outcome.objective,
    )
    return Ok(outcome)
