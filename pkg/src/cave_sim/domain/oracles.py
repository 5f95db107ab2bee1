"""Numerical cross-checks of the allocator and the swarm assignment.

``allocation`` compares the closed-form split with a general-purpose
constrained minimizer on random vehicle loads. ``assignment`` compares the
swarm search with exhaustive enumeration on instances small enough to list
every assignment (2 tasks x 3 vehicles, 64 assignments).
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from scipy.optimize import minimize

from cave_sim.domain.allocator import (
    VehicleTaskLoad,
    allocation_cost,
    kkt_residual,
    optimal_allocation,
)
from cave_sim.domain.assigner import (
    SwarmConfig,
    build_problem,
    evaluate,
    feasibility_check,
    pso_assign,
)
from cave_sim.domain.predictor import PredictorConfig, RateHistory
from cave_sim.domain.types import Direction, TaskSpec, VehicleState

logger = logging.getLogger(__name__)

ALLOCATION_TOLERANCE = 1e-6
ASSIGNMENT_GAP = 0.05
ASSIGNMENT_PASS_FRACTION = 0.9


class OracleSuite(StrEnum):
    ALLOCATION = "allocation"
    ASSIGNMENT = "assignment"


@dataclass(frozen=True, slots=True)
class OracleReport:
    """Outcome of one oracle suite.

    Attributes:
        suite: Suite that ran
        cases: Instances checked
        passed: Instances within tolerance
        max_gap: Largest relative objective gap over the instances
        max_residual: Largest KKT residual (allocation suite only)
        ok: Whether the suite meets its acceptance tolerance
    """

    suite: OracleSuite
    cases: int
    passed: int
    max_gap: float
    max_residual: float
    ok: bool


def random_load(rng: np.random.Generator, max_tasks: int = 20) -> VehicleTaskLoad:
    """Up to ``max_tasks`` tasks of 1 to 1e4 GFLOP on a vehicle of 1e2 to 1e5 GFLOPS."""
    count = int(rng.integers(1, max_tasks + 1))
    compute = rng.uniform(1.0, 1e4, count)
    return VehicleTaskLoad(
        vehicle_id=0,
        tasks=tuple((i, float(c)) for i, c in enumerate(compute)),
        capacity=float(rng.uniform(1e2, 1e5)),
    )


def numerical_allocation_cost(load: VehicleTaskLoad) -> float:
    """Minimize sum C_i / g_i s.t. sum g_i <= G, g > 0 with SLSQP.

    The search runs over shares x_i = g_i / G so every instance is equally well
    scaled; it starts from the equal split.
    """
    compute = np.array([c for _, c in load.tasks])
    n = len(compute)
    scale = load.capacity

    def cost(x: np.ndarray) -> float:
        return float(np.sum(compute / (scale * x)))

    def grad(x: np.ndarray) -> np.ndarray:
        return -compute / (scale * x**2)

    budget = {"type": "ineq", "fun": lambda x: 1.0 - np.sum(x), "jac": lambda x: -np.ones(n)}
    result = minimize(
        cost,
        np.full(n, 1.0 / n),
        jac=grad,
        method="SLSQP",
        bounds=[(1e-9, 1.0)] * n,
        constraints=[budget],
        options={"ftol": 1e-15, "maxiter": 1000},
    )
    return cost(np.minimum(result.x, 1.0) / max(1.0, float(np.sum(result.x))))


def allocation_oracle(cases: int = 200, seed: int = 0) -> OracleReport:
    """Closed form vs numerical minimizer; passes when no gap or residual exceeds 1e-6.

    The gap is signed, (closed - numerical) / numerical, so a minimizer that
    stops short of the optimum cannot fail the closed form.
    """
    rng = np.random.default_rng(seed)
    max_gap = -math.inf
    max_residual = 0.0
    passed = 0
    for _ in range(cases):
        load = random_load(rng)
        allocation = optimal_allocation(load)
        closed = allocation_cost(load, allocation)
        numerical = numerical_allocation_cost(load)
        gap = (closed - numerical) / numerical
        stationarity, slackness = kkt_residual(load, allocation).unwrap()
        residual = max(stationarity, slackness / load.capacity)
        max_gap = max(max_gap, gap)
        max_residual = max(max_residual, residual)
        if gap < ALLOCATION_TOLERANCE and residual < ALLOCATION_TOLERANCE:
            passed += 1
    report = OracleReport(
        suite=OracleSuite.ALLOCATION,
        cases=cases,
        passed=passed,
        max_gap=max_gap,
        max_residual=max_residual,
        ok=passed == cases,
    )
    logger.info("allocation oracle: %d/%d within %.0e", passed, cases, ALLOCATION_TOLERANCE)
    return report


def small_instance(seed: int) -> tuple[list[TaskSpec], list[VehicleState], RateHistory]:
    """Two tasks, three vehicles with their own capacities, rates and link histories."""
    rng = np.random.default_rng(seed)
    tasks = [
        TaskSpec(
            id=i,
            arrival_time=0.0,
            compute=float(rng.uniform(1000.0, 2000.0)),
            down_bits=float(rng.uniform(1e4, 1e5)),
            up_bits=float(rng.uniform(1e4, 1e5)),
            fail_threshold=0.2,
        )
        for i in range(2)
    ]
    vehicles = [
        VehicleState(
            id=j + 1,
            position=(0.0, 0.0),
            velocity=(0.0, 0.0),
            capacity=float(rng.uniform(5e3, 1.5e4)),
            reliability_rate=float(rng.uniform(0.5, 2.0)),
        )
        for j in range(3)
    ]
    predictor = RateHistory(PredictorConfig())
    for vehicle in vehicles:
        for direction in Direction:
            predictor.observe(vehicle.id, direction, 0.0, float(rng.uniform(1e6, 1e7)), 1)
            # nothing is transmitting at decision time
            predictor.set_active_flows(vehicle.id, direction, 0)
    return tasks, vehicles, predictor


def enumeration_optimum(
    tasks: list[TaskSpec], vehicles: list[VehicleState], predictor: RateHistory
) -> float:
    """Smallest predicted aggregated latency over all feasible assignments, inf if none."""
    problem = build_problem(tasks, (), vehicles, predictor, fleet=vehicles)
    rows, cols = problem.shape
    grid = np.array(list(itertools.product((False, True), repeat=rows * cols)), dtype=np.bool_)
    ev = evaluate(problem, grid.reshape(-1, rows, cols))
    feasible = ev.feasible & np.isfinite(ev.penalty)
    return float(ev.p1[feasible].min()) if feasible.any() else math.inf


def assignment_oracle(cases: int = 100, seed: int = 0) -> OracleReport:
    """Swarm vs enumeration; passes when at least 90% of instances are within 5%.

    An instance passes when the swarm result is feasible, really satisfies every
    threshold under the predicted parameters and is within 5% of the optimum,
    or when no feasible assignment exists and the swarm says so.
    """
    passed = 0
    max_gap = 0.0
    for case in range(cases):
        instance_seed = seed + case
        tasks, vehicles, predictor = small_instance(instance_seed)
        optimum = enumeration_optimum(tasks, vehicles, predictor)
        config = SwarmConfig(candidates=len(vehicles), seed=instance_seed)
        outcome = pso_assign(tasks, (), vehicles, predictor, config).unwrap()
        if not math.isfinite(optimum):
            passed += int(not outcome.feasible)
            continue
        problem = build_problem(tasks, (), vehicles, predictor, fleet=vehicles)
        honest = all(feasibility_check(outcome.assignment, problem).values())
        gap = (outcome.objective - optimum) / optimum
        max_gap = max(max_gap, gap)
        if outcome.feasible and honest and gap <= ASSIGNMENT_GAP:
            passed += 1
    report = OracleReport(
        suite=OracleSuite.ASSIGNMENT,
        cases=cases,
        passed=passed,
        max_gap=max_gap,
        max_residual=0.0,
        ok=passed >= math.ceil(ASSIGNMENT_PASS_FRACTION * cases),
    )
    logger.info("assignment oracle: %d/%d within %.0f%%", passed, cases, 100 * ASSIGNMENT_GAP)
    return report


def run_oracle(suite: OracleSuite) -> OracleReport:
    """Run one suite with its default case count and seed.

    Args:
        suite: ``allocation`` (200 random loads) or ``assignment`` (100 small
            instances against enumeration)

    Returns:
        The suite's report; ``ok`` tells whether it met its tolerance

    Examples:
        >>> run_oracle(OracleSuite.ALLOCATION).ok
        True
    """
    match suite:
        case OracleSuite.ALLOCATION:
            return allocation_oracle()
        case OracleSuite.ASSIGNMENT:
            return assignment_oracle()
