"""Tests for the barrier-penalized particle swarm assignment."""

import dataclasses
import itertools
import math

import numpy as np
import pytest
from result import Err

from cave_sim.domain.assigner import (
    DECODE_THRESHOLD,
    BarrierSign,
    SwarmConfig,
    barrier_objective,
    build_problem,
    evaluate,
    feasibility_check,
    initialize_swarm,
    objective_p1,
    predicted_unreliability,
    pso_assign,
    reduce_candidates,
    step_swarm,
)
from cave_sim.domain.oracles import small_instance
from cave_sim.domain.types import Assignment, InProgressTask

TOL = 1e-6

# reference task at an idle vehicle: 0.01 s down, 0.1 s compute, 0.01 s up
REFERENCE_LATENCY = 0.12


def rate_for(success: float, latency: float = REFERENCE_LATENCY) -> float:
    """Decay constant giving the success probability at the given latency."""
    return -math.log(success) / latency


class TestBarrierObjective:
    def test_reliable_single_replica(self, make_task, make_vehicle, predictor):
        vehicle = make_vehicle(reliability_rate=rate_for(0.9))
        problem = build_problem([make_task()], (), [vehicle], predictor)
        score = barrier_objective(Assignment.of([(1, 1)]), problem, mu=1.0)
        assert score == pytest.approx(2.422585, abs=TOL)

    def test_zero_weight_leaves_the_latency(self, make_task, make_vehicle, predictor):
        vehicle = make_vehicle(reliability_rate=rate_for(0.9))
        problem = build_problem([make_task()], (), [vehicle], predictor)
        assignment = Assignment.of([(1, 1)])
        assert barrier_objective(assignment, problem, mu=0.0) == pytest.approx(0.12, abs=TOL)
        assert objective_p1(assignment, problem) == pytest.approx(0.12, abs=TOL)

    def test_unassigned_task_is_outside_the_barrier(self, make_task, make_vehicle, predictor):
        problem = build_problem([make_task()], (), [make_vehicle()], predictor)
        assert barrier_objective(Assignment(), problem, mu=1.0) == math.inf

    def test_literal_sign_rewards_the_boundary(self, make_task, make_vehicle, predictor):
        vehicle = make_vehicle(reliability_rate=rate_for(0.9))
        problem = build_problem([make_task()], (), [vehicle], predictor)
        score = barrier_objective(Assignment.of([(1, 1)]), problem, 1.0, BarrierSign.LITERAL)
        assert score == pytest.approx(0.12 + math.log(0.1), abs=TOL)

    @pytest.mark.parametrize("seed", range(5))
    def test_barrier_gap_is_bounded_by_the_log_slack(self, seed):
        tasks, vehicles, rates = small_instance(seed)
        problem = build_problem(tasks, (), vehicles, rates, fleet=vehicles)
        pairs = [(t.id, v.id) for t in tasks for v in vehicles]
        for mask in itertools.product((False, True), repeat=len(pairs)):
            assignment = Assignment.of(p for p, keep in zip(pairs, mask) if keep)
            if not all(feasibility_check(assignment, problem).values()):
                continue
            slack = [
                task.fail_threshold - u
                for task, u in zip(tasks, predicted_unreliability(assignment, problem).values())
            ]
            if min(slack) <= 0:
                continue
            p1 = objective_p1(assignment, problem)
            for mu in (1.0, 0.1, 1e-3):
                bound = mu * sum(abs(math.log(s)) for s in slack)
                assert abs(barrier_objective(assignment, problem, mu) - p1) <= bound + 1e-9


class TestFeasibility:
    def test_one_reliable_replica_is_enough(self, make_task, make_vehicle, predictor):
        vehicle = make_vehicle(reliability_rate=rate_for(0.9))
        problem = build_problem([make_task()], (), [vehicle], predictor)
        assert feasibility_check(Assignment.of([(1, 1)]), problem) == {1: True}

    def test_two_coin_flips_are_not_enough(self, make_task, make_vehicle, predictor):
        vehicles = [make_vehicle(j, reliability_rate=rate_for(0.5)) for j in (1, 2)]
        problem = build_problem([make_task()], (), vehicles, predictor)
        assignment = Assignment.of([(1, 1), (1, 2)])
        assert predicted_unreliability(assignment, problem)[1] == pytest.approx(0.25, abs=TOL)
        assert feasibility_check(assignment, problem) == {1: False}

    def test_unassigned_task_is_infeasible(self, make_task, make_vehicle, predictor):
        problem = build_problem([make_task()], (), [make_vehicle()], predictor)
        assert feasibility_check(Assignment(), problem) == {1: False}
        assert predicted_unreliability(Assignment(), problem) == {1: 1.0}


class TestInProgressTerms:
    def test_hosted_work_slows_new_tasks(self, make_task, make_vehicle, predictor):
        busy = make_vehicle(1, in_progress={7})
        work = InProgressTask(7, 1, remaining_down=0.0, remaining_compute=2000.0, remaining_up=0.0)
        problem = build_problem([make_task()], [work], [busy], predictor)
        # equal share 5e3 for the new task; remaining work stretched by two tasks
        assert objective_p1(Assignment.of([(1, 1)]), problem) == pytest.approx(0.62, abs=TOL)

    def test_unaware_variant_drops_hosted_latency(self, make_task, make_vehicle, predictor):
        busy = make_vehicle(1, in_progress={7})
        work = InProgressTask(7, 1, remaining_down=0.0, remaining_compute=2000.0, remaining_up=0.0)
        problem = build_problem(
            [make_task()], [work], [busy], predictor, include_in_progress=False
        )
        # half the capacity for the new task, nothing for the work it slows down
        assert objective_p1(Assignment.of([(1, 1)]), problem) == pytest.approx(0.22, abs=TOL)


class TestSwarmStep:
    def one_by_one(self, make_task, make_vehicle, predictor, success):
        vehicle = make_vehicle(reliability_rate=rate_for(success))
        return build_problem([make_task()], (), [vehicle], predictor)

    def test_converged_swarm_stays_put(self, make_task, make_vehicle, predictor):
        problem = self.one_by_one(make_task, make_vehicle, predictor, 0.9)
        config = SwarmConfig(particles=4)
        rng = np.random.default_rng(0)
        ones = np.ones((4, 1))
        swarm = dataclasses.replace(
            initialize_swarm(problem, rng, config, 1.0),
            positions=ones,
            velocities=np.zeros((4, 1)),
            best_positions=ones.copy(),
            global_position=np.ones(1),
        )
        moved = step_swarm(swarm, problem, 0.9, rng, config)
        assert np.array_equal(moved.positions, ones)
        assert not moved.resampled.any()
        assert moved.feasible.all()

    def test_infeasible_particles_are_resampled(self, make_task, make_vehicle, predictor):
        problem = self.one_by_one(make_task, make_vehicle, predictor, 1e-6)
        config = SwarmConfig(particles=8)
        rng = np.random.default_rng(0)
        swarm = step_swarm(initialize_swarm(problem, rng, config, 1.0), problem, 0.9, rng, config)
        assert swarm.resampled.all()
        assert not swarm.feasible.any()
        assert not swarm.has_feasible

    def test_resampled_rows_belong_to_their_particle(self, make_task, make_vehicle, predictor):
        vehicles = [
            make_vehicle(1, reliability_rate=rate_for(0.9)),
            make_vehicle(2, reliability_rate=rate_for(1e-6)),
        ]
        problem = build_problem([make_task()], (), vehicles, predictor)
        config = SwarmConfig(particles=4, inertia=0.0, cognitive=0.0, social=0.0)
        good, bad = [0.9, 0.1], [0.1, 0.9]

        def moved(rows):
            positions = np.array(rows)
            start = dataclasses.replace(
                initialize_swarm(problem, np.random.default_rng(0), config, 1.0),
                positions=positions,
                velocities=np.zeros_like(positions),
            )
            return step_swarm(start, problem, 0.9, np.random.default_rng(7), config)

        one = moved([bad, good, good, good])
        two = moved([bad, bad, good, good])
        assert one.resampled.tolist() == [True, False, False, False]
        assert two.resampled.tolist() == [True, True, False, False]
        assert np.array_equal(one.positions[0], two.positions[0])
        assert np.array_equal(one.positions[1], good)
        assert not np.array_equal(two.positions[1], bad)

    def test_positions_stay_in_the_box(self, make_task, make_vehicle, predictor):
        problem = self.one_by_one(make_task, make_vehicle, predictor, 0.9)
        config = SwarmConfig(particles=16)
        rng = np.random.default_rng(2)
        swarm = initialize_swarm(problem, rng, config, 1.0)
        for _ in range(20):
            swarm = step_swarm(swarm, problem, 0.9, rng, config)
            assert swarm.positions.min() >= 0.0
            assert swarm.positions.max() <= 1.0
            assert np.abs(swarm.velocities).max() <= config.v_max

    def test_decode_threshold(self, make_task, make_vehicle, predictor):
        vehicles = [make_vehicle(1), make_vehicle(2)]
        problem = build_problem([make_task()], (), vehicles, predictor)
        assert problem.decode(np.array([0.7, 0.3]) > DECODE_THRESHOLD) == Assignment.of([(1, 1)])
        assert problem.decode(np.array([0.5, 0.51]) > DECODE_THRESHOLD) == Assignment.of([(1, 2)])

    def test_encode_inverts_decode(self, make_task, make_vehicle, predictor):
        vehicles = [make_vehicle(1), make_vehicle(2)]
        tasks = [make_task(1), make_task(2)]
        problem = build_problem(tasks, (), vehicles, predictor)
        assignment = Assignment.of([(1, 2), (2, 1), (2, 2)])
        assert problem.decode(problem.encode(assignment)) == assignment


class TestReduceCandidates:
    def test_keeps_the_fastest_vehicles(self, make_task, make_vehicle, predictor):
        vehicles = [make_vehicle(1, 1e4), make_vehicle(2, 2e4), make_vehicle(3, 5e3)]
        kept = reduce_candidates(vehicles, [make_task()], 2, predictor).unwrap()
        assert [v.id for v in kept] == [2, 1]

    def test_ties_go_to_the_lower_id(self, make_task, make_vehicle, predictor):
        vehicles = [make_vehicle(j) for j in (5, 3, 4)]
        kept = reduce_candidates(vehicles, [make_task()], 3, predictor).unwrap()
        assert [v.id for v in kept] == [3, 4, 5]

    def test_busy_vehicle_ranks_lower(self, make_task, make_vehicle, predictor):
        vehicles = [make_vehicle(1, in_progress={8, 9}), make_vehicle(2)]
        kept = reduce_candidates(vehicles, [make_task()], 1, predictor).unwrap()
        assert [v.id for v in kept] == [2]

    def test_no_vehicles(self, make_task, predictor):
        assert isinstance(reduce_candidates([], [make_task()], 3, predictor), Err)

    def test_needs_a_positive_count(self, make_task, make_vehicle, predictor):
        assert isinstance(reduce_candidates([make_vehicle()], [make_task()], 0, predictor), Err)


class TestPsoAssign:
    def test_single_candidate(self, make_task, make_vehicle, predictor):
        outcome = pso_assign(
            [make_task()], (), [make_vehicle(reliability_rate=1.0)], predictor, SwarmConfig()
        ).unwrap()
        assert outcome.assignment == Assignment.of([(1, 1)])
        assert outcome.feasible
        assert outcome.objective == pytest.approx(0.12, abs=TOL)

    def test_replicates_until_reliable(self, make_task, make_vehicle, predictor):
        # one or two replicas leave U >= 0.25, three give 0.125
        vehicles = [make_vehicle(j, reliability_rate=rate_for(0.5)) for j in (1, 2, 3)]
        outcome = pso_assign([make_task()], (), vehicles, predictor, SwarmConfig()).unwrap()
        assert outcome.feasible
        assert outcome.assignment.redundancy(1) == 3
        assert outcome.predicted_unreliability[1] <= 0.2

    def test_avoids_the_busy_vehicle(self, make_task, make_vehicle, predictor):
        vehicles = [make_vehicle(1, reliability_rate=0.1, in_progress={7}),
                    make_vehicle(2, reliability_rate=0.1)]
        work = InProgressTask(7, 1, remaining_down=0.0, remaining_compute=2000.0, remaining_up=0.0)
        outcome = pso_assign([make_task()], [work], vehicles, predictor, SwarmConfig()).unwrap()
        assert outcome.assignment == Assignment.of([(1, 2)])

    def test_same_seed_same_decision(self, make_task, make_vehicle, predictor):
        tasks = [make_task(1), make_task(2, compute=1800.0)]
        vehicles = [make_vehicle(j, reliability_rate=0.5 + 0.3 * j) for j in range(1, 6)]
        config = SwarmConfig(seed=4)
        first = pso_assign(tasks, (), vehicles, predictor, config).unwrap()
        second = pso_assign(tasks, (), vehicles, predictor, config).unwrap()
        assert first.assignment == second.assignment
        assert first.history == second.history

    def test_global_best_never_gets_worse(self, make_task, make_vehicle, predictor):
        tasks = [make_task(1), make_task(2, compute=1800.0)]
        vehicles = [make_vehicle(j, reliability_rate=0.5 + 0.3 * j) for j in range(1, 6)]
        outcome = pso_assign(tasks, (), vehicles, predictor, SwarmConfig(seed=1)).unwrap()
        assert len(outcome.history) == SwarmConfig().iterations + 1
        assert all(b <= a for a, b in zip(outcome.history, outcome.history[1:]))

    def test_best_effort_when_nothing_is_feasible(self, make_task, make_vehicle, predictor):
        vehicles = [make_vehicle(j, reliability_rate=100.0) for j in (1, 2)]
        config = SwarmConfig(iterations=5)
        outcome = pso_assign([make_task()], (), vehicles, predictor, config).unwrap()
        assert not outcome.feasible
        assert outcome.assignment.redundancy(1) >= 1

    def test_nothing_to_assign(self, make_vehicle, predictor):
        assert isinstance(pso_assign([], (), [make_vehicle()], predictor, SwarmConfig()), Err)

    def test_nowhere_to_assign(self, make_task, predictor):
        assert isinstance(pso_assign([make_task()], (), [], predictor, SwarmConfig()), Err)

    def test_in_progress_assignments_are_untouched(self, make_task, make_vehicle, predictor):
        vehicles = [make_vehicle(1, in_progress={7}), make_vehicle(2)]
        work = InProgressTask(7, 1, remaining_down=0.0, remaining_compute=500.0, remaining_up=0.0)
        outcome = pso_assign([make_task()], [work], vehicles, predictor, SwarmConfig()).unwrap()
        assert outcome.assignment.task_ids() == (1,)


def test_evaluate_scores_a_batch(make_task, make_vehicle, predictor):
    vehicles = [make_vehicle(1, reliability_rate=rate_for(0.9)), make_vehicle(2)]
    problem = build_problem([make_task()], (), vehicles, predictor)
    batch = np.array([[[True, False]], [[False, False]], [[True, True]]])
    ev = evaluate(problem, batch)
    assert ev.feasible.tolist() == [True, False, True]
    assert ev.p1[0] == pytest.approx(0.12, abs=TOL)
    assert ev.p1[2] == pytest.approx(0.24, abs=TOL)
    assert math.isinf(ev.penalty[1])
