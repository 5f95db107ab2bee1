"""Poisson task arrivals at the ego vehicle."""

from dataclasses import dataclass

import numpy as np

from cave_sim.domain.types import Bits, Gflop, Probability, Seconds, TaskId, TaskSpec


@dataclass(frozen=True, slots=True)
class WorkloadRanges:
    """Sampling ranges for task payloads and compute demand.

    Attributes:
        size_range: Uniform range of each payload, downlink and uplink (bits)
        compute_range: Uniform range of compute demand (GFLOP)
        fail_threshold: H_i^min given to every task
    """

    size_range: tuple[Bits, Bits] = (1e4, 1e5)
    compute_range: tuple[Gflop, Gflop] = (1000.0, 2000.0)
    fail_threshold: Probability = 0.2


def spawn_tasks(
    rng: np.random.Generator,
    intensity: float,
    slot_dt: Seconds,
    ranges: WorkloadRanges,
    *,
    now: Seconds = 0.0,
    first_id: TaskId = 0,
) -> list[TaskSpec]:
    """Tasks arriving during one slot of a Poisson process.

    The count is Poisson(intensity * slot_dt); each task draws its downlink
    payload, uplink payload and compute demand uniformly, in that order.

    Args:
        rng: Workload random stream
        intensity: Arrivals per second
        slot_dt: Slot length (s)
        ranges: Payload and compute ranges
        now: Arrival time stamped on the tasks
        first_id: Id of the first spawned task; later ones count up

    Returns:
        The arriving tasks, possibly none
    """
    count = int(rng.poisson(intensity * slot_dt))
    tasks: list[TaskSpec] = []
    for offset in range(count):
        down_bits = float(rng.uniform(*ranges.size_range))
        up_bits = float(rng.uniform(*ranges.size_range))
        compute = float(rng.uniform(*ranges.compute_range))
        tasks.append(
            TaskSpec(
                id=first_id + offset,
                arrival_time=now,
                compute=compute,
                down_bits=down_bits,
                up_bits=up_bits,
                fail_threshold=ranges.fail_threshold,
            )
        )
    return tasks
