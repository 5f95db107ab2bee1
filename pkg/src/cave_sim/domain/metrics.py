"""Per-task rows and aggregate summary of a simulation run."""

import math
from collections.abc import Iterable
from dataclasses import asdict, dataclass
from enum import StrEnum
from typing import TYPE_CHECKING, Any

import numpy as np

from cave_sim.domain.records import TaskFailed, TaskRecord, TaskSucceeded
from cave_sim.domain.types import Probability, Seconds, TaskId

if TYPE_CHECKING:
    from cave_sim.domain.config import ScenarioConfig
    from cave_sim.domain.engine import SlotAudit

LATENCY_PERCENTILES = (50, 80, 95)


class OutcomeLabel(StrEnum):
    SUCCESS = "success"
    FAILURE = "failure"
    CENSORED = "censored"  # still in flight when the run ended


@dataclass(frozen=True, slots=True)
class TaskRow:
    """One line of ``tasks.csv``.

    ``latency_s`` is empty unless the task succeeded; ``unreliability`` is empty
    for censored tasks.
    """

    task_id: TaskId
    arrival_s: Seconds
    latency_s: Seconds | None
    unreliability: Probability | None
    predicted_unreliability: Probability
    redundancy: int
    outcome: OutcomeLabel
    threshold: Probability


@dataclass(frozen=True, slots=True)
class MetricsSummary:
    """Per-run aggregates written to ``summary.json``.

    Latency fields cover succeeded tasks; unreliability fractions cover
    settled tasks. ``max_load_ratio``, ``bits_sent``, ``compute_done`` and
    ``allocation_faults`` are copied from the run's slot audit.
    """

    scheduler: str
    seed: int
    tasks: int
    succeeded: int
    failed: int
    censored: int
    mean_latency_s: Seconds | None
    p50_latency_s: Seconds | None
    p80_latency_s: Seconds | None
    p95_latency_s: Seconds | None
    frac_under_threshold: float | None
    frac_predicted_under_threshold: float | None
    mean_unreliability: Probability | None
    max_unreliability: Probability | None
    mean_redundancy: float | None
    max_load_ratio: float
    bits_sent: float
    compute_done: float
    allocation_faults: int

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True, slots=True)
class MetricsReport:
    rows: tuple[TaskRow, ...]
    summary: MetricsSummary


def task_row(record: TaskRecord) -> TaskRow:
    match record.outcome:
        case TaskSucceeded(latency):
            outcome, latency_s = OutcomeLabel.SUCCESS, latency
        case TaskFailed():
            outcome, latency_s = OutcomeLabel.FAILURE, None
        case None:
            outcome, latency_s = OutcomeLabel.CENSORED, None
    return TaskRow(
        task_id=record.spec.id,
        arrival_s=record.spec.arrival_time,
        latency_s=latency_s,
        unreliability=record.realized_unreliability,
        predicted_unreliability=record.predicted_unreliability,
        redundancy=record.redundancy,
        outcome=outcome,
        threshold=record.spec.fail_threshold,
    )


def _mean(values: list[float]) -> float | None:
    return math.fsum(values) / len(values) if values else None


def _fraction(flags: list[bool]) -> float | None:
    return sum(flags) / len(flags) if flags else None


def summarize(
    rows: Iterable[TaskRow], audit: "SlotAudit", config: "ScenarioConfig"
) -> MetricsSummary:
    """Aggregate the task rows of a run.

    Latency statistics cover succeeded tasks only. Unreliability fractions
    cover tasks with a realized outcome; censored tasks are counted but left
    out of every average.
    """
    table = list(rows)
    settled = [row for row in table if row.outcome is not OutcomeLabel.CENSORED]
    latencies = [row.latency_s for row in table if row.latency_s is not None]
    realized = [row.unreliability for row in settled if row.unreliability is not None]
    percentiles: list[float | None] = (
        [float(p) for p in np.percentile(latencies, LATENCY_PERCENTILES)]
        if latencies
        else [None] * len(LATENCY_PERCENTILES)
    )
    dispatched = [row.redundancy for row in table if row.redundancy > 0]
    return MetricsSummary(
        scheduler=config.scheduler.value,
        seed=config.seed,
        tasks=len(table),
        succeeded=sum(row.outcome is OutcomeLabel.SUCCESS for row in table),
        failed=sum(row.outcome is OutcomeLabel.FAILURE for row in table),
        censored=len(table) - len(settled),
        mean_latency_s=_mean(latencies),
        p50_latency_s=percentiles[0],
        p80_latency_s=percentiles[1],
        p95_latency_s=percentiles[2],
        frac_under_threshold=_fraction(
            [row.unreliability <= row.threshold for row in settled if row.unreliability is not None]
        ),
        frac_predicted_under_threshold=_fraction(
            [row.predicted_unreliability <= row.threshold for row in settled]
        ),
        mean_unreliability=_mean(realized),
        max_unreliability=max(realized) if realized else None,
        mean_redundancy=_mean([float(r) for r in dispatched]),
        max_load_ratio=audit.max_load_ratio,
        bits_sent=audit.bits_sent,
        compute_done=audit.compute_done,
        allocation_faults=audit.allocation_faults,
    )


def build_report(
    records: Iterable[TaskRecord], audit: "SlotAudit", config: "ScenarioConfig"
) -> MetricsReport:
    """Rows in task-id order plus their summary."""
    rows = tuple(task_row(record) for record in sorted(records, key=lambda r: r.spec.id))
    return MetricsReport(rows=rows, summary=summarize(rows, audit, config))
