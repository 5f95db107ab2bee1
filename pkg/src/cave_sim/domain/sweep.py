"""Parameter sweeps over arrival intensity or failure threshold.

A sweep expands into independent work items, one per (scheduler, value,
repetition). Repetition ``r`` runs with seed ``base.seed + r``, so every item
is reproducible on its own and parallel runs merge into the same rows as a
serial one.
"""

import dataclasses
import logging
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

from result import Err, Ok, Result

from cave_sim.domain.config import ScenarioConfig, SchedulerKind, scenario_from_mapping
from cave_sim.domain.engine import run
from cave_sim.domain.types import ErrorMessage
from cave_sim.utils.railway import collect_errors

logger = logging.getLogger(__name__)

SWEEP_KEYS = frozenset({"parameter", "values", "repetitions", "base", "schedulers"})


class SweepParameter(StrEnum):
    ARRIVAL_INTENSITY = "arrival_intensity"
    FAIL_THRESHOLD = "fail_threshold"


@dataclass(frozen=True, slots=True)
class SweepSpec:
    """One sweep: a scenario, the field varied and the values it takes.

    Attributes:
        parameter: Scenario field varied by the sweep
        values: Values taken by that field, in output order
        repetitions: Seeds per value
        base: Scenario every item starts from
        schedulers: Schedulers compared, in output order
    """

    parameter: SweepParameter
    values: tuple[float, ...]
    repetitions: int = 1
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    schedulers: tuple[SchedulerKind, ...] = tuple(SchedulerKind)

    def validate(self) -> list[ErrorMessage]:
        errors: list[ErrorMessage] = []
        if not self.values:
            errors.append("values must not be empty")
        if self.repetitions < 1:
            errors.append(f"repetitions must be >= 1, got {self.repetitions}")
        if not self.schedulers:
            errors.append("schedulers must not be empty")
        if len(set(self.schedulers)) != len(self.schedulers):
            errors.append("schedulers must not repeat")
        return errors


@dataclass(frozen=True, slots=True)
class SweepItem:
    scheduler: SchedulerKind
    parameter: SweepParameter
    value: float
    rep: int
    config: ScenarioConfig


@dataclass(frozen=True, slots=True)
class SweepRow:
    """One line of ``sweep.csv``."""

    scheduler: SchedulerKind
    param: SweepParameter
    value: float
    rep: int
    mean_latency_s: float | None
    p80_latency_s: float | None
    frac_under_threshold: float | None
    mean_redundancy: float | None


def work_items(spec: SweepSpec) -> Result[list[SweepItem], ErrorMessage]:
    """Expand a sweep in (scheduler, value, rep) order, validating every scenario."""
    items: list[SweepItem] = []
    errors: list[ErrorMessage] = []
    for scheduler in spec.schedulers:
        for value in spec.values:
            for rep in range(spec.repetitions):
                config = dataclasses.replace(
                    spec.base,
                    **{spec.parameter.value: value},
                    scheduler=scheduler,
                    seed=spec.base.seed + rep,
                )
                problems = config.validate()
                if problems:
                    errors.append(f"{spec.parameter}={value}: " + "; ".join(problems))
                else:
                    items.append(SweepItem(scheduler, spec.parameter, value, rep, config))
    if errors:
        return Err("; ".join(dict.fromkeys(errors)))
    return Ok(items)


def run_item(item: SweepItem) -> Result[SweepRow, ErrorMessage]:
    """Run one work item; module-level so a process pool can pickle it."""
    return run(item.config).map(
        lambda report: SweepRow(
            scheduler=item.scheduler,
            param=item.parameter,
            value=item.value,
            rep=item.rep,
            mean_latency_s=report.summary.mean_latency_s,
            p80_latency_s=report.summary.p80_latency_s,
            frac_under_threshold=report.summary.frac_under_threshold,
            mean_redundancy=report.summary.mean_redundancy,
        )
    )


def run_sweep(spec: SweepSpec, jobs: int = 1) -> Result[list[SweepRow], ErrorMessage]:
    """Run every item of a sweep, serially or on ``jobs`` worker processes.

    Rows come back in work-item order whatever the number of workers.
    """
    errors = spec.validate()
    if jobs < 1:
        errors.append(f"jobs must be >= 1, got {jobs}")
    if errors:
        return Err("; ".join(errors))
    match work_items(spec):
        case Err(error):
            return Err(error)
        case Ok(items):
            pass

    logger.info("sweeping %s over %d work items on %d worker(s)", spec.parameter, len(items), jobs)
    if jobs == 1:
        results = [run_item(item) for item in items]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_item, items))

    failures = collect_errors(iter(results))
    if failures:
        return Err("; ".join(failures))
    return Ok([result.ok_value for result in results if isinstance(result, Ok)])


def sweep_from_mapping(data: Mapping[str, Any]) -> Result[SweepSpec, ErrorMessage]:
    """Build a sweep from parsed JSON.

    ``base`` is a scenario mapping (all fields optional); ``schedulers``
    defaults to every scheduler.

    Examples:
        >>> spec = sweep_from_mapping({"parameter": "fail_threshold", "values": [0.1, 0.2]})
        >>> spec.ok_value.values
        (0.1, 0.2)
    """
    errors: list[ErrorMessage] = [f"{key}: unknown key" for key in sorted(set(data) - SWEEP_KEYS)]

    parameter = data.get("parameter")
    choices = [p.value for p in SweepParameter]
    if parameter not in choices:
        errors.append(f"parameter: expected one of {choices}, got {parameter!r}")

    values = data.get("values")
    if not isinstance(values, Sequence) or isinstance(values, str) or not all(
        isinstance(v, int | float) and not isinstance(v, bool) for v in values
    ):
        errors.append(f"values: expected a list of numbers, got {values!r}")
        values = []

    repetitions = data.get("repetitions", 1)
    if not isinstance(repetitions, int) or isinstance(repetitions, bool):
        errors.append(f"repetitions: expected int, got {repetitions!r}")
        repetitions = 1

    scheduler_names = data.get("schedulers", [kind.value for kind in SchedulerKind])
    kinds = [kind.value for kind in SchedulerKind]
    if not isinstance(scheduler_names, list) or any(s not in kinds for s in scheduler_names):
        errors.append(f"schedulers: expected a list drawn from {kinds}, got {scheduler_names!r}")
        scheduler_names = []

    base = data.get("base", {})
    if not isinstance(base, Mapping):
        errors.append(f"base: expected an object, got {type(base).__name__}")
        base = {}
    match scenario_from_mapping(base):
        case Err(error):
            errors.append(f"base: {error}")
            base_config = ScenarioConfig()
        case Ok(base_config):
            pass

    if errors:
        return Err("; ".join(errors))
    spec = SweepSpec(
        parameter=SweepParameter(parameter),
        values=tuple(float(v) for v in values),
        repetitions=repetitions,
        base=base_config,
        schedulers=tuple(SchedulerKind(name) for name in scheduler_names),
    )
    problems = spec.validate()
    return Err("; ".join(problems)) if problems else Ok(spec)
