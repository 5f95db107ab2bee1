"""CSV and JSON file writers for run and sweep results.

Column order is fixed and floats are written with ``format(x, ".12g")``, which
always uses a dot, so identical runs give byte-identical files whatever the
locale. Missing values are written as empty fields (``null`` in JSON).
"""

import csv
import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from result import Err, Ok

from cave_sim.domain.metrics import MetricsReport, TaskRow
from cave_sim.domain.sweep import SweepRow
from cave_sim.domain.types import BoundaryResult, Failure, FailureKind

TASK_COLUMNS = ("task_id", "arrival_s", "latency_s", "unreliability", "redundancy", "outcome")
SWEEP_COLUMNS = (
    "scheduler",
    "param",
    "value",
    "rep",
    "mean_latency_s",
    "p80_latency_s",
    "frac_under_threshold",
    "mean_redundancy",
)


def format_cell(value: object) -> str:
    """Render one CSV cell.

    Examples:
        >>> format_cell(0.1 + 0.2)
        '0.3'
        >>> format_cell(None)
        ''
        >>> format_cell(3)
        '3'
    """
    match value:
        case None:
            return ""
        case bool():
            return str(value).lower()
        case float():
            return format(value, ".12g")
        case _:
            return str(value)


def task_cells(row: TaskRow) -> list[str]:
    return [
        format_cell(cell)
        for cell in (
            row.task_id,
            row.arrival_s,
            row.latency_s,
            row.unreliability,
            row.redundancy,
            row.outcome.value,
        )
    ]


def sweep_cells(row: SweepRow) -> list[str]:
    return [
        format_cell(cell)
        for cell in (
            row.scheduler.value,
            row.param.value,
            row.value,
            row.rep,
            row.mean_latency_s,
            row.p80_latency_s,
            row.frac_under_threshold,
            row.mean_redundancy,
        )
    ]


@dataclass(frozen=True, slots=True)
class CsvReportWriter:
    """Adapter writing ``tasks.csv``, ``summary.json`` and ``sweep.csv``.

    Attributes:
        out_dir: Directory receiving the files; created when missing
    """

    out_dir: Path

    def _write_csv(
        self, name: str, header: Sequence[str], rows: Iterable[list[str]]
    ) -> BoundaryResult[Path]:
        path = self.out_dir / name
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            with path.open("w", encoding="utf-8", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(header)
                writer.writerows(rows)
        except OSError as e:
            return Err(Failure(FailureKind.IO, f"cannot write {path}: {e}"))
        return Ok(path)

    def write_report(self, report: MetricsReport) -> BoundaryResult[list[Path]]:
        match self._write_csv("tasks.csv", TASK_COLUMNS, (task_cells(r) for r in report.rows)):
            case Err(failure):
                return Err(failure)
            case Ok(tasks_path):
                pass
        summary_path = self.out_dir / "summary.json"
        try:
            summary_path.write_text(
                json.dumps(report.summary.as_dict(), indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )
        except OSError as e:
            return Err(Failure(FailureKind.IO, f"cannot write {summary_path}: {e}"))
        return Ok([tasks_path, summary_path])

    def write_sweep(self, rows: Sequence[SweepRow]) -> BoundaryResult[list[Path]]:
        return self._write_csv("sweep.csv", SWEEP_COLUMNS, (sweep_cells(r) for r in rows)).map(
            lambda path: [path]
        )
