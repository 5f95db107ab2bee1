"""Report sink port (interface).

This module defines where run and sweep results go. The CSV adapter writes
files; tests may collect results in memory instead.
"""

from collections.abc import Sequence
from pathlib import Path
from typing import Protocol

from cave_sim.domain.metrics import MetricsReport
from cave_sim.domain.sweep import SweepRow
from cave_sim.domain.types import BoundaryResult


class ReportSink(Protocol):
    def write_report(self, report: MetricsReport) -> BoundaryResult[list[Path]]:
        """Write per-task rows and the run summary; returns the files written."""
        ...

    def write_sweep(self, rows: Sequence[SweepRow]) -> BoundaryResult[list[Path]]:
        """Write one line per sweep work item; returns the files written."""
        ...
