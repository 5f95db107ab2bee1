"""Plain text summaries on stdout; errors go to stderr."""

import sys
from dataclasses import dataclass
from typing import TextIO

from cave_sim.domain.metrics import MetricsSummary
from cave_sim.domain.oracles import OracleReport
from cave_sim.domain.types import Failure


def _show(value: float | None, unit: str = "", scale: float = 1.0) -> str:
    return "n/a" if value is None else f"{value * scale:.4g}{unit}"


@dataclass(frozen=True, slots=True)
class ConsoleEmitter:
    """Adapter printing short human-readable results.

    Examples:
        >>> import io
        >>> from cave_sim.domain.types import FailureKind
        >>> err = io.StringIO()
        >>> ConsoleEmitter(stderr=err).emit_failure(Failure(FailureKind.IO, "disk full"))
        >>> err.getvalue()
        'Error: disk full\\n'
    """

    stdout: TextIO = sys.stdout
    stderr: TextIO = sys.stderr

    def emit_summary(self, summary: MetricsSummary) -> None:
        print(
            f"{summary.scheduler}: {summary.tasks} tasks "
            f"({summary.succeeded} ok, {summary.failed} failed, {summary.censored} in flight)",
            file=self.stdout,
        )
        print(
            f"  latency mean {_show(summary.mean_latency_s, ' ms', 1e3)}"
            f"  p80 {_show(summary.p80_latency_s, ' ms', 1e3)}"
            f"  redundancy {_show(summary.mean_redundancy)}"
            f"  U<=H {_show(summary.frac_under_threshold)}",
            file=self.stdout,
        )

    def emit_oracle(self, report: OracleReport) -> None:
        verdict = "PASS" if report.ok else "FAIL"
        print(
            f"{report.suite}: {verdict} {report.passed}/{report.cases} "
            f"max_gap={report.max_gap:.3e} max_residual={report.max_residual:.3e}",
            file=self.stdout,
        )

    def emit_failure(self, failure: Failure) -> None:
        print(f"Error: {failure.message}", file=self.stderr)
