"""Result rows, tables, and file emission.

Every row records the empirical statistic, the analytic reference value
or bound it is held against, the acceptance band, a pass flag, and the
name of the oracle operation that produced the analytic column.  Rows
tagged ``reported:`` in their provenance are informational and always
pass.  The CSV layout is fixed and byte-deterministic for a fixed config.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["ResultRow", "ResultTable", "emit_results", "read_summary"]

CSV_COLUMNS = ("experiment", "params", "empirical", "analytic", "band", "pass", "provenance")


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    params: str
    empirical: float | None
    analytic: float | None
    band: float | None
    passed: bool
    provenance: str

    def csv_record(self) -> list[str]:
        def fmt(x: float | None) -> str:
            return "" if x is None else repr(float(x))

        return [
            self.experiment,
            self.params,
            fmt(self.empirical),
            fmt(self.analytic),
            fmt(self.band),
            "pass" if self.passed else "FAIL",
            self.provenance,
        ]


@dataclass
class ResultTable:
    experiment: str
    seed: int
    rows: list[ResultRow] = field(default_factory=list)
    wall_time_s: float = 0.0

    def add(
        self,
        params: str,
        empirical: float | None,
        analytic: float | None,
        band: float | None,
        passed: bool,
        provenance: str,
    ) -> None:
        def norm(x):
            return None if x is None else float(x)

        self.rows.append(
            ResultRow(
                self.experiment,
                params,
                norm(empirical),
                norm(analytic),
                norm(band),
                bool(passed),
                provenance,
            )
        )

    def report(
        self, params: str, empirical: float | None, analytic: float | None, provenance: str
    ) -> None:
        """An informational row: recorded, never failing."""
        self.add(params, empirical, analytic, None, True, "reported: " + provenance)

    @property
    def passes(self) -> int:
        return sum(r.passed for r in self.rows)

    @property
    def failures(self) -> int:
        return len(self.rows) - self.passes

    @property
    def all_passed(self) -> bool:
        return self.failures == 0


class _Stopwatch:
    def __init__(self) -> None:
        self.start = time.perf_counter()

    def seconds(self) -> float:
        return time.perf_counter() - self.start


def stopwatch() -> _Stopwatch:
    return _Stopwatch()


def emit_results(table: ResultTable, out_dir: str | Path, fmt: str = "csv") -> list[Path]:
    """Write results.csv and summary.json into out_dir; returns the paths.

    The CSV holds one record per row in fixed column order; the summary
    carries the experiment, seed, row counts, and wall time.
    """
    if fmt != "csv":
        raise ValueError(f"unsupported format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in table.rows:
            writer.writerow(row.csv_record())
    summary_path = out / "summary.json"
    summary = {
        "experiment": table.experiment,
        "seed": int(table.seed),
        "rows": len(table.rows),
        "passes": int(table.passes),
        "failures": int(table.failures),
        "wall_time_s": round(float(table.wall_time_s), 3),
    }
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return [csv_path, summary_path]


def read_summary(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
