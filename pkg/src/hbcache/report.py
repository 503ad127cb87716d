"""Figure-data series and a text summary from a sweep results table."""
from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyRunError
from .sweep import SweepTable

__all__ = ["AxisSummary", "aggregate", "argmin_cost", "report", "SERIES_FILES"]

SERIES_FILES = {
    "hit_ratio": "hit_ratio_vs_axis.csv",
    "network": "network_awareness_vs_axis.csv",
    "cost": "overall_cost_vs_axis.csv",
}
SUMMARY_FILE = "summary.txt"


@dataclass(frozen=True)
class Stat:
    mean: float
    std: float  # sample standard deviation; nan with a single repetition


@dataclass(frozen=True)
class AxisSummary:
    axis_value: int
    repetitions: int
    r_local: Stat
    r_peering: Stat
    r_miss: Stat
    r_total: Stat
    h_peering: Stat
    h_miss: Stat
    avg_cost: Stat


def _stat(values: list[float]) -> Stat:
    mean = statistics.fmean(values) if len(values) > 1 else values[0]
    std = statistics.stdev(values) if len(values) > 1 else math.nan
    return Stat(mean, std)


def aggregate(table: SweepTable) -> list[AxisSummary]:
    """Mean and sample standard deviation of each metric per axis value."""
    if not table.rows:
        raise EmptyRunError("cannot summarize an empty results table")
    groups: dict[int, list] = {}
    for row in table.rows:
        groups.setdefault(row.axis_value, []).append(row)
    out = []
    for value in sorted(groups):
        rows = groups[value]
        out.append(AxisSummary(
            axis_value=value,
            repetitions=len(rows),
            r_local=_stat([r.r_local for r in rows]),
            r_peering=_stat([r.r_peering for r in rows]),
            r_miss=_stat([r.r_miss for r in rows]),
            r_total=_stat([r.r_total for r in rows]),
            h_peering=_stat([r.h_peering for r in rows]),
            h_miss=_stat([r.h_miss for r in rows]),
            avg_cost=_stat([r.avg_cost for r in rows]),
        ))
    return out


def argmin_cost(summaries: list[AxisSummary]) -> AxisSummary:
    """Axis point with the lowest mean cost; ties go to the smaller value."""
    return min(summaries, key=lambda s: (s.avg_cost.mean, s.axis_value))


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def _summary_text(table: SweepTable, summaries: list[AxisSummary]) -> str:
    best = argmin_cost(summaries)
    axis = table.axis
    lines = [
        f"Sweep over {axis}: {len(summaries)} points, {len(table.rows)} runs",
        "",
        f"{axis:>10}  {'reps':>4}  {'r_local':>8}  {'r_peering':>9}  {'r_total':>8}"
        f"  {'h_peering':>9}  {'avg_cost':>8}  {'cost_std':>8}",
    ]
    for s in summaries:
        std = "-" if math.isnan(s.avg_cost.std) else f"{s.avg_cost.std:8.4f}"
        lines.append(
            f"{s.axis_value:>10}  {s.repetitions:>4}  {s.r_local.mean:8.4f}  {s.r_peering.mean:9.4f}"
            f"  {s.r_total.mean:8.4f}  {s.h_peering.mean:9.4f}  {s.avg_cost.mean:8.4f}  {std:>8}"
        )
    lines.append("")
    lines.append(f"minimum average cost at {axis}={best.axis_value}: "
                 f"{best.avg_cost.mean:.4f} hops/request "
                 f"(total hit ratio {best.r_total.mean:.4f})")
    first, last = summaries[0], summaries[-1]
    interior = (best.avg_cost.mean < first.avg_cost.mean
                and best.avg_cost.mean < last.avg_cost.mean)
    lines.append("cost minimum is interior to the sweep" if interior
                 else "cost minimum lies at a sweep endpoint")
    return "\n".join(lines) + "\n"


def report(table: SweepTable, out_dir: str | Path) -> str:
    """Write the three figure-data CSVs and ``summary.txt`` into ``out_dir``.

    Returns the summary text.
    """
    summaries = aggregate(table)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    axis = table.axis
    _write_csv(
        out / SERIES_FILES["hit_ratio"],
        [axis, "r_local", "r_peering", "r_total", "r_miss", "r_total_std"],
        [[s.axis_value, s.r_local.mean, s.r_peering.mean, s.r_total.mean, s.r_miss.mean,
          s.r_total.std] for s in summaries],
    )
    _write_csv(
        out / SERIES_FILES["network"],
        [axis, "h_peering", "r_total", "h_peering_std"],
        [[s.axis_value, s.h_peering.mean, s.r_total.mean, s.h_peering.std] for s in summaries],
    )
    _write_csv(
        out / SERIES_FILES["cost"],
        [axis, "r_peering", "h_peering", "r_miss", "h_miss", "avg_cost", "avg_cost_std"],
        [[s.axis_value, s.r_peering.mean, s.h_peering.mean, s.r_miss.mean, s.h_miss.mean,
          s.avg_cost.mean, s.avg_cost.std] for s in summaries],
    )
    text = _summary_text(table, summaries)
    (out / SUMMARY_FILE).write_text(text, encoding="utf-8")
    return text
