"""Parameter sweeps over node degree or cache size."""
from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields

from .config import SimConfig, SweepSpec
from .engine import RunMetrics, run
from .errors import HBCacheError, ParseError
from .rng import row_seed

__all__ = ["RESULT_COLUMNS", "SweepRow", "SweepTable", "SweepRowError", "run_sweep",
           "format_results", "parse_results"]

log = logging.getLogger(__name__)

RESULTS_VERSION = 1
RESULT_COLUMNS = (
    "axis_value", "rep", "seed", "n_requests", "n_local", "n_peering", "n_miss",
    "r_local", "r_peering", "r_miss", "h_peering", "h_miss", "avg_cost",
)


class SweepRowError(HBCacheError):
    """A sweep row failed; the message names the row."""


@dataclass(frozen=True)
class SweepRow:
    axis_value: int
    rep: int
    seed: int
    n_requests: int
    n_local: int
    n_peering: int
    n_miss: int
    r_local: float
    r_peering: float
    r_miss: float
    h_peering: float
    h_miss: float
    avg_cost: float

    @classmethod
    def from_metrics(cls, axis_value: int, rep: int, seed: int, m: RunMetrics) -> "SweepRow":
        return cls(axis_value, rep, seed, m.n_requests, m.n_local, m.n_peering, m.n_miss,
                   m.r_local, m.r_peering, m.r_miss, m.h_peering, float(m.h_miss), m.avg_cost)

    @property
    def r_total(self) -> float:
        return self.r_local + self.r_peering


assert tuple(f.name for f in fields(SweepRow)) == RESULT_COLUMNS
_CASTS = (int,) * 7 + (float,) * 6


@dataclass
class SweepTable:
    axis: str
    rows: list[SweepRow]


def _row_config(spec: SweepSpec, value: int, rep: int) -> SimConfig:
    return spec.base.replace(**{spec.axis: value}, seed=row_seed(spec.base.seed, rep),
                             log_outcomes=False)


def _run_row(task: tuple[SweepSpec, int, int]) -> SweepRow:
    spec, value, rep = task
    config = _row_config(spec, value, rep)
    try:
        metrics = run(config)
    except Exception as exc:
        raise SweepRowError(f"row {spec.axis}={value} rep={rep} failed: {exc}") from exc
    log.info("%s=%d rep=%d done", spec.axis, value, rep)
    return SweepRow.from_metrics(value, rep, config.seed, metrics)


def run_sweep(spec: SweepSpec, worker_count: int = 1) -> SweepTable:
    """Run every (axis value, repetition) point of ``spec``.

    Rows come back ordered by axis value, then repetition, whatever the
    worker count. Each row's seed comes from :func:`hbcache.rng.row_seed`.
    """
    if worker_count < 1:
        raise ValueError(f"worker_count must be >= 1, got {worker_count}")
    tasks = [(spec, v, rep) for v in spec.values for rep in range(spec.repetitions)]
    if worker_count == 1 or len(tasks) == 1:
        rows = [_run_row(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(worker_count, len(tasks))) as pool:
            rows = list(pool.map(_run_row, tasks))
    return SweepTable(spec.axis, rows)


def format_results(table: SweepTable) -> str:
    buf = io.StringIO()
    buf.write(f"# hbcache-results v{RESULTS_VERSION} axis={table.axis}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for row in table.rows:
        # repr() round-trips floats exactly
        writer.writerow([repr(x) if isinstance(x, float) else x for x in astuple(row)])
    return buf.getvalue()


def parse_results(text: str) -> SweepTable:
    axis = None
    lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            for token in line[1:].split():
                if token.startswith("axis="):
                    axis = token[len("axis="):]
            continue
        if line.strip():
            lines.append(line)
    if axis is None:
        raise ParseError("missing '# hbcache-results ... axis=<name>' header", "line 1")
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None or tuple(header) != RESULT_COLUMNS:
        raise ParseError(f"expected columns {','.join(RESULT_COLUMNS)}", "header")
    rows = []
    for i, rec in enumerate(reader, start=1):
        if len(rec) != len(RESULT_COLUMNS):
            raise ParseError(f"expected {len(RESULT_COLUMNS)} fields, got {len(rec)}", f"row {i}")
        try:
            values = [cast(x) for cast, x in zip(_CASTS, rec)]
        except ValueError as exc:
            raise ParseError(str(exc), f"row {i}") from None
        rows.append(SweepRow(*values))
    return SweepTable(axis, rows)
