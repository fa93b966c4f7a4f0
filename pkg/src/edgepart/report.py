"""CSV and JSON renderings of breakdowns and sweeps.

Floats are written with ``repr`` so that a value read back parses to the same
double and repeated runs produce identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .energy import FleetSummary

BREAKDOWN_COLUMNS = (
    "strategy",
    "partitions",
    "partition_index",
    "comp_J",
    "in_comm_J",
    "ex_comm_J",
    "total_J",
    "normalized_max",
)
SWEEP_COLUMNS = ("strategy", "device_count", "max_energy_J", "normalized_max", "baseline_single_device_J")
SUMMARY_INDEX = "max"


def _cell(value):
    return repr(value) if isinstance(value, float) else value


def breakdown_rows(strategy: str, summary: FleetSummary) -> list[dict]:
    """One row per partition, then a summary row for the most loaded partition.

    A partition row's ``normalized_max`` is its own total over the single-device
    total; on the summary row it is the fleet figure of merit.
    """
    base = summary.single_device_total
    partitions = len(summary.per_partition)
    rows = []
    for b in summary.per_partition:
        rows.append(
            {
                "strategy": strategy,
                "partitions": partitions,
                "partition_index": b.partition,
                "comp_J": b.comp,
                "in_comm_J": b.in_comm,
                "ex_comm_J": b.ex_comm,
                "total_J": b.total,
                "normalized_max": b.total / base,
            }
        )
    worst = summary.per_partition[summary.max_partition - 1]
    rows.append(
        {
            "strategy": strategy,
            "partitions": partitions,
            "partition_index": SUMMARY_INDEX,
            "comp_J": worst.comp,
            "in_comm_J": worst.in_comm,
            "ex_comm_J": worst.ex_comm,
            "total_J": summary.max_energy,
            "normalized_max": summary.normalized_max,
        }
    )
    return rows


def to_csv(rows: Iterable[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row[k]) for k in columns})
    return buf.getvalue()


def to_json(rows: Iterable[dict], columns: Sequence[str]) -> str:
    return json.dumps([{k: row[k] for k in columns} for row in rows], indent=2) + "\n"


def render(rows: list[dict], columns: Sequence[str], fmt: str) -> str:
    if fmt == "csv":
        return to_csv(rows, columns)
    if fmt == "json":
        return to_json(rows, columns)
    raise ValueError(f"unknown format {fmt!r}")


@dataclass(frozen=True)
class SweepRow:
    strategy: str
    device_count: int
    max_energy_J: float
    normalized_max: float
    baseline_single_device_J: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in SWEEP_COLUMNS}


def sweep_rows(rows: Iterable[SweepRow]) -> list[dict]:
    from .partitioner.plans import STRATEGIES

    order = {s: n for n, s in enumerate(STRATEGIES)}
    return [r.as_dict() for r in sorted(rows, key=lambda r: (order[r.strategy], r.device_count))]
