"""Descriptive statistics over repeated targets.

The same target string often appears in several instances with different
gold scores. This report tabulates how often targets repeat (occurrence
buckets 1..5 and 6+, as percentages of distinct targets) and how far the
gold scores of a repeated target spread (range = max - min, with mean and
deciles), plus a histogram figure of those ranges.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataError
from .features import TargetInstance

OCCURRENCE_BUCKETS = ("1", "2", "3", "4", "5", "6+")
DECILES = (10, 20, 30, 40, 50, 60, 70, 80, 90)


@dataclass(frozen=True)
class RepetitionReport:
    total_distinct: int
    occurrence_pct: dict[str, float]        # bucket -> % of distinct targets
    repeated_count: int                     # distinct targets seen >= 2 times
    mean_range: Optional[float]             # None when nothing repeats
    range_deciles: Optional[tuple[float, ...]]  # 10th..90th percentiles
    ranges: tuple[float, ...]               # one per repeated target


def repetition_report(instances: Sequence[TargetInstance]) -> RepetitionReport:
    """Group instances by exact target string and tabulate repetitions."""
    if not instances:
        raise DataError("repetition report needs at least one instance")
    if any(inst.gold is None for inst in instances):
        raise DataError("repetition report needs gold scores on every instance")

    golds_by_target: dict[str, list[float]] = defaultdict(list)
    for inst in instances:
        golds_by_target[" ".join(inst.target)].append(inst.gold)

    total = len(golds_by_target)
    bucket_counts = {b: 0 for b in OCCURRENCE_BUCKETS}
    ranges: list[float] = []
    for golds in golds_by_target.values():
        bucket = str(len(golds)) if len(golds) <= 5 else "6+"
        bucket_counts[bucket] += 1
        if len(golds) >= 2:
            ranges.append(max(golds) - min(golds))

    occurrence_pct = {b: 100.0 * c / total for b, c in bucket_counts.items()}
    mean_range = float(np.mean(ranges)) if ranges else None
    deciles = (tuple(float(v) for v in np.percentile(ranges, DECILES))
               if ranges else None)
    return RepetitionReport(
        total_distinct=total,
        occurrence_pct=occurrence_pct,
        repeated_count=len(ranges),
        mean_range=mean_range,
        range_deciles=deciles,
        ranges=tuple(ranges),
    )


def repetition_to_tsv(report: RepetitionReport) -> str:
    """Flat metric/key/value rows; percentages keyed by occurrence bucket."""
    lines = ["metric\tkey\tvalue"]
    lines.append(f"distinct_targets\t\t{report.total_distinct}")
    for bucket in OCCURRENCE_BUCKETS:
        lines.append(f"occurrence_pct\t{bucket}\t{report.occurrence_pct[bucket]!r}")
    lines.append(f"repeated_targets\t\t{report.repeated_count}")
    if report.mean_range is not None:
        lines.append(f"mean_range\t\t{report.mean_range!r}")
        for pct, value in zip(DECILES, report.range_deciles):
            lines.append(f"range_decile\t{pct}\t{value!r}")
    return "\n".join(lines) + "\n"


def render_repetition_figure(report: RepetitionReport, path: str) -> None:
    """Histogram of gold-score ranges over repeated targets, written to a file."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    if report.ranges:
        ax.hist(report.ranges, bins=20, edgecolor="black", linewidth=0.5)
        ax.axvline(report.mean_range, linestyle="--", color="black",
                   label=f"mean = {report.mean_range:.3f}")
        ax.legend()
    ax.set_xlabel("gold score range (max - min per repeated target)")
    ax.set_ylabel("repeated targets")
    ax.set_title(f"Score spread over {report.repeated_count} repeated targets")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
