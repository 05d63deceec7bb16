"""Run CSV schema and comparison tables.

An ATPG run writes one row per fault: ``fault,status,backtracks,
backtrace_steps,decisions``.  The report command aggregates a focus run
against one or more baseline runs over the same fault universe; every
table number is recomputable from the raw per-fault rows.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .podem import ABORTED, DETECTED, UNTESTABLE, AtpgResult, RunMetrics

RUN_HEADER = ["fault", "status", "backtracks", "backtrace_steps", "decisions"]

REPORT_HEADER = [
    "method", "b_track", "b_trace", "red1_pct", "red2_pct",
    "ud_fault", "untestable", "aborted", "ufp_pct", "diff", "imp_pct",
    "decisions", "decision_ratio", "ffr_avg_depth",
]


class ReportError(ValueError):
    pass


def write_run_csv(path_or_file, netlist, results: list[AtpgResult]) -> None:
    close = False
    if isinstance(path_or_file, str):
        path_or_file = open(path_or_file, "w", newline="")
        close = True
    try:
        w = csv.writer(path_or_file)
        w.writerow(RUN_HEADER)
        from .faults import format_fault

        for r in results:
            w.writerow([format_fault(netlist, r.fault), r.status,
                        r.backtracks, r.backtrace_steps, r.decisions])
    finally:
        if close:
            path_or_file.close()


@dataclass
class RunSummary:
    label: str
    faults: frozenset[str]
    metrics: RunMetrics


def read_run_csv(path: str, label: str | None = None) -> RunSummary:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != RUN_HEADER:
        raise ReportError(f"{path}: run file schema mismatch "
                          f"(header {rows[0] if rows else 'missing'!r}, want {RUN_HEADER})")
    metrics = RunMetrics()
    faults = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(RUN_HEADER):
            raise ReportError(f"{path}:{lineno}: bad column count")
        fault, status, bt, steps, dec = row
        if status not in (DETECTED, UNTESTABLE, ABORTED):
            raise ReportError(f"{path}:{lineno}: unknown status {status!r}")
        faults.append(fault)
        metrics.total += 1
        if status == DETECTED:
            metrics.detected += 1
        elif status == UNTESTABLE:
            metrics.untestable += 1
        else:
            metrics.aborted += 1
        metrics.backtracks += int(bt)
        metrics.backtrace_steps += int(steps)
        metrics.decisions += int(dec)
    if label is None:
        label = path.rsplit("/", 1)[-1].removesuffix(".csv")
    return RunSummary(label, frozenset(faults), metrics)


def _pct_reduction(baseline: float, focus: float) -> float:
    return 100.0 * (baseline - focus) / baseline if baseline else 0.0


def build_report(focus: RunSummary, baselines: list[RunSummary],
                 ffr_avg_depth: float | None = None) -> str:
    """Comparison table: focus row first, then one row per baseline."""
    for b in baselines:
        if b.faults != focus.faults:
            raise ReportError(
                f"run files cover different fault universes: {focus.label} vs {b.label}")
    depth = f"{ffr_avg_depth:.2f}" if ffr_avg_depth is not None else ""
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(REPORT_HEADER)
    fm = focus.metrics
    w.writerow([focus.label, fm.backtracks, fm.backtrace_steps, "", "",
                fm.undetected, fm.untestable, fm.aborted, f"{fm.ufp:.4f}",
                "", "", fm.decisions, "", depth])
    for b in baselines:
        bm = b.metrics
        ratio = bm.decisions / fm.decisions if fm.decisions else 0.0
        w.writerow([
            b.label, bm.backtracks, bm.backtrace_steps,
            f"{_pct_reduction(bm.backtracks, fm.backtracks):.2f}",
            f"{_pct_reduction(bm.backtrace_steps, fm.backtrace_steps):.2f}",
            bm.undetected, bm.untestable, bm.aborted, f"{bm.ufp:.4f}",
            bm.undetected - fm.undetected,
            f"{_pct_reduction(bm.ufp, fm.ufp):.2f}",
            bm.decisions, f"{ratio:.4f}", depth,
        ])
    return out.getvalue()
