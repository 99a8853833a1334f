"""Rendering of experiment reports, per-suite summaries and outcome histograms"""
import csv
import io
from typing import Any, Dict, List, Sequence

from errors import ConfigError
from utils import dump_json, load_json

REPORT_COLUMNS = ("suite", "label", "kind", "residual", "tolerance", "pass")
SUMMARY_COLUMNS = ("suite", "passed", "failed", "max_residual")


def _csv_text(header: Sequence[str], rows: List[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _suite_of(report: Dict[str, Any]) -> str:
    return report.get("suite") or report.get("kind", "run")


def render_reports(reports: List[Dict[str, Any]], fmt: str) -> str:
    """JSON is the stable format; text is for people and may change"""
    if fmt == "json":
        return dump_json(reports)
    if fmt == "csv":
        rows = [
            (_suite_of(r), r["label"], r["kind"], repr(r["residual"]), repr(r["tolerance"]),
             "true" if r["pass"] else "false")
            for r in reports
        ]
        return _csv_text(REPORT_COLUMNS, rows)
    if fmt == "text":
        lines = []
        for r in reports:
            status = "PASS" if r["pass"] else "FAIL"
            lines.append(f"{status} {r['label']}: residual {r['residual']:.3e} (tolerance {r['tolerance']:.1e})")
        return "\n".join(lines) + "\n"
    raise ConfigError(f"Unknown report format {fmt!r}")


def load_reports(path: str) -> List[Dict[str, Any]]:
    """Reads reports written by ``verify`` (a list) or ``run`` (a single report)"""
    try:
        data = load_json(path)
    except (OSError, ValueError) as e:
        raise ConfigError(f"Cannot read reports from {path}: {e}") from e
    reports = data if isinstance(data, list) else [data]
    for i, report in enumerate(reports):
        if not isinstance(report, dict) or not {"label", "kind", "residual", "pass"} <= set(report):
            raise ConfigError(f"Entry {i} of {path} is not an experiment report")
    return reports


def summarize(reports: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Pass/fail counts and worst residual per suite, in order of first appearance"""
    rows: Dict[str, Dict[str, Any]] = {}
    for report in reports:
        suite = _suite_of(report)
        row = rows.setdefault(suite, {"suite": suite, "passed": 0, "failed": 0, "max_residual": 0.0})
        row["passed" if report["pass"] else "failed"] += 1
        row["max_residual"] = max(row["max_residual"], abs(float(report["residual"])))
    return list(rows.values())


def failing_labels(reports: List[Dict[str, Any]]) -> List[str]:
    return [r["label"] for r in reports if not r["pass"]]


def render_summary(reports: List[Dict[str, Any]], fmt: str) -> str:
    summary = summarize(reports)
    failures = failing_labels(reports)
    if fmt == "json":
        return dump_json({"suites": summary, "failures": failures, "total_failures": len(failures)})
    if fmt == "csv":
        rows = [(s["suite"], s["passed"], s["failed"], repr(s["max_residual"])) for s in summary]
        return _csv_text(SUMMARY_COLUMNS, rows)
    if fmt == "text":
        width = max([len("suite")] + [len(s["suite"]) for s in summary])
        lines = [f"{'suite':<{width}}  passed  failed  max_residual"]
        for s in summary:
            lines.append(f"{s['suite']:<{width}}  {s['passed']:>6}  {s['failed']:>6}  {s['max_residual']:.3e}")
        lines.append(f"{len(failures)} failures")
        lines.extend(f"FAILED {label}" for label in failures)
        return "\n".join(lines) + "\n"
    raise ConfigError(f"Unknown report format {fmt!r}")


def histogram_csv(counts: Sequence[int]) -> str:
    return _csv_text(("outcome_index", "count"), [(k, int(c)) for k, c in enumerate(counts)])
