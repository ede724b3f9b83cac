"""Metric report files: a CSV with the three report columns and a matching text table."""
import csv
import io
from pathlib import Path

from .metrics import REPORT_COLUMNS, MetricsReport


def metrics_csv(report: MetricsReport, name="model") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name"] + list(REPORT_COLUMNS))
    row = report.row()
    w.writerow([name] + [f"{row[c]:.6f}" for c in REPORT_COLUMNS])
    return buf.getvalue()


def metrics_text(report: MetricsReport, name="model") -> str:
    row = report.row()
    lines = [f"{'name':<12} " + " ".join(f"{c:>10}" for c in REPORT_COLUMNS),
             f"{name:<12} " + " ".join(f"{row[c]:>10.4f}" for c in REPORT_COLUMNS),
             f"transitions evaluated: {report.n_samples}; categories: {report.n_categories}; "
             f"config digest: {report.config_digest}"]
    return "\n".join(lines) + "\n"


def write_metrics_report(report: MetricsReport, out_dir, name="model"):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "metrics.csv").write_text(metrics_csv(report, name))
    (out_dir / "metrics.txt").write_text(metrics_text(report, name))
    return out_dir / "metrics.csv"
