"""
Report Writer - plain-text metric reports and CSV loss curves.
"""

import logging
from pathlib import Path

import pandas as pd

from models import MetricReport

logger = logging.getLogger(__name__)

LOSS_CURVE_COLUMNS = ["step", "total", "disp_part", "sem_part"]


def format_report(report: MetricReport) -> str:
    """One 'label = value' line per report row."""
    rows = report.to_rows()
    width = max(len(label) for label, _ in rows)
    return "".join(f"{label:<{width}} = {value}\n" for label, value in rows)


def write_report(report: MetricReport, path: str | Path) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_report(report), encoding="utf-8")
    logger.info(f"Report saved to: {path}")
    return str(path)


def read_report(path: str | Path) -> list[tuple[str, str]]:
    """Rows of a written report, in order."""
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        label, _, value = line.partition(" = ")
        rows.append((label.rstrip(), value.strip()))
    return rows


def write_loss_curve(records: list[dict], path: str | Path) -> str:
    """
    Write per-step losses as CSV.

    Args:
        records: Dicts with keys step, total, disp_part, sem_part.
        path: Output CSV path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame.from_records(records, columns=LOSS_CURVE_COLUMNS)
    frame.to_csv(path, index=False, float_format="%.9g")
    logger.info(f"Loss curve ({len(frame)} steps) saved to: {path}")
    return str(path)


def read_loss_curve(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path)
