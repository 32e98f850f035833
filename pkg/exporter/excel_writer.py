"""
Excel Writer - writes metric reports and ablation tables to styled workbooks.
"""

import logging
from pathlib import Path
from typing import Optional

import openpyxl
import pandas as pd
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter

from models import MetricReport

logger = logging.getLogger(__name__)

HEADER_FONT = Font(bold=True, color="FFFFFF")
REPORT_FILL = PatternFill(start_color="4472C4", end_color="4472C4", fill_type="solid")
ABLATION_FILL = PatternFill(start_color="ED7D31", end_color="ED7D31", fill_type="solid")
MISSING_FILL = PatternFill(start_color="D9D9D9", end_color="D9D9D9", fill_type="solid")
THIN_BORDER = Border(
    left=Side(style="thin"),
    right=Side(style="thin"),
    top=Side(style="thin"),
    bottom=Side(style="thin"),
)
MISSING = "—"


class ExcelWriter:
    """Writes evaluation outputs into .xlsx files with a styled header row."""

    def __init__(self, output_folder: str | Path):
        self.output_folder = Path(output_folder)
        self.output_folder.mkdir(parents=True, exist_ok=True)

    def write_report(self, report: MetricReport, output_filename: str = "report.xlsx", title: str = "Metrics") -> str:
        """
        Write a MetricReport as a two-column sheet (Metric, Value).

        Numeric cells hold numbers; metrics of untrained tasks hold the missing marker.

        Returns:
            Path to the output file.
        """
        output_path = self.output_folder / output_filename
        wb = openpyxl.Workbook()
        ws = wb.active
        ws.title = title

        self._write_header(ws, ["Metric", "Value"], REPORT_FILL)
        for i, (label, value) in enumerate(report.to_rows(), start=2):
            self._write_row(ws, i, [label, _as_number(value)])
        self._set_widths(ws, [18, 14])

        wb.save(str(output_path))
        wb.close()
        logger.info(f"Report workbook saved to: {output_path}")
        return str(output_path)

    def write_table(
        self,
        table: pd.DataFrame,
        output_filename: str = "ablation.xlsx",
        title: str = "Ablation",
        numeric_columns: Optional[list[str]] = None,
    ) -> str:
        """
        Write a DataFrame (e.g. the ablation table) with one styled header row.

        Numeric-looking strings in numeric_columns (default: all columns) are stored as numbers.
        """
        output_path = self.output_folder / output_filename
        wb = openpyxl.Workbook()
        ws = wb.active
        ws.title = title

        headers = [str(c) for c in table.columns]
        self._write_header(ws, headers, ABLATION_FILL)
        convert = [numeric_columns is None or h in numeric_columns for h in headers]
        for i, record in enumerate(table.itertuples(index=False), start=2):
            self._write_row(ws, i, [_as_number(v) if c else v for v, c in zip(record, convert)])
        self._set_widths(ws, [max(10, len(h) + 4) for h in headers])

        wb.save(str(output_path))
        wb.close()
        logger.info(f"Table with {len(table)} rows saved to: {output_path}")
        return str(output_path)

    @staticmethod
    def _write_header(ws, headers: list[str], fill: PatternFill):
        for col, header in enumerate(headers, start=1):
            cell = ws.cell(row=1, column=col, value=header)
            cell.font = HEADER_FONT
            cell.fill = fill
            cell.border = THIN_BORDER
            cell.alignment = Alignment(horizontal="center", wrap_text=True)
        ws.freeze_panes = "A2"

    @staticmethod
    def _write_row(ws, row: int, values: list):
        for col, value in enumerate(values, start=1):
            cell = ws.cell(row=row, column=col, value=value)
            cell.border = THIN_BORDER
            cell.alignment = Alignment(horizontal="left" if col == 1 else "right", vertical="top")
            if value == MISSING:
                cell.fill = MISSING_FILL

    @staticmethod
    def _set_widths(ws, widths: list[int]):
        for col, width in enumerate(widths, start=1):
            ws.column_dimensions[get_column_letter(col)].width = width


def _as_number(value):
    """Numeric strings become numbers so the sheet stays sortable."""
    if not isinstance(value, str):
        return value
    try:
        number = float(value)
    except ValueError:
        return value
    return int(number) if number.is_integer() and "." not in value else number
