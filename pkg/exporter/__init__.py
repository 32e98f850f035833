"""Exporter package: text reports, loss curves, spreadsheets and rendered predictions."""

from exporter.excel_writer import ExcelWriter
from exporter.render import colorize_classes, colorize_disparity, read_prediction, write_prediction
from exporter.report_writer import format_report, read_loss_curve, read_report, write_loss_curve, write_report

__all__ = [
    "ExcelWriter",
    "colorize_classes",
    "colorize_disparity",
    "read_prediction",
    "write_prediction",
    "format_report",
    "read_loss_curve",
    "read_report",
    "write_loss_curve",
    "write_report",
]
