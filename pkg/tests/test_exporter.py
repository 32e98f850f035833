import numpy as np
import openpyxl
import pandas as pd
import pytest

from exporter.excel_writer import ExcelWriter
from exporter.render import (
    CLASS_PALETTE,
    EXTRA_COLORS,
    RAMP_ANCHORS,
    class_colors,
    colorize_classes,
    colorize_disparity,
    read_prediction,
    write_prediction,
)
from exporter.report_writer import format_report, read_loss_curve, read_report, write_loss_curve, write_report
from models import MetricReport


@pytest.fixture()
def report():
    return MetricReport(
        epe=1.25,
        d1_error=8.5,
        per_class_iou=[0.9, 0.5, float("nan"), 0.25, 0.75],
        miou=0.6,
        miou3=0.55,
        valid_pixel_count=4096,
        pixel_accuracy=0.93,
    )


def test_report_rows(report):
    rows = report.to_rows()
    assert rows[0] == ("D1-Error", "8.500")
    assert rows[1] == ("EPE", "1.250")
    assert rows[2] == ("Ground", "90.00")
    assert rows[4] == ("Building", "—")
    assert rows[-3:] == [("mIoU", "60.00"), ("mIoU-3", "55.00"), ("Valid Pixels", "4096")]


def test_text_report_round_trip(report, tmp_path):
    path = write_report(report, tmp_path / "out" / "report.txt")
    assert read_report(path) == report.to_rows()
    lines = format_report(report).splitlines()
    assert len(lines) == 10
    assert len({line.index("=") for line in lines}) == 1


def test_loss_curve_round_trip(tmp_path):
    records = [{"step": i, "total": 1.0 / i, "disp_part": 0.6 / i, "sem_part": 0.4 / i} for i in range(1, 6)]
    path = write_loss_curve(records, tmp_path / "curve.csv")
    curve = read_loss_curve(path)
    assert list(curve.columns) == ["step", "total", "disp_part", "sem_part"]
    assert curve["step"].tolist() == [1, 2, 3, 4, 5]
    np.testing.assert_allclose(curve["total"], [r["total"] for r in records], rtol=1e-8)


def test_workbook_report(report, tmp_path):
    path = ExcelWriter(tmp_path).write_report(report)
    sheet = openpyxl.load_workbook(path).active
    rows = list(sheet.iter_rows(values_only=True))
    assert rows[0] == ("Metric", "Value")
    assert len(rows) == 1 + 10
    assert rows[1] == ("D1-Error", 8.5)
    assert rows[3] == ("Tree", 50)
    assert rows[5] == ("Building", "—")
    assert rows[-1] == ("Valid Pixels", 4096)
    assert sheet.freeze_panes == "A2"


def test_workbook_table_keeps_non_numeric_columns_as_text(tmp_path):
    table = pd.DataFrame([{"Variant": "Full", "EPE": "1.250", "Config Hash": "123e4567"}])
    path = ExcelWriter(tmp_path).write_table(table, numeric_columns=["EPE"])
    rows = list(openpyxl.load_workbook(path).active.iter_rows(values_only=True))
    assert rows[0] == ("Variant", "EPE", "Config Hash")
    assert rows[1] == ("Full", 1.25, "123e4567")


def test_class_palette_is_fixed():
    table = class_colors()
    assert table[:5].tolist() == [[170, 120, 60], [40, 160, 40], [200, 40, 40], [40, 90, 210], [230, 200, 40]]
    assert np.array_equal(table[:5], CLASS_PALETTE)
    assert table[5].tolist() == EXTRA_COLORS[0].tolist()
    assert table[255].tolist() == [0, 0, 0]
    rgb = colorize_classes(np.array([[0, 4], [255, 2]]))
    assert rgb.shape == (2, 2, 3) and rgb.dtype == np.uint8
    assert rgb[1, 0].tolist() == [0, 0, 0]


def test_out_of_range_labels_raise():
    with pytest.raises(ValueError):
        colorize_classes(np.array([[256]]))


def test_disparity_ramp_endpoints():
    rgb = colorize_disparity(np.array([[-16.0, 16.0, np.nan, 100.0, -40.0]]), -16, 16)
    assert rgb[0, 0].tolist() == RAMP_ANCHORS[0].astype(int).tolist()
    assert rgb[0, 1].tolist() == RAMP_ANCHORS[-1].astype(int).tolist()
    assert rgb[0, 2].tolist() == [0, 0, 0]
    assert rgb[0, 3].tolist() == rgb[0, 1].tolist()
    assert rgb[0, 4].tolist() == rgb[0, 0].tolist()


def test_prediction_files_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    disparity = rng.uniform(-16, 16, (24, 40)).astype(np.float32)
    classes = rng.integers(0, 5, (24, 40))
    paths = write_prediction(disparity, classes, tmp_path, -16, 16)
    assert sorted(paths) == ["classes", "classes_color", "disparity", "disparity_color"]
    disp_back, classes_back = read_prediction(tmp_path)
    assert np.array_equal(disp_back, disparity)
    assert np.array_equal(classes_back, classes)
