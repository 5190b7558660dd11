import csv
import json

import pytest

from contourledger.archive import BenchReport, fair_metrics
from contourledger.evaluation import GroundTruth, Prediction, ROUTE_CONTOUR, evaluate
from contourledger.geometry import PolygonShape
from contourledger.reporting import (
    bench_report_dict,
    eval_report_dict,
    write_bench_report,
    write_eval_report,
)


def square_ring(x1, y1, x2, y2):
    return [[x1, y1], [x2, y1], [x2, y2], [x1, y2]]


@pytest.fixture(scope="module")
def small_report():
    gts = [GroundTruth("a", 0, PolygonShape.from_ring(square_ring(0.2, 0.2, 0.6, 0.6)))]
    preds = [Prediction("a", 0, 0.9, ROUTE_CONTOUR,
                        square_ring(0.204, 0.2, 0.604, 0.6))]
    return evaluate(preds, gts, routes=[ROUTE_CONTOUR])


class TestEvalReportScaling:
    def test_display_scales(self, small_report):
        doc = eval_report_dict(small_report)
        raw = doc["raw"]["routes"][ROUTE_CONTOUR]
        disp = doc["display"]["routes"][ROUTE_CONTOUR]
        assert disp["map50"] == pytest.approx(raw["map50"] * 100)
        assert disp["b_f1"] == pytest.approx(raw["quality_micro"]["b_f1"] * 100)
        assert disp["cd"] == pytest.approx(raw["quality_micro"]["chamfer"] * 1000)
        assert disp["p_err"] == pytest.approx(raw["quality_micro"]["p_err"] * 100)
        assert disp["a_err"] == pytest.approx(raw["quality_micro"]["a_err"] * 100)

    def test_example_magnitudes(self):
        # the table convention: 0.00423 displays as 4.23, 0.4885 as 48.85
        assert 0.00423 * 1000 == pytest.approx(4.23)
        assert 0.4885 * 100 == pytest.approx(48.85)

    def test_raw_section_carries_unscaled(self, small_report):
        doc = eval_report_dict(small_report)
        raw = doc["raw"]["routes"][ROUTE_CONTOUR]
        assert 0.0 <= raw["map50"] <= 1.0
        assert raw["quality_micro"]["chamfer"] < 0.05

    def test_written_files(self, small_report, tmp_path):
        paths = write_eval_report(small_report, tmp_path / "out")
        doc = json.loads(paths["json"].read_text())
        assert "raw" in doc and "display" in doc and "protocol" in doc
        with open(paths["csv"]) as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:4] == ["route", "class", "map50", "map50_95"]
        assert rows[1][0] == ROUTE_CONTOUR and rows[1][1] == "all"
        assert paths["figure"].exists()


class TestBenchReportLayout:
    def test_table_shape(self, tmp_path):
        metrics = [fair_metrics("Native-Fourier", 40, 10, 1.0, 0.5, 3.0, 0.2, 132.0, 480.0),
                   fair_metrics("Poly-256", 40, 10, 9.0, 0.5, 12.0, 0.1, 1024.0, 1350.0)]
        report = BenchReport(metrics, 10, 3, 1, 0.0, "x.db")
        doc = bench_report_dict(report)
        assert doc["routes"]["Native-Fourier"]["payload_per_defect"] == 132.0
        paths = write_bench_report(report, tmp_path / "bench")
        with open(paths["csv"]) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["Metric", "Native-Fourier", "Poly-256"]
        labels = [r[0] for r in rows[1:]]
        assert "Payload / defect (B)" in labels
        assert "Route-to-usable / defect (ms, excl. infer)" in labels
        assert "Route throughput (defects/s, excl. infer)" in labels
        assert paths["figure"].exists()
