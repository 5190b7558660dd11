import json
from pathlib import Path

import numpy as np
import pytest

from contourledger.cli import main
from contourledger.records import load_descriptor, load_polygon_points, save_polygon_points

DATA = Path(__file__).parent / "data"


def circle_file(tmp_path, r=0.2, q=64):
    t = 2 * np.pi * np.arange(q) / q
    pts = np.stack([0.5 + r * np.cos(t), 0.5 + r * np.sin(t)], 1)
    path = tmp_path / "circle.json"
    save_polygon_points(pts, path)
    return path


class TestFitCommand:
    def test_circle_order_one(self, tmp_path, capsys):
        out = tmp_path / "desc.json"
        code = main(["fit", str(circle_file(tmp_path)), "--order", "1", "--out", str(out)])
        assert code == 0
        desc = load_descriptor(out)
        # the fit sees the arc-length-resampled 64-gon, not the ideal circle
        assert desc.harmonics[0][0] == pytest.approx(0.2, abs=2e-3)
        assert desc.harmonics[0][3] == pytest.approx(0.2, abs=2e-3)
        assert "payload_hex" in json.loads(out.read_text())

    def test_degenerate_input_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        save_polygon_points([[0.0, 0.0], [1.0, 1.0]], bad)
        code = main(["fit", str(bad), "--out", str(tmp_path / "x.json")])
        assert code == 2
        assert "dropped" in capsys.readouterr().err

    def test_default_flags(self, tmp_path):
        out = tmp_path / "desc.json"
        assert main(["fit", str(circle_file(tmp_path)), "--out", str(out)]) == 0
        assert load_descriptor(out).order == 16


class TestReconstructCommand:
    def test_round_trip(self, tmp_path):
        desc_path = tmp_path / "d.json"
        main(["fit", str(circle_file(tmp_path)), "--order", "4", "--out", str(desc_path)])
        poly_path = tmp_path / "p.json"
        assert main(["reconstruct", str(desc_path), "--samples", "128",
                     "--out", str(poly_path)]) == 0
        pts = load_polygon_points(poly_path)
        assert pts.shape == (128, 2)
        radii = np.hypot(pts[:, 0] - 0.5, pts[:, 1] - 0.5)
        assert np.allclose(radii, 0.2, atol=2e-3)
        assert np.std(radii) < 1e-4

    def test_truncation_flag(self, tmp_path):
        desc_path = tmp_path / "d.json"
        main(["fit", str(circle_file(tmp_path)), "--order", "8", "--out", str(desc_path)])
        out = tmp_path / "p.json"
        assert main(["reconstruct", str(desc_path), "--order", "2", "--out", str(out)]) == 0
        assert main(["reconstruct", str(desc_path), "--order", "9", "--out", str(out)]) == 2


class TestAlignCommand:
    def test_align_files(self, tmp_path):
        gt_path, pred_path = tmp_path / "gt.json", tmp_path / "pred.json"
        main(["fit", str(circle_file(tmp_path)), "--order", "4", "--out", str(gt_path)])
        main(["fit", str(circle_file(tmp_path)), "--order", "4", "--out", str(pred_path)])
        out = tmp_path / "aligned.json"
        assert main(["align", "--gt", str(gt_path), "--pred", str(pred_path),
                     "--out", str(out)]) == 0
        aligned = load_descriptor(out)
        gt = load_descriptor(gt_path)
        assert np.allclose(aligned.vector, gt.vector, atol=1e-9)


class TestEvalCommand:
    def test_fixture_matches_golden_byte_for_byte(self, tmp_path, capsys):
        out = tmp_path / "report"
        code = main(["eval", "--preds", str(DATA / "preds.jsonl"),
                     "--gts", str(DATA / "gts.jsonl"), "--out", str(out)])
        assert code == 0
        assert (out / "report.json").read_bytes() == (DATA / "golden_report.json").read_bytes()
        assert (out / "report.csv").exists()
        assert (out / "figures" / "eval_summary.png").exists()
        printed = capsys.readouterr().out
        assert "mAP@50" in printed

    def test_deterministic(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            main(["eval", "--preds", str(DATA / "preds.jsonl"),
                  "--gts", str(DATA / "gts.jsonl"), "--out", str(out)])
            outs.append((out / "report.json").read_bytes())
        assert outs[0] == outs[1]

    def test_schema_violation_exits_2_with_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"image_id": "a", "class": 0, "confidence": 0.5, '
                       '"route": "R2P", "payload": [0.1, 0.1, 0.4, 0.4]}\n'
                       '{"image_id": "a", "class": 0}\n')
        code = main(["eval", "--preds", str(bad), "--gts", str(DATA / "gts.jsonl"),
                     "--out", str(tmp_path / "r")])
        assert code == 2
        assert "line 2" in capsys.readouterr().err

    def test_route_filter_and_conf_floor(self, tmp_path, capsys):
        out = tmp_path / "r"
        code = main(["eval", "--preds", str(DATA / "preds.jsonl"),
                     "--gts", str(DATA / "gts.jsonl"), "--routes", "R2P",
                     "--conf-floor", "0.6", "--out", str(out)])
        assert code == 0
        doc = json.loads((out / "report.json").read_text())
        assert list(doc["raw"]["routes"]) == ["R2P"]


class TestBenchCommand:
    def test_small_bench(self, tmp_path, capsys):
        out = tmp_path / "bench"
        code = main(["bench", "--db", str(tmp_path / "b.db"), "--out", str(out),
                     "--images", "2", "--image-size", "224", "--trials", "1",
                     "--warmup", "0", "--routes", "Native-Fourier,Poly-256"])
        assert code == 0
        doc = json.loads((out / "bench.json").read_text())
        assert doc["routes"]["Native-Fourier"]["payload_per_defect"] == 132.0
        assert doc["routes"]["Poly-256"]["payload_per_defect"] == 1024.0
        assert (out / "bench.csv").exists()
        assert (out / "figures" / "route_costs.png").exists()

    def test_unknown_route_exits_2(self, tmp_path):
        assert main(["bench", "--db", str(tmp_path / "b.db"),
                     "--out", str(tmp_path / "o"), "--routes", "Nope"]) == 2

    def test_write_images(self, tmp_path):
        imgdir = tmp_path / "imgs"
        main(["bench", "--db", str(tmp_path / "b.db"), "--out", str(tmp_path / "o"),
              "--images", "1", "--image-size", "160", "--trials", "1", "--warmup", "0",
              "--routes", "Native-Fourier", "--write-images", str(imgdir)])
        assert (imgdir / "img_0000.png").exists()
