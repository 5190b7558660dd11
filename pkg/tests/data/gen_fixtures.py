"""Regenerate the eval CLI fixtures and golden report.

Writes preds.jsonl / gts.jsonl, runs the eval pipeline on them, checks
the headline numbers against the scalar oracles, and freezes the emitted
report.json as golden_report.json.  Run from the repository root:

    python tests/data/gen_fixtures.py
"""

import json
import math
import sys
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE.parent))

import oracles  # noqa: E402

from contourledger import evaluation, rle_encode, BinaryMask  # noqa: E402
from contourledger.archive import rasterize_contour  # noqa: E402
from contourledger.reporting import write_eval_report  # noqa: E402
from contourledger.records import load_ground_truths, load_predictions  # noqa: E402


def ring(x1, y1, x2, y2):
    return [[x1, y1], [x2, y1], [x2, y2], [x1, y2]]


def main():
    rng = np.random.default_rng(2024)
    gts, preds = [], []
    for i in range(4):
        image_id = f"im{i:02d}"
        for j in range(3):
            cls = int(rng.integers(0, 2))
            x, y = rng.uniform(0.05, 0.55, 2)
            w, h = rng.uniform(0.12, 0.35, 2)
            x2, y2 = min(x + w, 0.95), min(y + h, 0.95)
            gts.append({"image_id": image_id, "class": cls, "polygon": ring(x, y, x2, y2)})
            kind = j % 3
            conf = round(float(rng.uniform(0.55, 0.95)), 4)
            d = round(float(rng.uniform(0.004, 0.02)), 4)
            if kind == 0:
                payload = [round(v, 4) for v in (x + d, y + d, x2 + d, y2 + d)]
                preds.append({"image_id": image_id, "class": cls, "confidence": conf,
                              "route": "R2P", "payload": payload})
            elif kind == 1:
                payload = ring(round(x + d, 4), round(y, 4), round(x2 + d, 4), round(y2, 4))
                preds.append({"image_id": image_id, "class": cls, "confidence": conf,
                              "route": "S2P-Contour", "payload": payload})
            else:
                t = 2 * np.pi * np.arange(64) / 64
                r = min(x2 - x, y2 - y) / 2
                cx, cy = (x + x2) / 2, (y + y2) / 2
                contour = np.stack([cx + r * np.cos(t), cy + r * np.sin(t)], 1)
                mask = rasterize_contour(contour, 160, 160)
                enc = rle_encode(mask)
                preds.append({"image_id": image_id, "class": cls, "confidence": conf,
                              "route": "S2P-Mask",
                              "payload": {"width": enc.width, "height": enc.height,
                                          "runs": enc.runs}})
        # one confident false positive per image
        preds.append({"image_id": image_id, "class": 0, "confidence": 0.99,
                      "route": "R2P", "payload": [0.9, 0.9, 0.99, 0.99]})

    (HERE / "gts.jsonl").write_text("".join(json.dumps(g) + "\n" for g in gts))
    (HERE / "preds.jsonl").write_text("".join(json.dumps(p) + "\n" for p in preds))

    loaded_preds = load_predictions(HERE / "preds.jsonl")
    loaded_gts = load_ground_truths(HERE / "gts.jsonl")
    report = evaluation.evaluate(loaded_preds, loaded_gts)

    # cross-check the R2P AP table against the scalar oracle before freezing
    r2p = [(p, pl) for p, pl in zip(loaded_preds, preds) if pl["route"] == "R2P"]
    for cls in report.classes:
        entries_by_image = {}
        order = 0
        for p, raw in r2p:
            if p.class_id != cls:
                order += 1
                continue
            x1, y1, x2, y2 = [min(max(v, 0.0), 1.0) for v in raw["payload"]]
            box_ring = ring(x1, y1, x2, y2)
            ious = {}
            for gi, g in enumerate(gts):
                if g["image_id"] == p.image_id and g["class"] == cls:
                    ious[gi] = oracles.convex_iou(box_ring, g["polygon"])
            entries_by_image.setdefault(p.image_id, []).append(
                {"conf": p.confidence, "order": order, "cls": cls, "ious": ious})
            order += 1
        n_gt = sum(1 for g in gts if g["class"] == cls)
        conf_flags = []
        for image_id, entries in entries_by_image.items():
            flags, _ = oracles.greedy_flags(entries, None, [0.5])
            for e, f in zip(entries, flags[0.5]):
                conf_flags.append((e["conf"], e["order"], f))
        want = oracles.ap_reference(conf_flags, n_gt)
        got = report.routes["R2P"].ap[cls][0.5]
        assert abs(got - want) < 1e-9, (cls, got, want)

    outdir = HERE / "_golden_build"
    paths = write_eval_report(report, outdir)
    golden = (HERE / "golden_report.json")
    golden.write_bytes(paths["json"].read_bytes())
    print(f"fixtures written; golden mAP@50 per route:",
          {k: round(v.map50, 4) for k, v in report.routes.items()})


if __name__ == "__main__":
    main()
