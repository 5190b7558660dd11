"""Report writers: JSON, CSV, and rendered figures.

The JSON carries raw (unscaled) values under "raw" plus a "display"
section using the conventional table scaling: mAP, B-F1, P-Err, and
A-Err multiplied by 100, Chamfer distance by 1000.  CSV files mirror the
display layout.  Each report path also renders a summary figure next to
the delimited output.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .archive import BenchReport  # noqa: E402
from .evaluation import EvalReport  # noqa: E402

PCT = 100.0
CD_SCALE = 1000.0


def _scaled(value, factor):
    return None if value is None else value * factor


def eval_report_dict(report: EvalReport) -> dict:
    routes_raw = {}
    routes_display = {}
    for name, rr in report.routes.items():
        routes_raw[name] = {
            "n_predictions": rr.n_preds,
            "n_dropped": rr.n_dropped,
            "n_ground_truths": rr.n_gts,
            "n_matched_quality_pairs": rr.n_matched_quality,
            "ap_per_class": {str(c): {f"{t:.2f}": v for t, v in row.items()}
                             for c, row in rr.ap.items()},
            "map50": rr.map50,
            "map50_95": rr.map5095,
            "quality_micro": dict(rr.quality_micro),
            "quality_per_class": {m: {str(c): v for c, v in d.items()}
                                  for m, d in rr.quality_per_class.items()},
        }
        routes_display[name] = {
            "map50": rr.map50 * PCT,
            "map50_95": rr.map5095 * PCT,
            "b_f1": _scaled(rr.quality_micro["b_f1"], PCT),
            "cd": _scaled(rr.quality_micro["chamfer"], CD_SCALE),
            "p_err": _scaled(rr.quality_micro["p_err"], PCT),
            "a_err": _scaled(rr.quality_micro["a_err"], PCT),
        }
    return {
        "protocol": {
            "iou_thresholds": list(report.thresholds),
            "quality_tau": report.quality_tau,
            "boundary_tolerance": report.boundary_tolerance,
            "classes": report.classes,
            "n_images": report.n_images,
        },
        "raw": {"routes": routes_raw},
        "display": {
            "scaling": {"map": PCT, "b_f1": PCT, "cd": CD_SCALE, "p_err": PCT, "a_err": PCT},
            "routes": routes_display,
        },
    }


def write_eval_report(report: EvalReport, outdir) -> dict[str, Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    doc = eval_report_dict(report)
    json_path = outdir / "report.json"
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    csv_path = outdir / "report.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["route", "class", "map50", "map50_95",
                         "b_f1_x100", "cd_x1000", "p_err_x100", "a_err_x100"])
        for name, rr in report.routes.items():
            disp = doc["display"]["routes"][name]
            writer.writerow([name, "all"] + [_fmt(disp[k]) for k in
                                             ("map50", "map50_95", "b_f1", "cd", "p_err", "a_err")])
            for c in sorted(rr.ap):
                row = rr.ap[c]
                ap5095 = sum(row.values()) / len(row)
                writer.writerow([
                    name, c, _fmt(row[report.quality_tau] * PCT), _fmt(ap5095 * PCT),
                    _fmt(_scaled(rr.quality_per_class["b_f1"].get(c), PCT)),
                    _fmt(_scaled(rr.quality_per_class["chamfer"].get(c), CD_SCALE)),
                    _fmt(_scaled(rr.quality_per_class["p_err"].get(c), PCT)),
                    _fmt(_scaled(rr.quality_per_class["a_err"].get(c), PCT)),
                ])
    fig_path = outdir / "figures" / "eval_summary.png"
    _render_eval_figure(report, fig_path)
    return {"json": json_path, "csv": csv_path, "figure": fig_path}


def _fmt(value):
    return "" if value is None else f"{value:.4f}"


def _render_eval_figure(report: EvalReport, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(report.routes)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    x = range(len(names))
    ax1.bar([i - 0.2 for i in x], [report.routes[n].map50 * PCT for n in names],
            width=0.4, label="mAP@50")
    ax1.bar([i + 0.2 for i in x], [report.routes[n].map5095 * PCT for n in names],
            width=0.4, label="mAP@50:95")
    ax1.set_xticks(list(x), names, rotation=20)
    ax1.set_ylabel("mAP (%)")
    ax1.set_title("Polygon-space mAP by route")
    ax1.legend()
    metrics = [("b_f1", PCT, "B-F1 x100"), ("chamfer", CD_SCALE, "CD x1000"),
               ("p_err", PCT, "P-Err x100"), ("a_err", PCT, "A-Err x100")]
    width = 0.8 / len(metrics)
    for k, (key, factor, label) in enumerate(metrics):
        vals = [(report.routes[n].quality_micro[key] or 0.0) * factor for n in names]
        ax2.bar([i + (k - 1.5) * width for i in x], vals, width=width, label=label)
    ax2.set_xticks(list(x), names, rotation=20)
    ax2.set_title("Matched-TP quality (micro)")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


# ---------------------------------------------------------------------------
# Benchmark report
# ---------------------------------------------------------------------------

_BENCH_COLUMNS = [
    ("n_pred", "#Pred"),
    ("density", "Defects/image"),
    ("payload_per_defect", "Payload / defect (B)"),
    ("record_per_defect", "Record / defect (B)"),
    ("t_arch_route", "Archive route overhead / defect (ms, excl. infer)"),
    ("t_usable_raw", "Raw recovery-to-usable / defect (ms)"),
    ("t_usable_ex", "Route-to-usable / defect (ms, excl. infer)"),
    ("t_usable_in", "Route-to-usable / defect (ms, incl. infer)"),
    ("throughput", "Route throughput (defects/s, excl. infer)"),
]


def bench_report_dict(report: BenchReport) -> dict:
    return {
        "config": {
            "n_images": report.n_images,
            "trials": report.trials,
            "warmup": report.warmup,
            "inference_ms": report.inference_ms,
            "db_path": report.db_path,
            "recovery_points": report.recovery_points,
        },
        "routes": {
            m.route: {key: getattr(m, key) for key, _ in _BENCH_COLUMNS}
            | {"t_ser_img": m.t_ser_img, "t_db_img": m.t_db_img, "t_e2e_img": m.t_e2e_img}
            for m in report.routes
        },
    }


def write_bench_report(report: BenchReport, outdir) -> dict[str, Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    doc = bench_report_dict(report)
    json_path = outdir / "bench.json"
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    csv_path = outdir / "bench.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Metric"] + [m.route for m in report.routes])
        for key, label in _BENCH_COLUMNS:
            writer.writerow([label] + [f"{getattr(m, key):.4f}" for m in report.routes])
    fig_path = outdir / "figures" / "route_costs.png"
    _render_bench_figure(report, fig_path)
    return {"json": json_path, "csv": csv_path, "figure": fig_path}


def _render_bench_figure(report: BenchReport, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [m.route for m in report.routes]
    panels = [
        ("payload_per_defect", "Payload / defect (B)"),
        ("record_per_defect", "Record / defect (B)"),
        ("t_arch_route", "Archive overhead / defect (ms)"),
        ("t_usable_ex", "Route-to-usable / defect (ms)"),
    ]
    fig, axes = plt.subplots(2, 2, figsize=(10, 7))
    for ax, (key, label) in zip(axes.ravel(), panels):
        ax.bar(names, [getattr(m, key) for m in report.routes])
        ax.set_title(label, fontsize=10)
        ax.tick_params(axis="x", rotation=20, labelsize=8)
    fig.suptitle("Archive-and-recovery route comparison")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
