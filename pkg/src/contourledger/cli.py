"""Command-line interface.

Subcommands: fit, reconstruct, align, eval, bench, serve.  Exit codes:
0 success, 2 malformed/degenerate input, 3 store failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import archive, evaluation, records, reporting
from .errors import (
    ContourLedgerError,
    DegenerateRing,
    InsufficientSamples,
    SchemaError,
    StoreFailure,
)
from .fourier import fit as fourier_fit
from .fourier import reconstruct, truncate
from .geometry import regularize_ring, resample_boundary
from .phase import align as phase_align

ENV_DB = "CONTOUR_LEDGER_DB"


def _cmd_fit(args) -> int:
    try:
        points = records.load_polygon_points(args.polygon)
        ring = regularize_ring(points)
        resampled = resample_boundary(ring, args.samples)
        desc = fourier_fit(resampled, args.order)
    except (DegenerateRing, InsufficientSamples, ValueError) as exc:
        print(f"fit rejected (instance dropped): {exc}", file=sys.stderr)
        return 2
    records.save_descriptor(desc, args.out)
    print(f"wrote order-{desc.order} descriptor to {args.out}")
    return 0


def _cmd_reconstruct(args) -> int:
    try:
        desc = records.load_descriptor(args.descriptor)
        if args.order is not None:
            desc = truncate(desc, args.order)
        points = reconstruct(desc, args.samples)
    except (ContourLedgerError, ValueError, KeyError) as exc:
        print(f"reconstruct failed: {exc}", file=sys.stderr)
        return 2
    records.save_polygon_points(points, args.out)
    print(f"wrote {len(points)}-point polygon to {args.out}")
    return 0


def _cmd_align(args) -> int:
    try:
        gt = records.load_descriptor(args.gt)
        pred = records.load_descriptor(args.pred)
        aligned = phase_align(gt, pred)
    except (ContourLedgerError, ValueError, KeyError) as exc:
        print(f"align failed: {exc}", file=sys.stderr)
        return 2
    records.save_descriptor(aligned, args.out)
    print(f"wrote aligned descriptor to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    try:
        preds = records.load_predictions(args.preds)
        gts = records.load_ground_truths(args.gts)
    except SchemaError as exc:
        print(f"schema violation: {exc}", file=sys.stderr)
        return 2
    routes = args.routes.split(",") if args.routes else None
    report = evaluation.evaluate(preds, gts, routes=routes, conf_floor=args.conf_floor)
    paths = reporting.write_eval_report(report, args.out)
    for name, rr in report.routes.items():
        print(f"{name}: mAP@50 {rr.map50 * 100:.2f}  mAP@50:95 {rr.map5095 * 100:.2f}  "
              f"(preds {rr.n_preds}, dropped {rr.n_dropped}, matched {rr.n_matched_quality})")
    print(f"report: {paths['json']}  csv: {paths['csv']}  figure: {paths['figure']}")
    return 0


def _cmd_bench(args) -> int:
    routes = args.routes.split(",") if args.routes else list(archive.ALL_ROUTES)
    for r in routes:
        if r not in archive.ALL_ROUTES:
            print(f"unknown route {r!r} (choose from {', '.join(archive.ALL_ROUTES)})",
                  file=sys.stderr)
            return 2
    dataset = archive.synthetic_dataset(
        n_images=args.images, seed=args.seed, image_size=args.image_size)
    if args.write_images:
        _write_dataset_images(dataset, args.write_images)
    try:
        report = archive.bench_run(dataset, routes, db_path=args.db,
                                   trials=args.trials, warmup=args.warmup,
                                   inference_ms=args.inference_ms)
    except StoreFailure as exc:
        print(f"store failure: {exc}", file=sys.stderr)
        return 3
    paths = reporting.write_bench_report(report, args.out)
    for m in report.routes:
        print(f"{m.route}: payload {m.payload_per_defect:.1f} B  "
              f"arch {m.t_arch_route:.3f} ms  usable(ex) {m.t_usable_ex:.3f} ms  "
              f"throughput {m.throughput:.1f} defects/s")
    print(f"report: {paths['json']}  csv: {paths['csv']}  figure: {paths['figure']}")
    return 0


def _write_dataset_images(dataset, outdir) -> None:
    from matplotlib.image import imsave

    os.makedirs(outdir, exist_ok=True)
    for img in dataset:
        canvas = np.zeros((img.height, img.width), dtype=float)
        for inst in img.instances:
            if inst.mask is not None:
                canvas = np.maximum(canvas, inst.mask.foreground().astype(float) * 0.75)
        imsave(os.path.join(outdir, f"{img.image_id}.png"), canvas,
               cmap="gray", vmin=0.0, vmax=1.0)


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    if not args.db:
        print(f"no store given: pass --db or set {ENV_DB}", file=sys.stderr)
        return 2
    if not os.path.exists(args.db):
        print(f"store not found: {args.db}", file=sys.stderr)
        return 3
    app = create_app(args.db, images_dir=args.images_dir, viewer_dir=args.viewer_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contourledger",
        description="Fourier contour records: codec, polygon-space evaluation, "
                    "archive benchmark, and review API")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a descriptor to a polygon file")
    p.add_argument("polygon", help="polygon JSON ({'points': [[x, y], ...]})")
    p.add_argument("--order", type=int, default=16)
    p.add_argument("--samples", type=int, default=256,
                   help="arc-length resampling count before fitting")
    p.add_argument("--out", default="descriptor.json")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("reconstruct", help="evaluate a descriptor into a polygon")
    p.add_argument("descriptor")
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--order", type=int, default=None, help="truncate to this order first")
    p.add_argument("--out", default="polygon.json")
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("align", help="phase-align a target descriptor to a prediction")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", default="aligned.json")
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("eval", help="polygon-space evaluation of JSONL predictions")
    p.add_argument("--preds", required=True)
    p.add_argument("--gts", required=True)
    p.add_argument("--routes", default=None, help="comma-separated route filter")
    p.add_argument("--conf-floor", type=float, default=None)
    p.add_argument("--out", default="eval_report")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bench", help="archive-and-recovery route benchmark")
    p.add_argument("--db", default=os.environ.get(ENV_DB, "contour_ledger.db"))
    p.add_argument("--out", default="bench_report")
    p.add_argument("--routes", default=None)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--warmup", type=int, default=3)
    p.add_argument("--images", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--image-size", type=int, default=896)
    p.add_argument("--inference-ms", type=float, default=0.0,
                   help="per-image inference latency to fold into incl-infer totals")
    p.add_argument("--write-images", default=None,
                   help="directory for synthetic preview PNGs (served by the viewer)")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("serve", help="read-only review API over a record store")
    p.add_argument("--db", default=os.environ.get(ENV_DB))
    p.add_argument("--images-dir", default=None)
    p.add_argument("--viewer-dir", default=None,
                   help="built frontend directory to mount at /viewer")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8008)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
