"""Read-only review API over an archived record store.

Every endpoint is a GET; the store is opened read-only per request, so
the service cannot mutate records.  Fourier-backed records support
on-demand truncation (``order``) and resampling (``samples``); the other
routes serve their recovered 256-point polygon.
"""

from __future__ import annotations

import mimetypes
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse

from .archive import (
    ROUTE_FOURIER_FIT,
    ROUTE_NATIVE,
    RECOVERY_POINTS,
    RecordStore,
    descriptors,
    recover_record,
)
from .errors import ContourLedgerError
from .fourier import deserialize_payload, reconstruct, to_pixel_space, truncate
from .geometry import norm_to_pixel, resample_boundary

FOURIER_ROUTES = (ROUTE_NATIVE, ROUTE_FOURIER_FIT)


def create_app(db_path: str, images_dir: Optional[str] = None,
               viewer_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="contour-ledger review API", version="0.1.0")
    images_root = Path(images_dir) if images_dir else None
    if viewer_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/viewer", StaticFiles(directory=viewer_dir, html=True), name="viewer")

    def open_store() -> RecordStore:
        try:
            return RecordStore(db_path, readonly=True)
        except ContourLedgerError as exc:
            raise HTTPException(503, f"store unavailable: {exc}") from exc

    def fetch_record(store: RecordStore, record_id: int):
        row = store.record(record_id)
        if row is None:
            raise HTTPException(404, f"no record with id {record_id}")
        return row

    @app.get("/api/images")
    def list_images():
        with open_store() as store:
            return [
                {"id": r["id"], "path": r["path"], "width": r["W"], "height": r["H"],
                 "n_defects": r["n_defects"]}
                for r in store.images()
            ]

    @app.get("/api/images/{image_id}/records")
    def image_records(image_id: str):
        with open_store() as store:
            if store.image(image_id) is None:
                raise HTTPException(404, f"no image with id {image_id}")
            return [
                {"id": r["id"], "image_id": r["image_id"], "class": r["class"],
                 "confidence": r["confidence"], "route": r["route"],
                 "n_params": r["n_params"], "created_at": r["created_at"]}
                for r in store.records_for_image(image_id)
            ]

    @app.get("/api/records/{record_id}/polygon")
    def record_polygon(record_id: int, order: Optional[int] = None,
                       samples: Optional[int] = None):
        with open_store() as store:
            row = fetch_record(store, record_id)
        width, height = row["W"], row["H"]
        n = samples if samples is not None else RECOVERY_POINTS
        if n < 3:
            raise HTTPException(400, "samples must be at least 3")
        if row["route"] in FOURIER_ROUTES:
            desc = deserialize_payload(row["payload"])
            k = order if order is not None else desc.order
            if not 1 <= k <= desc.order:
                raise HTTPException(400, f"order must lie in [1, {desc.order}]")
            if k < desc.order:
                desc = truncate(desc, k)
            points = norm_to_pixel(reconstruct(desc, n), width, height)
        else:
            if order is not None:
                raise HTTPException(400, f"route {row['route']} has no harmonic payload")
            k = None
            points = recover_record(row["payload"], row["route"], width, height)
            if n != len(points):
                points = resample_boundary(points, n)
        return {"record_id": record_id, "route": row["route"], "order": k,
                "samples": n, "width": width, "height": height,
                "points": [[float(x), float(y)] for x, y in points]}

    @app.get("/api/records/{record_id}/spectrum")
    def record_spectrum(record_id: int):
        with open_store() as store:
            row = fetch_record(store, record_id)
        if row["route"] not in FOURIER_ROUTES:
            raise HTTPException(400, f"route {row['route']} has no harmonic payload")
        desc = to_pixel_space(deserialize_payload(row["payload"]), row["W"], row["H"])
        mags = desc.spectrum()
        return {"record_id": record_id, "orders": list(range(1, desc.order + 1)),
                "magnitudes": [float(m) for m in mags], "units": "px"}

    @app.get("/api/records/{record_id}/descriptors")
    def record_descriptors(record_id: int):
        with open_store() as store:
            row = fetch_record(store, record_id)
        poly = recover_record(row["payload"], row["route"], row["W"], row["H"])
        d = descriptors(poly)
        return {
            "record_id": record_id,
            "space": "image",
            "area_px2": d.area,
            "perimeter_px": d.perimeter,
            "centroid_px": [d.centroid_x, d.centroid_y],
            "orientation_rad": d.orientation,
            "elongation": d.elongation,
        }

    @app.get("/images/{image_id}")
    def image_bytes(image_id: str):
        with open_store() as store:
            row = store.image(image_id)
        if row is None:
            raise HTTPException(404, f"no image with id {image_id}")
        rel = row["path"] or f"{image_id}.png"
        candidate = (images_root / rel) if images_root else Path(rel)
        if not candidate.is_file():
            raise HTTPException(404, f"image file not found: {candidate}")
        media = mimetypes.guess_type(str(candidate))[0] or "application/octet-stream"
        return FileResponse(candidate, media_type=media)

    return app
