"""Record store, archival routes, recovery, and fair route-cost metrics.

Five storage routes archive per-defect geometry into one SQLite file:

* Native-Fourier: the normalized coefficient vector, half precision.
* RLE-full:       full-image uint32 run-length mask.
* RLE-crop:       foreground-tight cropped uint32 run-length mask.
* Poly-256:       largest external contour resampled to 256 points,
                  half-precision normalized pairs (1024 B).
* Fourier-fit:    order-16 descriptor fitted post hoc from the mask
                  contour (payload-identical to the native route).

Every route must recover the same usable object: a 256-point polygon in
image (pixel) coordinates plus derived geometric descriptors.  Costs are
attributed to the route that incurs them: any conversion needed to build
the payload counts into archive-side serialization time, and per-defect
costs are normalized by prediction density so methods with different
prediction counts stay comparable.
"""

from __future__ import annotations

import math
import sqlite3
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from statistics import median
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ContourLedgerError,
    DegenerateRing,
    EmptyMask,
    PayloadSizeMismatch,
    StoreFailure,
)
from .fourier import (
    SPACE_NORMALIZED,
    SPACE_PIXEL,
    FourierDescriptor,
    deserialize_payload,
    fit,
    reconstruct,
    serialize_payload,
)
from .geometry import (
    PolygonShape,
    largest_component_exterior,
    norm_to_pixel,
    resample_boundary,
    ring_length,
    signed_area,
)
from .masks import BinaryMask, RleMask, mask_to_polygons, rle_decode, rle_encode

ROUTE_NATIVE = "Native-Fourier"
ROUTE_RLE_FULL = "RLE-full"
ROUTE_RLE_CROP = "RLE-crop"
ROUTE_POLY256 = "Poly-256"
ROUTE_FOURIER_FIT = "Fourier-fit"
ALL_ROUTES = (ROUTE_NATIVE, ROUTE_RLE_FULL, ROUTE_RLE_CROP, ROUTE_POLY256, ROUTE_FOURIER_FIT)

RECOVERY_POINTS = 256
FIT_ORDER = 16

_SCHEMA = """
CREATE TABLE IF NOT EXISTS images (
    id TEXT PRIMARY KEY,
    path TEXT,
    W INTEGER NOT NULL,
    H INTEGER NOT NULL,
    preprocess_meta TEXT
);
CREATE TABLE IF NOT EXISTS defects (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    image_id TEXT NOT NULL REFERENCES images(id),
    class INTEGER NOT NULL,
    confidence REAL NOT NULL,
    route TEXT NOT NULL,
    n_params INTEGER NOT NULL,
    payload BLOB NOT NULL,
    created_at TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_defects_route ON defects(route);
CREATE INDEX IF NOT EXISTS idx_defects_image ON defects(image_id);
"""


class RecordStore:
    """Single-file SQLite store: one writer, any number of readers."""

    def __init__(self, path, readonly: bool = False):
        self.path = str(path)
        try:
            if readonly:
                self.conn = sqlite3.connect(f"file:{self.path}?mode=ro", uri=True)
            else:
                self.conn = sqlite3.connect(self.path)
                self.conn.executescript(_SCHEMA)
                self.conn.commit()
        except sqlite3.Error as exc:
            raise StoreFailure(f"cannot open store at {self.path}: {exc}") from exc
        self.conn.row_factory = sqlite3.Row

    def close(self):
        self.conn.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def add_image(self, image_id: str, width: int, height: int,
                  path: str = "", preprocess_meta: str = "") -> None:
        try:
            self.conn.execute(
                "INSERT OR REPLACE INTO images (id, path, W, H, preprocess_meta) "
                "VALUES (?, ?, ?, ?, ?)",
                (image_id, path, width, height, preprocess_meta))
            self.conn.commit()
        except sqlite3.Error as exc:
            raise StoreFailure(str(exc)) from exc

    def insert_defects(self, rows: Sequence[tuple]) -> None:
        """rows: (image_id, class, confidence, route, n_params, payload, created_at)."""
        try:
            self.conn.executemany(
                "INSERT INTO defects (image_id, class, confidence, route, n_params, "
                "payload, created_at) VALUES (?, ?, ?, ?, ?, ?, ?)", rows)
            self.conn.commit()
        except sqlite3.Error as exc:
            raise StoreFailure(str(exc)) from exc

    def clear_route(self, route: str) -> None:
        self.conn.execute("DELETE FROM defects WHERE route = ?", (route,))
        self.conn.commit()

    def clear_defects(self) -> None:
        self.conn.execute("DELETE FROM defects")
        self.conn.commit()

    def images(self) -> list[sqlite3.Row]:
        return self.conn.execute(
            "SELECT i.id, i.path, i.W, i.H, i.preprocess_meta, "
            "  (SELECT COUNT(*) FROM defects d WHERE d.image_id = i.id) AS n_defects "
            "FROM images i ORDER BY i.id").fetchall()

    def image(self, image_id: str) -> Optional[sqlite3.Row]:
        return self.conn.execute("SELECT * FROM images WHERE id = ?", (image_id,)).fetchone()

    def records_for_image(self, image_id: str) -> list[sqlite3.Row]:
        return self.conn.execute(
            "SELECT id, image_id, class, confidence, route, n_params, created_at "
            "FROM defects WHERE image_id = ? ORDER BY id", (image_id,)).fetchall()

    def record(self, record_id: int) -> Optional[sqlite3.Row]:
        return self.conn.execute(
            "SELECT d.*, i.W, i.H, i.path AS image_path FROM defects d "
            "JOIN images i ON i.id = d.image_id WHERE d.id = ?", (record_id,)).fetchone()

    def route_rows(self, route: str) -> list[sqlite3.Row]:
        return self.conn.execute(
            "SELECT d.id, d.image_id, d.route, d.n_params, d.payload, i.W, i.H "
            "FROM defects d JOIN images i ON i.id = d.image_id "
            "WHERE d.route = ? ORDER BY d.id", (route,)).fetchall()

    def route_byte_stats(self, route: str) -> tuple[int, float, float]:
        """(count, payload bytes/defect, record bytes/defect) for stored rows.

        Record size counts the payload plus the measured byte width of the
        stored header fields (ids, class, confidence, route tag, n_params,
        timestamp).
        """
        rows = self.conn.execute(
            "SELECT image_id, route, n_params, created_at, LENGTH(payload) AS pl "
            "FROM defects WHERE route = ?", (route,)).fetchall()
        if not rows:
            return 0, 0.0, 0.0
        payload = 0
        record = 0
        for r in rows:
            header = (8 + len(r["image_id"].encode()) + 8 + 8
                      + len(r["route"].encode()) + 8 + len(r["created_at"].encode()))
            payload += r["pl"]
            record += r["pl"] + header
        n = len(rows)
        return n, payload / n, record / n


# ---------------------------------------------------------------------------
# Benchmark inputs
# ---------------------------------------------------------------------------

@dataclass
class BenchInstance:
    class_id: int
    confidence: float
    descriptor: Optional[FourierDescriptor] = None  # normalized space
    mask: Optional[BinaryMask] = None


@dataclass
class BenchImage:
    image_id: str
    width: int
    height: int
    instances: list[BenchInstance]


def synthetic_dataset(n_images: int = 8, seed: int = 0, image_size: int = 896,
                      min_instances: int = 2, max_instances: int = 4,
                      n_classes: int = 3) -> list[BenchImage]:
    """Random smooth blobs with paired descriptor and rasterized mask.

    Blob radii are kept large enough that cropped run-length payloads
    stay above the 256-point polygon payload, and small enough that the
    foreground fraction stays low.
    """
    rng = np.random.default_rng(seed)
    images = []
    for i in range(n_images):
        n_inst = int(rng.integers(min_instances, max_instances + 1))
        instances = []
        for _ in range(n_inst):
            center = rng.uniform(0.34, 0.66, size=2)
            base_r = rng.uniform(0.12, 0.20)
            t = 2.0 * np.pi * np.arange(256) / 256
            radius = np.full_like(t, base_r)
            for k in range(2, 7):
                radius += base_r * rng.uniform(0.0, 0.25) / k * np.cos(k * t + rng.uniform(0, 2 * np.pi))
            pts = center + np.stack([radius * np.cos(t), radius * np.sin(t)], axis=1)
            desc = fit(pts, FIT_ORDER)
            instances.append(BenchInstance(
                class_id=int(rng.integers(0, n_classes)),
                confidence=float(rng.uniform(0.5, 0.99)),
                descriptor=desc,
                mask=rasterize_contour(reconstruct(desc, 512), image_size, image_size)))
        images.append(BenchImage(f"img_{i:04d}", image_size, image_size, instances))
    return images


def rasterize_contour(contour: np.ndarray, width: int, height: int) -> BinaryMask:
    """Fill a normalized closed contour into a pixel mask.

    A pixel is foreground when its center lies inside the contour; only
    the contour's bounding window is tested.
    """
    from matplotlib.path import Path as MplPath

    c0 = max(0, int(np.floor(contour[:, 0].min() * width)))
    c1 = min(width, int(np.ceil(contour[:, 0].max() * width)) + 1)
    r0 = max(0, int(np.floor(contour[:, 1].min() * height)))
    r1 = min(height, int(np.ceil(contour[:, 1].max() * height)) + 1)
    data = np.zeros((height, width), dtype=bool)
    if c1 > c0 and r1 > r0:
        cols, rows = np.meshgrid((np.arange(c0, c1) + 0.5) / width,
                                 (np.arange(r0, r1) + 0.5) / height)
        pts = np.stack([cols.ravel(), rows.ravel()], axis=1)
        inside = MplPath(contour).contains_points(pts)
        data[r0:r1, c0:c1] = inside.reshape(r1 - r0, c1 - c0)
    return BinaryMask(width, height, data)


# ---------------------------------------------------------------------------
# Archival
# ---------------------------------------------------------------------------

def _mask_exterior(mask: BinaryMask) -> np.ndarray:
    poly = mask_to_polygons(mask)
    return largest_component_exterior(poly)


def route_payload(inst: BenchInstance, route: str) -> tuple[bytes, int]:
    """(payload bytes, n_params) for one instance under one route."""
    if route == ROUTE_NATIVE:
        desc = inst.descriptor
        if desc is None:
            raise ContourLedgerError("native route needs a descriptor")
        if desc.space == SPACE_PIXEL:
            raise ContourLedgerError("store descriptors in normalized space")
        return serialize_payload(desc), desc.order
    if inst.mask is None:
        raise ContourLedgerError(f"route {route} needs a mask")
    if route == ROUTE_RLE_FULL:
        rle = rle_encode(inst.mask, crop=False)
        return rle.payload_bytes(), len(rle.runs)
    if route == ROUTE_RLE_CROP:
        rle = rle_encode(inst.mask, crop=True)
        return rle.payload_bytes(), len(rle.runs)
    if route == ROUTE_POLY256:
        ring = resample_boundary(_mask_exterior(inst.mask), RECOVERY_POINTS)
        return ring.astype("<f2").tobytes(), RECOVERY_POINTS
    if route == ROUTE_FOURIER_FIT:
        ring = resample_boundary(_mask_exterior(inst.mask), RECOVERY_POINTS)
        return serialize_payload(fit(ring, FIT_ORDER)), FIT_ORDER
    raise ValueError(f"unknown route {route!r}")


@dataclass
class ArchiveTiming:
    image_id: str
    t_ser_ms: float
    t_db_ms: float
    n_stored: int
    n_failed: int


def archive_image(store: RecordStore, image: BenchImage, route: str) -> ArchiveTiming:
    """Serialize and insert one image's instances; returns stage timings.

    Serialization time includes all route-specific conversion work; the
    insert covers the batched write and commit.
    """
    created = datetime.now(timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    rows = []
    failed = 0
    for inst in image.instances:
        try:
            payload, n_params = route_payload(inst, route)
        except (DegenerateRing, EmptyMask):
            failed += 1
            continue
        rows.append((image.image_id, inst.class_id, inst.confidence, route,
                     n_params, payload, created))
    t1 = time.perf_counter()
    store.insert_defects(rows)
    t2 = time.perf_counter()
    return ArchiveTiming(image.image_id, (t1 - t0) * 1e3, (t2 - t1) * 1e3,
                         len(rows), failed)


# ---------------------------------------------------------------------------
# Recovery
# ---------------------------------------------------------------------------

@dataclass
class GeometricDescriptorSet:
    """Image-space descriptors of a recovered polygon (px / px^2 / radians)."""

    area: float
    perimeter: float
    centroid_x: float
    centroid_y: float
    orientation: float
    elongation: float


def _signed_rings(poly) -> list[np.ndarray]:
    if isinstance(poly, PolygonShape):
        rings = []
        for comp in poly.components:
            rings.append(comp.exterior)
            rings.extend(comp.holes)
        return rings
    ring = np.asarray(poly, dtype=np.float64)
    if signed_area(ring) < 0:
        ring = ring[::-1]
    return [ring]


def descriptors(poly) -> GeometricDescriptorSet:
    """Area, perimeter, centroid, orientation, elongation of a polygon.

    Accepts a PolygonShape or a bare ring.  Orientation is the principal
    axis angle from the second central moments, in (-pi/2, pi/2];
    elongation is the square root of the minor/major eigenvalue ratio.
    """
    rings = _signed_rings(poly)
    m00 = m10 = m01 = m20 = m02 = m11 = 0.0
    perimeter = 0.0
    for ring in rings:
        x, y = ring[:, 0], ring[:, 1]
        x2, y2 = np.roll(x, -1), np.roll(y, -1)
        cross = x * y2 - x2 * y
        m00 += float(np.sum(cross)) / 2.0
        m10 += float(np.sum((x + x2) * cross)) / 6.0
        m01 += float(np.sum((y + y2) * cross)) / 6.0
        m20 += float(np.sum((x * x + x * x2 + x2 * x2) * cross)) / 12.0
        m02 += float(np.sum((y * y + y * y2 + y2 * y2) * cross)) / 12.0
        m11 += float(np.sum((x * y2 + 2.0 * x * y + 2.0 * x2 * y2 + x2 * y) * cross)) / 24.0
        perimeter += ring_length(ring)
    if m00 <= 0.0:
        raise DegenerateRing("polygon has no positive area")
    cx, cy = m10 / m00, m01 / m00
    mu20 = m20 / m00 - cx * cx
    mu02 = m02 / m00 - cy * cy
    mu11 = m11 / m00 - cx * cy
    orientation = 0.5 * math.atan2(2.0 * mu11, mu20 - mu02)
    if orientation <= -math.pi / 2.0:
        orientation += math.pi
    lam = np.linalg.eigvalsh(np.array([[mu20, mu11], [mu11, mu02]]))
    lam = np.clip(lam, 0.0, None)
    elongation = float(math.sqrt(lam[0] / lam[1])) if lam[1] > 0.0 else 1.0
    return GeometricDescriptorSet(m00, perimeter, cx, cy, orientation, elongation)


def recover_record(payload: bytes, route: str, width: int, height: int) -> np.ndarray:
    """Decode one stored payload into a 256-point pixel-space polygon."""
    if route in (ROUTE_NATIVE, ROUTE_FOURIER_FIT):
        desc = deserialize_payload(payload, SPACE_NORMALIZED)
        return norm_to_pixel(reconstruct(desc, RECOVERY_POINTS), width, height)
    if route == ROUTE_POLY256:
        pts = np.frombuffer(payload, dtype="<f2").astype(np.float64)
        if pts.size != 2 * RECOVERY_POINTS:
            raise PayloadSizeMismatch(f"{pts.size // 2} stored points, expected {RECOVERY_POINTS}")
        return norm_to_pixel(pts.reshape(-1, 2), width, height)
    if route == ROUTE_RLE_FULL:
        rle = RleMask.from_payload_bytes(payload, width, height, cropped=False)
        ring = _mask_exterior(rle_decode(rle))
        return norm_to_pixel(resample_boundary(ring, RECOVERY_POINTS), width, height)
    if route == ROUTE_RLE_CROP:
        rle = RleMask.from_payload_bytes(payload, cropped=True)
        window = rle_decode(rle)
        full = np.zeros((height, width), dtype=bool)
        u0, v0 = rle.crop_origin
        full[v0:v0 + rle.height, u0:u0 + rle.width] = window.data
        ring = _mask_exterior(BinaryMask(width, height, full))
        return norm_to_pixel(resample_boundary(ring, RECOVERY_POINTS), width, height)
    raise ValueError(f"unknown route {route!r}")


@dataclass
class RecoveredRecord:
    record_id: int
    image_id: str
    polygon_px: np.ndarray  # (256, 2)
    descriptors: GeometricDescriptorSet


def recover_route(store: RecordStore, route: str) -> tuple[list[RecoveredRecord], float]:
    """Recover every stored record of a route.

    Returns the records plus the raw recovery-to-usable latency in
    ms/defect (database read, payload decode, polygon reconstruction,
    descriptor extraction).
    """
    t0 = time.perf_counter()
    rows = store.route_rows(route)
    out = []
    for row in rows:
        poly = recover_record(row["payload"], route, row["W"], row["H"])
        out.append(RecoveredRecord(row["id"], row["image_id"], poly, descriptors(poly)))
    elapsed_ms = (time.perf_counter() - t0) * 1e3
    return out, (elapsed_ms / len(out) if out else 0.0)


# ---------------------------------------------------------------------------
# Fair route-cost metrics
# ---------------------------------------------------------------------------

def pred_density(n_pred: int, n_img: int) -> float:
    """Stored predictions per image."""
    if n_img <= 0:
        raise ValueError("need at least one image")
    return n_pred / n_img


def route_overhead(t_ser_img: float, t_db_img: float, density: float) -> float:
    """Archive-route overhead per defect, excluding inference (ms)."""
    if density <= 0.0:
        raise ValueError("density must be positive")
    return (t_ser_img + t_db_img) / density


def route_to_usable_ex(t_arch_route: float, t_usable_raw: float) -> float:
    """Route-to-usable latency per defect, excluding inference (ms)."""
    return t_arch_route + t_usable_raw


def route_to_usable_in(t_e2e_img: float, density: float, t_usable_raw: float) -> float:
    """Route-to-usable latency per defect, including inference (ms)."""
    if density <= 0.0:
        raise ValueError("density must be positive")
    return t_e2e_img / density + t_usable_raw


def route_throughput(t_usable_ex: float) -> float:
    """Recovered defects per second under the excluding-inference latency."""
    return 1000.0 / t_usable_ex


@dataclass
class RouteMetrics:
    route: str
    n_pred: int
    n_img: int
    density: float
    payload_per_defect: float
    record_per_defect: float
    t_ser_img: float
    t_db_img: float
    t_e2e_img: float
    t_usable_raw: float
    t_arch_route: float
    t_usable_ex: float
    t_usable_in: float
    throughput: float


def fair_metrics(route: str, n_pred: int, n_img: int, t_ser_img: float,
                 t_db_img: float, t_e2e_img: float, t_usable_raw: float,
                 payload_per_defect: float = 0.0,
                 record_per_defect: float = 0.0) -> RouteMetrics:
    """Assemble the per-route cost table from per-stage inputs."""
    density = pred_density(n_pred, n_img)
    t_arch = route_overhead(t_ser_img, t_db_img, density)
    t_ex = route_to_usable_ex(t_arch, t_usable_raw)
    return RouteMetrics(
        route=route, n_pred=n_pred, n_img=n_img, density=density,
        payload_per_defect=payload_per_defect, record_per_defect=record_per_defect,
        t_ser_img=t_ser_img, t_db_img=t_db_img, t_e2e_img=t_e2e_img,
        t_usable_raw=t_usable_raw, t_arch_route=t_arch, t_usable_ex=t_ex,
        t_usable_in=route_to_usable_in(t_e2e_img, density, t_usable_raw),
        throughput=route_throughput(t_ex))


# ---------------------------------------------------------------------------
# Benchmark driver
# ---------------------------------------------------------------------------

@dataclass
class BenchReport:
    routes: list[RouteMetrics]
    n_images: int
    trials: int
    warmup: int
    inference_ms: float
    db_path: str
    recovery_points: int = RECOVERY_POINTS


def bench_run(dataset: list[BenchImage], routes: Sequence[str] = ALL_ROUTES,
              db_path: str = "contour_ledger.db", trials: int = 10,
              warmup: int = 3, inference_ms: float = 0.0) -> BenchReport:
    """Archive-and-recovery benchmark over the requested routes.

    Each trial clears the route's rows, re-archives the whole dataset,
    and recovers it; reported timings are medians over trials.  The
    store keeps the final trial's records for every route, so the same
    file can back the review service afterwards.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    store = RecordStore(db_path)
    store.clear_defects()
    for img in dataset:
        store.add_image(img.image_id, img.width, img.height, path=f"{img.image_id}.png")
    n_img = len(dataset)
    results = []
    for route in routes:
        for _ in range(warmup):
            store.clear_route(route)
            for img in dataset:
                archive_image(store, img, route)
            recover_route(store, route)
        t_ser_trials, t_db_trials, t_raw_trials = [], [], []
        n_pred = 0
        for _ in range(trials):
            store.clear_route(route)
            total_ser = total_db = 0.0
            n_pred = 0
            for img in dataset:
                timing = archive_image(store, img, route)
                total_ser += timing.t_ser_ms
                total_db += timing.t_db_ms
                n_pred += timing.n_stored
            _, t_raw = recover_route(store, route)
            t_ser_trials.append(total_ser / n_img)
            t_db_trials.append(total_db / n_img)
            t_raw_trials.append(t_raw)
        t_ser = median(t_ser_trials)
        t_db = median(t_db_trials)
        t_raw = median(t_raw_trials)
        stored_n, payload_pd, record_pd = store.route_byte_stats(route)
        results.append(fair_metrics(
            route, stored_n, n_img, t_ser, t_db,
            inference_ms + t_ser + t_db, t_raw, payload_pd, record_pd))
    store.close()
    return BenchReport(results, n_img, trials, warmup, inference_ms, str(db_path))
