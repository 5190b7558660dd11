"""Unified polygon-space evaluation.

Boxes, masks, explicit contours, and Fourier contours are all projected
into normalized polygon space by deterministic route conversions, then
matched per image and class by descending confidence under a polygon-IoU
threshold.  AP uses the all-points area under the monotone precision
envelope.  Matched true-positive pairs additionally get boundary
(B-F1, Chamfer) and geometry (perimeter/area error) quality metrics:
boundary metrics on arc-length-resampled single boundaries, geometry
metrics on the full polygon geometry itself.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateRing, EmptyMask
from .fourier import reconstruct
from .geometry import (
    BoxRect,
    PolygonShape,
    boundary_sample_count,
    box_to_polygon,
    largest_component_exterior,
    polygon_area,
    polygon_iou,
    polygon_perimeter,
    resample_boundary,
    ring_length,
)
from .masks import RleMask, mask_to_polygons, rle_decode

ROUTE_BOX = "R2P"
ROUTE_MASK = "S2P-Mask"
ROUTE_CONTOUR = "S2P-Contour"
ROUTE_FOURIER = "S2P-Fourier"
ROUTES = (ROUTE_BOX, ROUTE_MASK, ROUTE_CONTOUR, ROUTE_FOURIER)

IOU_THRESHOLDS = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))
QUALITY_TAU = 0.50
BOUNDARY_TOLERANCE = 0.002222
MASK_THRESHOLD = 0.5
FOURIER_SAMPLES = 256


@dataclass
class Prediction:
    image_id: str
    class_id: int
    confidence: float
    route: str
    payload: object  # BoxRect | BinaryMask | RleMask | ring list | FourierDescriptor

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValueError(f"unknown route {self.route!r}")


@dataclass
class GroundTruth:
    image_id: str
    class_id: int
    polygon: PolygonShape


def convert_route(pred: Prediction) -> PolygonShape:
    """Route-specific conversion into the common polygon space.

    Degenerate payloads raise; the caller drops the prediction.
    """
    payload = pred.payload
    if pred.route == ROUTE_BOX:
        if not isinstance(payload, BoxRect):
            payload = BoxRect(*payload)
        return box_to_polygon(payload)
    if pred.route == ROUTE_MASK:
        if isinstance(payload, RleMask):
            payload = rle_decode(payload)
        return mask_to_polygons(payload, MASK_THRESHOLD)
    if pred.route == ROUTE_CONTOUR:
        rings = payload
        if len(rings) and np.ndim(rings[0]) == 1:
            rings = [rings]
        return PolygonShape.from_rings(rings)
    if pred.route == ROUTE_FOURIER:
        return PolygonShape.from_ring(reconstruct(payload, FOURIER_SAMPLES))
    raise ValueError(f"unknown route {pred.route!r}")


@dataclass
class MatchSet:
    threshold: float
    matches: list[tuple[int, int, float]]  # (pred index, gt index, IoU)
    unmatched_preds: list[int]
    unmatched_gts: list[int]


def greedy_match(preds: list[Prediction], gts: list[GroundTruth], tau: float,
                 iou: Optional[dict[tuple[int, int], float]] = None,
                 polygons: Optional[list[PolygonShape]] = None) -> MatchSet:
    """Confidence-greedy one-to-one matching at one IoU threshold.

    Predictions are scanned by descending confidence (ties keep input
    order); each takes the highest-IoU unmatched same-class ground truth
    at or above the threshold, lowest index first on IoU ties.
    """
    if not 0.0 < tau <= 1.0:
        raise ValueError("threshold must lie in (0, 1]")
    if iou is None:
        if polygons is None:
            polygons = [convert_route(p) for p in preds]
        iou = {}
        for i, p in enumerate(preds):
            for j, g in enumerate(gts):
                if p.class_id == g.class_id:
                    iou[(i, j)] = polygon_iou(polygons[i], g.polygon)
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].confidence, i))
    taken = [False] * len(gts)
    matches = []
    unmatched_preds = []
    for i in order:
        best_j, best_iou = -1, 0.0
        for j, g in enumerate(gts):
            if taken[j] or g.class_id != preds[i].class_id:
                continue
            v = iou.get((i, j), 0.0)
            # strict > keeps the lowest gt index on exact IoU ties
            if v >= tau and v > best_iou:
                best_j, best_iou = j, v
        if best_j >= 0:
            taken[best_j] = True
            matches.append((i, best_j, best_iou))
        else:
            unmatched_preds.append(i)
    return MatchSet(tau, matches, unmatched_preds,
                    [j for j, t in enumerate(taken) if not t])


def average_precision(flags: list[bool], n_gt: int) -> float:
    """All-points AP: area under the monotone precision envelope.

    `flags` marks each prediction of one class, already sorted by
    descending confidence, as true positive or not.
    """
    if n_gt < 1:
        raise ValueError("AP needs at least one ground truth")
    if not flags:
        return 0.0
    tp = np.cumsum(np.asarray(flags, dtype=np.float64))
    fp = np.cumsum(~np.asarray(flags, dtype=bool))
    recall = tp / n_gt
    precision = tp / (tp + fp)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    prev_r = 0.0
    ap = 0.0
    for r, p in zip(recall, envelope):
        if r > prev_r:
            ap += (r - prev_r) * p
            prev_r = r
    return float(ap)


@dataclass
class PairMetrics:
    """Boundary/geometry quality of one matched true-positive pair."""

    b_f1: float
    chamfer: float
    perimeter_err: float
    area_err: float


def matched_tp_metrics(pred_poly: PolygonShape, gt_poly: PolygonShape,
                       tolerance: float = BOUNDARY_TOLERANCE) -> PairMetrics:
    """Quality metrics for one pair already matched at the quality threshold."""
    ring_p = largest_component_exterior(pred_poly)
    ring_g = largest_component_exterior(gt_poly)
    sp = resample_boundary(ring_p, boundary_sample_count(ring_length(ring_p)))
    sg = resample_boundary(ring_g, boundary_sample_count(ring_length(ring_g)))
    d_pg = cKDTree(sg).query(sp)[0]
    d_gp = cKDTree(sp).query(sg)[0]
    b_prec = float(np.mean(d_pg <= tolerance))
    b_rec = float(np.mean(d_gp <= tolerance))
    b_f1 = 0.0 if b_prec + b_rec == 0.0 else 2.0 * b_prec * b_rec / (b_prec + b_rec)
    chamfer = 0.5 * (float(np.mean(d_pg)) + float(np.mean(d_gp)))
    lp, lg = polygon_perimeter(pred_poly), polygon_perimeter(gt_poly)
    ap, ag = polygon_area(pred_poly), polygon_area(gt_poly)
    return PairMetrics(b_f1, chamfer, abs(lp - lg) / lg, abs(ap - ag) / ag)


def micro_average(values: dict[int, list[float]]) -> tuple[Optional[float], dict[int, float]]:
    """Pair-weighted overall mean plus per-class means; absent when empty."""
    per_class = {c: float(np.mean(v)) for c, v in values.items() if v}
    pooled = [x for v in values.values() for x in v]
    micro = float(np.mean(pooled)) if pooled else None
    return micro, per_class


@dataclass
class RouteReport:
    route: str
    n_preds: int
    n_dropped: int
    n_gts: int
    n_matched_quality: int
    ap: dict[int, dict[float, float]]            # class -> threshold -> AP
    map50: float
    map5095: float
    quality_micro: dict[str, Optional[float]]    # metric name -> micro average
    quality_per_class: dict[str, dict[int, float]]


@dataclass
class EvalReport:
    thresholds: tuple[float, ...]
    quality_tau: float
    boundary_tolerance: float
    classes: list[int]
    n_images: int
    routes: dict[str, RouteReport] = field(default_factory=dict)


_METRIC_FIELDS = {"b_f1": "b_f1", "chamfer": "chamfer",
                  "p_err": "perimeter_err", "a_err": "area_err"}


def evaluate(preds: list[Prediction], gts: list[GroundTruth],
             routes: Optional[list[str]] = None,
             conf_floor: Optional[float] = None,
             thresholds: tuple[float, ...] = IOU_THRESHOLDS) -> EvalReport:
    """Full protocol over line-level predictions and ground truths."""
    if routes is None:
        routes = sorted({p.route for p in preds}) or [ROUTE_FOURIER]
    if conf_floor is not None:
        preds = [p for p in preds if p.confidence >= conf_floor]
    classes = sorted({g.class_id for g in gts})
    image_ids = sorted({g.image_id for g in gts} | {p.image_id for p in preds})
    report = EvalReport(tuple(thresholds), QUALITY_TAU, BOUNDARY_TOLERANCE,
                        classes, len(image_ids))
    gts_by_image: dict[str, list[GroundTruth]] = defaultdict(list)
    for g in gts:
        gts_by_image[g.image_id].append(g)
    n_gt_per_class = defaultdict(int)
    for g in gts:
        n_gt_per_class[g.class_id] += 1
    for route in routes:
        report.routes[route] = _evaluate_route(
            route, [p for p in preds if p.route == route], gts_by_image,
            classes, n_gt_per_class, thresholds)
    return report


def _evaluate_route(route, preds, gts_by_image, classes, n_gt_per_class, thresholds):
    converted: dict[str, list[tuple[Prediction, PolygonShape]]] = defaultdict(list)
    dropped = 0
    for p in preds:
        try:
            converted[p.image_id].append((p, convert_route(p)))
        except (DegenerateRing, EmptyMask):
            dropped += 1
    # (class, confidence, tp-flag per threshold) accumulated over images
    scored: dict[int, list[tuple[float, int, np.ndarray]]] = defaultdict(list)
    seq = 0
    quality: dict[str, list[float]] = {k: [] for k in _METRIC_FIELDS}
    quality_cls: dict[str, dict[int, list[float]]] = {
        k: defaultdict(list) for k in _METRIC_FIELDS}
    n_quality = 0
    all_images = sorted(set(gts_by_image) | set(converted))
    for image_id in all_images:
        pairs = converted.get(image_id, [])
        img_preds = [p for p, _ in pairs]
        img_polys = [poly for _, poly in pairs]
        img_gts = gts_by_image.get(image_id, [])
        iou = {}
        for i, p in enumerate(img_preds):
            for j, g in enumerate(img_gts):
                if p.class_id == g.class_id:
                    iou[(i, j)] = polygon_iou(img_polys[i], g.polygon)
        flags = {i: np.zeros(len(thresholds), dtype=bool) for i in range(len(img_preds))}
        for t_idx, tau in enumerate(thresholds):
            ms = greedy_match(img_preds, img_gts, tau, iou=iou)
            for i, _, _ in ms.matches:
                flags[i][t_idx] = True
            if tau == QUALITY_TAU:
                for i, j, _ in ms.matches:
                    pm = matched_tp_metrics(img_polys[i], img_gts[j].polygon)
                    n_quality += 1
                    for key, attr in _METRIC_FIELDS.items():
                        quality[key].append(getattr(pm, attr))
                        quality_cls[key][img_preds[i].class_id].append(getattr(pm, attr))
        for i, p in enumerate(img_preds):
            scored[p.class_id].append((p.confidence, seq, flags[i]))
            seq += 1
    ap_table: dict[int, dict[float, float]] = {}
    for c in classes:
        if n_gt_per_class[c] < 1:
            continue
        entries = sorted(scored.get(c, []), key=lambda e: (-e[0], e[1]))
        ap_table[c] = {
            tau: average_precision([bool(e[2][t_idx]) for e in entries], n_gt_per_class[c])
            for t_idx, tau in enumerate(thresholds)}
    valid = sorted(ap_table)
    map50 = float(np.mean([ap_table[c][QUALITY_TAU] for c in valid])) if valid else 0.0
    map5095 = float(np.mean([ap_table[c][t] for c in valid for t in thresholds])) if valid else 0.0
    micro: dict[str, Optional[float]] = {}
    per_class: dict[str, dict[int, float]] = {}
    for key in _METRIC_FIELDS:
        micro[key], per_class[key] = micro_average(quality_cls[key])
    n_preds_kept = sum(len(v) for v in converted.values())
    return RouteReport(route, n_preds_kept, dropped,
                       sum(n_gt_per_class.values()), n_quality,
                       ap_table, map50, map5095, micro, per_class)
