"""Polygon primitives shared by every other module.

All evaluation geometry lives in the normalized image square [0,1]^2
(x right, y down).  Rings are (N, 2) float arrays, implicitly closed:
the last vertex connects back to the first.  Orientation convention:
exterior rings have positive shoelace area, holes negative; both are
normalized on construction.

Boolean operations (intersection, union, validity repair) are delegated
to shapely/GEOS; everything metric (areas, perimeters, resampling) is
computed here directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Polygon
from shapely.geometry import box as _shapely_box

from .errors import DegenerateRing

# Boundary-resampling protocol constants (normalized units).
ARC_STEP = 0.002
MIN_BOUNDARY_SAMPLES = 32
MAX_BOUNDARY_SAMPLES = 512

# Snap grid used during validity repair of raw input rings.
SNAP_TOLERANCE = 1e-12

# Consecutive vertices closer than this are considered duplicates.
DUPLICATE_TOL = 1e-9

Ring = np.ndarray  # (N, 2) float64, implicitly closed


def as_points(raw) -> np.ndarray:
    """Coerce a point sequence to a finite (N, 2) float array."""
    pts = np.asarray(raw, dtype=np.float64)
    if pts.ndim == 1 and pts.size == 2:
        pts = pts.reshape(1, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (N, 2) point array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain NaN or Inf")
    return pts


def signed_area(ring: Ring) -> float:
    """Shoelace area with sign (positive for the exterior convention)."""
    r = np.asarray(ring, dtype=np.float64)
    x, y = r[:, 0], r[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def ring_length(ring: Ring) -> float:
    """Perimeter of a closed ring."""
    r = np.asarray(ring, dtype=np.float64)
    return float(np.sum(np.hypot(*(np.roll(r, -1, axis=0) - r).T)))


def orient_ring(ring: Ring, positive: bool = True) -> Ring:
    sa = signed_area(ring)
    if (sa < 0) == positive:
        return ring[::-1].copy()
    return ring


def regularize_ring(raw) -> Ring:
    """Clean a raw vertex list into a usable ring.

    Removes consecutive duplicates (including an explicit closing vertex)
    and rejects rings that are degenerate: fewer than three vertices left,
    or all vertices collinear.  Interior collinear vertices are kept; this
    is deduplication, never simplification.
    """
    pts = as_points(raw)
    if len(pts) >= 2:
        keep = [0]
        for i in range(1, len(pts)):
            if np.max(np.abs(pts[i] - pts[keep[-1]])) > DUPLICATE_TOL:
                keep.append(i)
        # drop explicit closure
        if len(keep) > 1 and np.max(np.abs(pts[keep[-1]] - pts[keep[0]])) <= DUPLICATE_TOL:
            keep.pop()
        pts = pts[keep]
    if len(pts) < 3:
        raise DegenerateRing(f"ring has {len(pts)} distinct vertices, need at least 3")
    e1 = np.roll(pts, -1, axis=0) - pts
    e2 = np.roll(e1, -1, axis=0)
    cross = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    scale = np.hypot(*e1.T) * np.hypot(*e2.T)
    if np.all(np.abs(cross) <= 1e-12 * np.maximum(scale, 1e-300)):
        raise DegenerateRing("ring vertices are collinear")
    return pts


@dataclass
class PolygonComponent:
    """One simply connected component: exterior ring plus its holes."""

    exterior: Ring
    holes: list[Ring] = field(default_factory=list)

    def __post_init__(self):
        self.exterior = orient_ring(as_points(self.exterior), positive=True)
        self.holes = [orient_ring(as_points(h), positive=False) for h in self.holes]

    @property
    def area(self) -> float:
        return signed_area(self.exterior) + sum(signed_area(h) for h in self.holes)


@dataclass
class PolygonShape:
    """Validated polygon(s) with optional holes: the common evaluation carrier."""

    components: list[PolygonComponent]

    @classmethod
    def from_ring(cls, ring, clip: bool = True) -> "PolygonShape":
        return cls.from_rings([ring], clip=clip)

    @classmethod
    def from_rings(cls, rings, clip: bool = True) -> "PolygonShape":
        """Build from bare rings: each ring is filled, then all are unioned.

        Rings with fewer than three non-collinear vertices are dropped; if
        nothing valid remains the whole instance is rejected.
        """
        polys = []
        for ring in rings:
            try:
                r = regularize_ring(ring)
            except DegenerateRing:
                continue
            polys.append(_valid(Polygon(r)))
        if not polys:
            raise DegenerateRing("no valid ring in input")
        geom = shapely.union_all(polys)
        return cls.from_shapely(geom, clip=clip)

    @classmethod
    def from_components(cls, components, clip: bool = True) -> "PolygonShape":
        """Build from explicit (exterior, holes) pairs."""
        polys = [_valid(Polygon(as_points(ext), [as_points(h) for h in holes]))
                 for ext, holes in components]
        geom = shapely.union_all(polys)
        return cls.from_shapely(geom, clip=clip)

    @classmethod
    def from_shapely(cls, geom, clip: bool = True) -> "PolygonShape":
        if clip:
            geom = _valid(geom).intersection(_shapely_box(0.0, 0.0, 1.0, 1.0))
        geom = _valid(geom)
        comps = []
        for poly in _iter_polygons(geom):
            if poly.area <= 0.0:
                continue
            ext = np.asarray(poly.exterior.coords, dtype=np.float64)[:-1]
            holes = [np.asarray(h.coords, dtype=np.float64)[:-1] for h in poly.interiors]
            comps.append(PolygonComponent(ext, holes))
        if not comps:
            raise DegenerateRing("geometry is empty after clipping and repair")
        return cls(comps)

    def to_shapely(self):
        polys = [Polygon(c.exterior, c.holes) for c in self.components]
        return polys[0] if len(polys) == 1 else MultiPolygon(polys)


def _iter_polygons(geom):
    if geom.is_empty:
        return
    if geom.geom_type == "Polygon":
        yield geom
    elif geom.geom_type in ("MultiPolygon", "GeometryCollection"):
        for g in geom.geoms:
            yield from _iter_polygons(g)
    # non-areal pieces (lines, points) from validity repair are discarded


def _valid(geom):
    if geom.is_valid:
        return geom
    geom = shapely.set_precision(geom, SNAP_TOLERANCE)
    if not geom.is_valid:
        geom = shapely.make_valid(geom)
    return geom


def polygon_area(p: PolygonShape) -> float:
    """Shoelace area: exterior areas minus hole areas, over all components."""
    return float(sum(c.area for c in p.components))


def polygon_perimeter(p: PolygonShape) -> float:
    """Total boundary length over all exterior rings and holes.

    Single-boundary metrics should pass ``largest_component_exterior``
    output through ``ring_length`` instead.
    """
    total = 0.0
    for c in p.components:
        total += ring_length(c.exterior)
        total += sum(ring_length(h) for h in c.holes)
    return total


def polygon_iou(a: PolygonShape, b: PolygonShape) -> float:
    """Exact-boolean intersection-over-union; 0 when the union has no area."""
    ga, gb = a.to_shapely(), b.to_shapely()
    inter = ga.intersection(gb).area
    union = ga.union(gb).area
    return inter / union if union > 0.0 else 0.0


def box_iou(a: "BoxRect", b: "BoxRect") -> float:
    """Closed-form IoU of two axis-aligned rectangles (test reference)."""
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter
    return inter / union if union > 0.0 else 0.0


def boundary_sample_count(length: float) -> int:
    """Adaptive boundary sample count: clamp(ceil(L/step), 32, 512)."""
    if length < 0.0:
        raise ValueError("negative perimeter")
    # 1e-9 guard keeps exact multiples of the step from rounding up
    n = math.ceil(length / ARC_STEP - 1e-9)
    return int(min(MAX_BOUNDARY_SAMPLES, max(MIN_BOUNDARY_SAMPLES, n)))


def resample_boundary(ring: Ring, n: int) -> np.ndarray:
    """Resample a closed ring to n points uniform in arc length.

    The first output point is vertex 0 and traversal order is preserved.
    """
    if n < 3:
        raise ValueError("need at least 3 samples")
    r = as_points(ring)
    closed = np.vstack([r, r[:1]])
    seg = np.hypot(*np.diff(closed, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total <= 0.0:
        return np.repeat(r[:1], n, axis=0)
    targets = np.arange(n) * (total / n)
    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(seg) - 1)
    frac = (targets - cum[idx]) / np.where(seg[idx] > 0.0, seg[idx], 1.0)
    return closed[idx] + frac[:, None] * (closed[idx + 1] - closed[idx])


@dataclass(frozen=True)
class BoxRect:
    """Axis-aligned box in normalized coordinates."""

    x1: float
    y1: float
    x2: float
    y2: float


def box_to_polygon(b: BoxRect) -> PolygonShape:
    """Rectangle polygon of a normalized box, clipped to the unit square."""
    x1, x2 = sorted((min(max(b.x1, 0.0), 1.0), min(max(b.x2, 0.0), 1.0)))
    y1, y2 = sorted((min(max(b.y1, 0.0), 1.0), min(max(b.y2, 0.0), 1.0)))
    if x2 - x1 <= 0.0 or y2 - y1 <= 0.0:
        raise DegenerateRing("box has zero area after clipping")
    ring = np.array([[x1, y1], [x2, y1], [x2, y2], [x1, y2]])
    return PolygonShape([PolygonComponent(ring)])


def largest_component_exterior(p: PolygonShape) -> Ring:
    """Exterior ring of the maximum-area component (first occurrence wins ties)."""
    if not p.components:
        raise DegenerateRing("empty polygon")
    best = max(range(len(p.components)), key=lambda i: (p.components[i].area, -i))
    return p.components[best].exterior


@dataclass(frozen=True)
class PreprocessMeta:
    """Letterbox preprocessing parameters of one image."""

    rx: float
    ry: float
    px: float
    py: float
    width: int
    height: int

    def __post_init__(self):
        if self.rx <= 0.0 or self.ry <= 0.0:
            raise ValueError("scale factors must be positive")


def norm_to_pixel(pts, width: int, height: int) -> np.ndarray:
    """Map normalized points to pixel coordinates of a W x H image."""
    if width <= 0 or height <= 0:
        raise ValueError("image dimensions must be positive")
    return as_points(pts) * np.array([float(width), float(height)])


def inverse_preprocess(pts_net, meta: PreprocessMeta) -> np.ndarray:
    """Undo letterboxing: network-input pixels back to original-image pixels."""
    p = as_points(pts_net)
    return (p - np.array([meta.px, meta.py])) / np.array([meta.rx, meta.ry])
