"""File schemas: line-delimited eval records and descriptor/polygon JSON.

Prediction and ground-truth files are JSON Lines, one record per line.

Ground truth:   {"image_id": str, "class": int, "polygon": ...}
  polygon forms: [[x, y], ...] one ring; [[[x, y], ...], ...] several
  rings (unioned); or {"components": [{"exterior": ring, "holes":
  [ring, ...]}, ...]} for explicit holes.

Prediction:     {"image_id": str, "class": int, "confidence": float,
                 "route": one of R2P | S2P-Mask | S2P-Contour | S2P-Fourier,
                 "payload": route-specific}
  R2P:         [x1, y1, x2, y2] normalized box
  S2P-Contour: ring or list of rings (normalized)
  S2P-Mask:    {"width": int, "height": int, "runs": [int, ...],
                "crop_origin": [u0, v0]?, "size": [W, H]? (required
                when cropped)}
  S2P-Fourier: normalized coefficient vector [a0, c0, a1, b1, c1, d1, ...]

All coordinates are normalized image units in [0, 1].
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DegenerateRing, SchemaError
from .evaluation import ROUTES, ROUTE_BOX, ROUTE_CONTOUR, ROUTE_FOURIER, ROUTE_MASK, \
    GroundTruth, Prediction
from .fourier import FourierDescriptor, SPACE_NORMALIZED, serialize_payload
from .geometry import BoxRect, PolygonShape
from .masks import BinaryMask, RleMask, rle_decode


def _parse_polygon(value, line: int) -> PolygonShape:
    try:
        if isinstance(value, dict):
            comps = [(c["exterior"], c.get("holes", [])) for c in value["components"]]
            return PolygonShape.from_components(comps)
        if not isinstance(value, list) or not value:
            raise SchemaError("polygon must be a non-empty array or components object", line)
        first = value[0]
        if isinstance(first[0], (int, float)):
            return PolygonShape.from_ring(value)
        return PolygonShape.from_rings(value)
    except SchemaError:
        raise
    except DegenerateRing as exc:
        raise SchemaError(f"degenerate polygon: {exc}", line) from exc
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"malformed polygon: {exc}", line) from exc


def _parse_payload(route: str, value, line: int):
    try:
        if route == ROUTE_BOX:
            x1, y1, x2, y2 = (float(v) for v in value)
            return BoxRect(x1, y1, x2, y2)
        if route == ROUTE_CONTOUR:
            return value
        if route == ROUTE_FOURIER:
            return FourierDescriptor.from_vector(value, SPACE_NORMALIZED)
        if route == ROUTE_MASK:
            runs = [int(r) for r in value["runs"]]
            rle = RleMask(int(value["width"]), int(value["height"]), runs,
                          tuple(value["crop_origin"]) if value.get("crop_origin") else None)
            if rle.crop_origin is None:
                return rle
            if "size" not in value:
                raise SchemaError("cropped mask payload needs a full-image 'size'", line)
            w, h = (int(v) for v in value["size"])
            window = rle_decode(rle)
            full = np.zeros((h, w), dtype=bool)
            u0, v0 = rle.crop_origin
            full[v0:v0 + rle.height, u0:u0 + rle.width] = window.data
            return BinaryMask(w, h, full)
    except SchemaError:
        raise
    except Exception as exc:
        raise SchemaError(f"malformed {route} payload: {exc}", line) from exc
    raise SchemaError(f"unknown route {route!r}", line)


def _iter_jsonl(path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                yield lineno, json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc}", lineno) from exc


def load_ground_truths(path) -> list[GroundTruth]:
    out = []
    for lineno, obj in _iter_jsonl(path):
        for key in ("image_id", "class", "polygon"):
            if key not in obj:
                raise SchemaError(f"ground truth missing {key!r}", lineno)
        out.append(GroundTruth(str(obj["image_id"]), int(obj["class"]),
                               _parse_polygon(obj["polygon"], lineno)))
    return out


def load_predictions(path) -> list[Prediction]:
    out = []
    for lineno, obj in _iter_jsonl(path):
        for key in ("image_id", "class", "confidence", "route", "payload"):
            if key not in obj:
                raise SchemaError(f"prediction missing {key!r}", lineno)
        route = str(obj["route"])
        if route not in ROUTES:
            raise SchemaError(f"unknown route {route!r} (expected one of {', '.join(ROUTES)})",
                              lineno)
        out.append(Prediction(str(obj["image_id"]), int(obj["class"]),
                              float(obj["confidence"]), route,
                              _parse_payload(route, obj["payload"], lineno)))
    return out


# ---------------------------------------------------------------------------
# Descriptor and polygon files
# ---------------------------------------------------------------------------

def descriptor_to_dict(desc: FourierDescriptor, include_payload: bool = True) -> dict:
    d = {
        "order": desc.order,
        "space": desc.space,
        "coefficients": [float(v) for v in desc.vector],
    }
    if include_payload and desc.space == SPACE_NORMALIZED:
        d["payload_hex"] = serialize_payload(desc).hex()
    return d


def descriptor_from_dict(obj: dict) -> FourierDescriptor:
    return FourierDescriptor.from_vector(obj["coefficients"],
                                         obj.get("space", SPACE_NORMALIZED))


def save_descriptor(desc: FourierDescriptor, path) -> None:
    Path(path).write_text(json.dumps(descriptor_to_dict(desc), indent=2, sort_keys=True) + "\n")


def load_descriptor(path) -> FourierDescriptor:
    return descriptor_from_dict(json.loads(Path(path).read_text()))


def load_polygon_points(path) -> np.ndarray:
    obj = json.loads(Path(path).read_text())
    pts = obj["points"] if isinstance(obj, dict) else obj
    return np.asarray(pts, dtype=np.float64)


def save_polygon_points(points, path) -> None:
    data = {"points": [[float(x), float(y)] for x, y in np.asarray(points)]}
    Path(path).write_text(json.dumps(data, indent=2) + "\n")
