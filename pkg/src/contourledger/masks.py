"""Binary masks: lattice contour tracing and run-length coding.

The tracer walks the boundary of the union of foreground pixel squares,
so a traced polygon's area equals the foreground pixel count exactly
(divided by W*H after normalization).  Vertices are emitted only at
direction changes; collapsing collinear lattice steps is lossless, and
no other simplification is ever applied.

Run-length layout: uint32 runs over the row-major grid, background
first, alternating.  Runs never span a row boundary; a zero-length
foreground run is inserted where needed so the background-first
alternation stays intact across rows.  The cropped variant encodes the
tight foreground window and remembers its pixel origin.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateRing, EmptyMask, MalformedRle
from .geometry import PolygonShape

_CROP_HEADER = struct.Struct("<4I")  # u0, v0, width, height


@dataclass
class BinaryMask:
    width: int
    height: int
    data: np.ndarray  # (height, width), bool or numeric

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim == 1:
            arr = arr.reshape(self.height, self.width)
        if arr.shape != (self.height, self.width):
            raise ValueError(f"mask data shape {arr.shape} != ({self.height}, {self.width})")
        self.data = arr

    def foreground(self, threshold: float = 0.5) -> np.ndarray:
        """Boolean foreground grid; numeric (probability) data is thresholded."""
        if self.data.dtype == bool:
            return self.data
        return self.data > threshold


@dataclass
class RleMask:
    width: int
    height: int
    runs: list[int]
    crop_origin: Optional[tuple[int, int]] = None  # (u0, v0) pixel offset

    def payload_bytes(self) -> bytes:
        """Stable byte layout: optional crop header, then uint32 runs."""
        body = np.asarray(self.runs, dtype="<u4").tobytes()
        if self.crop_origin is None:
            return body
        u0, v0 = self.crop_origin
        return _CROP_HEADER.pack(u0, v0, self.width, self.height) + body

    @classmethod
    def from_payload_bytes(cls, data: bytes, width: int = 0, height: int = 0,
                           cropped: bool = False) -> "RleMask":
        if cropped:
            if len(data) < _CROP_HEADER.size:
                raise MalformedRle("cropped payload shorter than its header")
            u0, v0, width, height = _CROP_HEADER.unpack_from(data)
            body = data[_CROP_HEADER.size:]
            origin = (u0, v0)
        else:
            body = data
            origin = None
        if len(body) % 4:
            raise MalformedRle("run payload length is not a multiple of 4")
        runs = np.frombuffer(body, dtype="<u4").tolist()
        rle = cls(width, height, runs, origin)
        if sum(runs) != width * height:
            raise MalformedRle(f"runs sum to {sum(runs)}, expected {width * height}")
        return rle


def _encode_rows(grid: np.ndarray) -> list[int]:
    runs: list[int] = []
    for row in grid:
        changes = np.flatnonzero(np.diff(row.astype(np.int8)))
        bounds = np.concatenate(([0], changes + 1, [row.size]))
        if row.size and row[0]:
            runs.append(0)
        runs.extend(int(v) for v in np.diff(bounds))
        if len(runs) % 2:
            runs.append(0)  # keep next row starting on a background slot
    if runs and runs[-1] == 0:
        runs.pop()
    return runs


def rle_encode(mask: BinaryMask, crop: bool = False, threshold: float = 0.5) -> RleMask:
    fg = mask.foreground(threshold)
    if not crop:
        return RleMask(mask.width, mask.height, _encode_rows(fg))
    rows = np.flatnonzero(fg.any(axis=1))
    cols = np.flatnonzero(fg.any(axis=0))
    if rows.size == 0:
        return RleMask(0, 0, [], crop_origin=(0, 0))
    r0, r1 = int(rows[0]), int(rows[-1])
    c0, c1 = int(cols[0]), int(cols[-1])
    window = fg[r0:r1 + 1, c0:c1 + 1]
    return RleMask(c1 - c0 + 1, r1 - r0 + 1, _encode_rows(window), crop_origin=(c0, r0))


def rle_decode(rle: RleMask) -> BinaryMask:
    """Rebuild the encoded region (full mask, or the cropped window)."""
    runs = np.asarray(rle.runs, dtype=np.int64)
    if runs.size and runs.min() < 0:
        raise MalformedRle("negative run length")
    total = int(runs.sum())
    if total != rle.width * rle.height:
        raise MalformedRle(f"runs sum to {total}, expected {rle.width * rle.height}")
    values = np.zeros(len(runs), dtype=bool)
    values[1::2] = True
    flat = np.repeat(values, runs)
    return BinaryMask(rle.width, rle.height, flat.reshape(rle.height, rle.width))


# ---------------------------------------------------------------------------
# Lattice boundary tracing
# ---------------------------------------------------------------------------

def trace_lattice_loops(fg: np.ndarray) -> list[np.ndarray]:
    """Trace boundary loops of the foreground pixel-square union.

    Returns corner-only integer rings in (x=col, y=row) lattice units.
    Exterior loops come out with positive shoelace area, holes negative.
    Loops pinched at lattice corners are split so every ring is simple.
    """
    h, w = fg.shape
    z_row = np.zeros((1, w), dtype=bool)
    z_col = np.zeros((h, 1), dtype=bool)
    # directed edges with foreground on the left of travel
    specs = [
        (fg & ~np.vstack([z_row, fg[:-1]]), 0, 0, 1, 0),   # top:    (c,r)->(c+1,r)
        (fg & ~np.hstack([fg[:, 1:], z_col]), 1, 0, 0, 1),  # right:  (c+1,r)->(c+1,r+1)
        (fg & ~np.vstack([fg[1:], z_row]), 1, 1, -1, 0),    # bottom: (c+1,r+1)->(c,r+1)
        (fg & ~np.hstack([z_col, fg[:, :-1]]), 0, 1, 0, -1),  # left:  (c,r+1)->(c,r)
    ]
    froms: list[tuple[int, int]] = []
    dirs: list[tuple[int, int]] = []
    out_at: dict[tuple[int, int], list[int]] = {}
    for sel, ox, oy, dx, dy in specs:
        rr, cc = np.nonzero(sel)
        for r, c in zip(rr.tolist(), cc.tolist()):
            v = (c + ox, r + oy)
            out_at.setdefault(v, []).append(len(froms))
            froms.append(v)
            dirs.append((dx, dy))
    n = len(froms)
    successor = [0] * n
    for i in range(n):
        dx, dy = dirs[i]
        head = (froms[i][0] + dx, froms[i][1] + dy)
        cands = out_at[head]
        if len(cands) == 1:
            successor[i] = cands[0]
        else:
            # at a checkerboard corner take the leftmost turn; pinched
            # loops are split afterwards so the choice only fixes order
            successor[i] = max(cands, key=lambda j: dx * dirs[j][1] - dy * dirs[j][0])
    loops: list[np.ndarray] = []
    seen = [False] * n
    for start in range(n):
        if seen[start]:
            continue
        corners: list[tuple[int, int]] = []
        i = start
        while not seen[i]:
            seen[i] = True
            j = successor[i]
            if dirs[j] != dirs[i]:
                corners.append(froms[j])
            i = j
        loops.extend(_split_pinched(corners))
    return [np.array(ring, dtype=np.float64) for ring in loops]


def _split_pinched(corners: list[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    rings: list[list[tuple[int, int]]] = []
    index: dict[tuple[int, int], int] = {}
    cur: list[tuple[int, int]] = []
    for v in corners:
        if v in index:
            k = index[v]
            rings.append(cur[k:])
            for u in cur[k + 1:]:
                index.pop(u)
            del cur[k + 1:]
        else:
            index[v] = len(cur)
            cur.append(v)
    if cur:
        rings.append(cur)
    return rings


def _ring_signed_area(ring: np.ndarray) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _point_in_lattice_ring(px: float, py: float, ring: np.ndarray) -> bool:
    # probe points sit at half-integer offsets, so a horizontal ray never
    # grazes a vertex of these integer, axis-aligned rings
    x, y = ring[:, 0], ring[:, 1]
    x2, y2 = np.roll(x, -1), np.roll(y, -1)
    vertical = x == x2
    lo = np.minimum(y, y2)
    hi = np.maximum(y, y2)
    crossing = vertical & (lo < py) & (py < hi) & (x > px)
    return bool(np.count_nonzero(crossing) % 2)


def mask_to_polygons(mask: BinaryMask, threshold: float = 0.5) -> PolygonShape:
    """Two-level contour extraction: outer rings plus first-level holes.

    Vertices are normalized by mask width/height, then the standard
    regularize/clip/repair pipeline applies.  An all-background mask
    rejects the instance.
    """
    fg = mask.foreground(threshold)
    if not fg.any():
        raise EmptyMask("mask has no foreground pixels")
    loops = trace_lattice_loops(fg)
    exteriors = []
    holes = []
    for ring in loops:
        if len(ring) < 3:
            continue
        if _ring_signed_area(ring) > 0:
            exteriors.append(ring)
        else:
            holes.append(ring)
    assignments: list[list[np.ndarray]] = [[] for _ in exteriors]
    ext_areas = [_ring_signed_area(r) for r in exteriors]
    for hole in holes:
        dx, dy = np.sign(hole[1] - hole[0])
        # center of the enclosed-side pixel along the first unit step of the
        # first edge: background lies to the right of travel, and a
        # half-integer probe keeps the ray cast away from ring vertices
        px = hole[0][0] + 0.5 * dx + 0.5 * dy
        py = hole[0][1] + 0.5 * dy - 0.5 * dx
        best = None
        for i, ext in enumerate(exteriors):
            if _point_in_lattice_ring(px, py, ext):
                if best is None or ext_areas[i] < ext_areas[best]:
                    best = i
        if best is not None:
            assignments[best].append(hole)
    scale = np.array([mask.width, mask.height], dtype=np.float64)
    comps = [(ext / scale, [h / scale for h in assignments[i]])
             for i, ext in enumerate(exteriors)]
    try:
        return PolygonShape.from_components(comps)
    except DegenerateRing as exc:
        raise EmptyMask(f"mask produced no valid polygon ({exc})") from exc
