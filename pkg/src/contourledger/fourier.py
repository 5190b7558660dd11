"""Fixed-order Fourier contour descriptor: fit, reconstruct, serialize.

A closed contour is carried as the coefficient vector
[a0, c0, a1, b1, c1, d1, ..., a_n, b_n, c_n, d_n] of length 2 + 4n:
x(t) = a0 + sum_k a_k cos(kt) + b_k sin(kt), y(t) likewise with c/d.
(a0, c0) is the contour center.

Descriptors live in one of three coordinate spaces: normalized image
units, pixels, or detection-grid units (pixels divided by a level
stride).  The storage payload is the coefficient vector in channel order
as little-endian IEEE-754 half floats, so an order-16 descriptor is
exactly 66 * 2 = 132 bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    InsufficientSamples,
    OrderOutOfRange,
    PayloadSizeMismatch,
    SpaceMismatch,
)
from .geometry import as_points

SPACE_NORMALIZED = "normalized"
SPACE_PIXEL = "pixel"
SPACE_GRID = "grid"

DEFAULT_ORDER = 16
DEFAULT_FIT_SAMPLES = 256
DEFAULT_RECON_SAMPLES = 256


@dataclass
class FourierDescriptor:
    a0: float
    c0: float
    harmonics: np.ndarray  # (order, 4): columns a_k, b_k, c_k, d_k
    space: str = SPACE_NORMALIZED

    def __post_init__(self):
        h = np.asarray(self.harmonics, dtype=np.float64)
        if h.ndim != 2 or h.shape[1] != 4 or h.shape[0] < 1:
            raise ValueError(f"harmonics must be (order, 4), got {h.shape}")
        if not (np.isfinite(self.a0) and np.isfinite(self.c0) and np.all(np.isfinite(h))):
            raise ValueError("descriptor coefficients must be finite")
        self.harmonics = h

    @property
    def order(self) -> int:
        return self.harmonics.shape[0]

    @property
    def length(self) -> int:
        """Coefficient count 2 + 4 * order."""
        return 2 + 4 * self.order

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate(([self.a0, self.c0], self.harmonics.ravel()))

    @classmethod
    def from_vector(cls, vec, space: str = SPACE_NORMALIZED) -> "FourierDescriptor":
        v = np.asarray(vec, dtype=np.float64).ravel()
        if v.size < 6 or (v.size - 2) % 4:
            raise ValueError(f"coefficient vector length {v.size} is not 2 + 4n")
        return cls(float(v[0]), float(v[1]), v[2:].reshape(-1, 4), space)

    def spectrum(self) -> np.ndarray:
        """Per-order magnitude sqrt(a^2 + b^2 + c^2 + d^2)."""
        return np.sqrt(np.sum(self.harmonics ** 2, axis=1))


@dataclass(frozen=True)
class GridLocation:
    """Detection-grid cell: level stride and integer cell indices."""

    stride: int
    u: int
    v: int

    def __post_init__(self):
        if self.stride <= 0 or self.u < 0 or self.v < 0:
            raise ValueError("stride must be positive and cell indices non-negative")


def fit(points, order: int = DEFAULT_ORDER, space: str = SPACE_NORMALIZED) -> FourierDescriptor:
    """Fit a descriptor to uniformly resampled closed boundary points.

    Discrete expansion at phases t_q = 2*pi*q/Q: the center is the point
    mean and each harmonic is 2/Q times the cos/sin-weighted sums.  The
    sample count must satisfy Q >= 2*order + 1 so the harmonics are
    below the Nyquist limit of the sampling.
    """
    pts = as_points(points)
    q = len(pts)
    if q < 2 * order + 1:
        raise InsufficientSamples(f"{q} samples cannot support order {order} (need {2 * order + 1})")
    t = 2.0 * np.pi * np.arange(q) / q
    ang = np.arange(1, order + 1)[:, None] * t[None, :]
    cos_t, sin_t = np.cos(ang), np.sin(ang)
    x, y = pts[:, 0], pts[:, 1]
    harmonics = np.stack([cos_t @ x, sin_t @ x, cos_t @ y, sin_t @ y], axis=1) * (2.0 / q)
    return FourierDescriptor(float(x.mean()), float(y.mean()), harmonics, space)


def reconstruct(desc: FourierDescriptor, samples: int = DEFAULT_RECON_SAMPLES) -> np.ndarray:
    """Evaluate the series at t_s = 2*pi*s/T, s = 0..T-1 (closure implicit)."""
    if samples < 3:
        raise ValueError("need at least 3 samples")
    t = 2.0 * np.pi * np.arange(samples) / samples
    ang = np.arange(1, desc.order + 1)[:, None] * t[None, :]
    cos_t, sin_t = np.cos(ang), np.sin(ang)
    a, b, c, d = desc.harmonics.T
    x = desc.a0 + a @ cos_t + b @ sin_t
    y = desc.c0 + c @ cos_t + d @ sin_t
    return np.stack([x, y], axis=1)


def truncate(desc: FourierDescriptor, order: int) -> FourierDescriptor:
    """Keep the first `order` harmonics; the center is untouched."""
    if not 1 <= order <= desc.order:
        raise OrderOutOfRange(f"order {order} outside [1, {desc.order}]")
    return replace(desc, harmonics=desc.harmonics[:order].copy())


def grid_decode(desc: FourierDescriptor, loc: GridLocation) -> FourierDescriptor:
    """Grid-unit coefficients at a grid cell -> pixel-space coefficients."""
    if desc.space != SPACE_GRID:
        raise SpaceMismatch(f"expected grid-space descriptor, got {desc.space!r}")
    s = float(loc.stride)
    return FourierDescriptor(
        (loc.u + desc.a0) * s, (loc.v + desc.c0) * s, desc.harmonics * s, SPACE_PIXEL
    )


def grid_encode(desc: FourierDescriptor, loc: GridLocation) -> FourierDescriptor:
    """Exact inverse of grid_decode."""
    if desc.space != SPACE_PIXEL:
        raise SpaceMismatch(f"expected pixel-space descriptor, got {desc.space!r}")
    s = float(loc.stride)
    return FourierDescriptor(
        desc.a0 / s - loc.u, desc.c0 / s - loc.v, desc.harmonics / s, SPACE_GRID
    )


def to_pixel_space(desc: FourierDescriptor, width: int, height: int) -> FourierDescriptor:
    if desc.space != SPACE_NORMALIZED:
        raise SpaceMismatch(f"expected normalized descriptor, got {desc.space!r}")
    h = desc.harmonics * np.array([width, width, height, height], dtype=np.float64)
    return FourierDescriptor(desc.a0 * width, desc.c0 * height, h, SPACE_PIXEL)


def to_normalized_space(desc: FourierDescriptor, width: int, height: int) -> FourierDescriptor:
    if desc.space != SPACE_PIXEL:
        raise SpaceMismatch(f"expected pixel-space descriptor, got {desc.space!r}")
    h = desc.harmonics / np.array([width, width, height, height], dtype=np.float64)
    return FourierDescriptor(desc.a0 / width, desc.c0 / height, h, SPACE_NORMALIZED)


def payload_size(order: int) -> int:
    """Payload byte count for a given harmonic order (half floats)."""
    return 2 * (2 + 4 * order)


def serialize_payload(desc: FourierDescriptor) -> bytes:
    """Coefficient vector in channel order, little-endian half precision."""
    return desc.vector.astype("<f2").tobytes()


def deserialize_payload(data: bytes, space: str = SPACE_NORMALIZED) -> FourierDescriptor:
    if len(data) % 2:
        raise PayloadSizeMismatch(f"payload of {len(data)} bytes is not half-float aligned")
    m = len(data) // 2
    if m < 6 or (m - 2) % 4:
        raise PayloadSizeMismatch(f"{m} coefficients do not form a 2 + 4n vector")
    vec = np.frombuffer(data, dtype="<f2").astype(np.float64)
    return FourierDescriptor.from_vector(vec, space)
