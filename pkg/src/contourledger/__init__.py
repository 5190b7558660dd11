"""Fourier contour records for defect geometry.

A contour-native representation layer: a finite-order Fourier contour
codec with closed-form phase alignment, grid-unit frequency-domain
supervision math, a unified polygon-space evaluation protocol, an
archive-and-recovery route benchmark over SQLite, and a read-only
review API.
"""

from .errors import (
    ContourLedgerError,
    DegenerateRing,
    EmptyMask,
    EmptyReference,
    InsufficientSamples,
    LengthMismatch,
    MalformedRle,
    NonDivisible,
    OrderMismatch,
    OrderOutOfRange,
    OutOfGrid,
    PayloadSizeMismatch,
    SchemaError,
    ShapeMismatch,
    SpaceMismatch,
    StoreFailure,
)
from .fourier import (
    FourierDescriptor,
    GridLocation,
    deserialize_payload,
    fit,
    grid_decode,
    grid_encode,
    payload_size,
    reconstruct,
    serialize_payload,
    to_normalized_space,
    to_pixel_space,
    truncate,
)
from .geometry import (
    BoxRect,
    PolygonComponent,
    PolygonShape,
    PreprocessMeta,
    boundary_sample_count,
    box_iou,
    box_to_polygon,
    inverse_preprocess,
    largest_component_exterior,
    norm_to_pixel,
    polygon_area,
    polygon_iou,
    polygon_perimeter,
    regularize_ring,
    resample_boundary,
)
from .masks import BinaryMask, RleMask, mask_to_polygons, rle_decode, rle_encode
from .phase import PhasePair, align, propagate_phases, rotate_harmonic, solve_base_phase

__version__ = "0.1.0"
