"""Grid-unit supervision targets and frequency-domain loss evaluation.

Targets are expressed in the grid units of a detection level so a shape
and its scaled copy supervised at proportionally scaled strides produce
identical numbers.  Loss functions here are plain numeric evaluations
(no autograd): batched Smooth-L1 sums with per-order and per-sample
weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    EmptyReference,
    LengthMismatch,
    NonDivisible,
    OutOfGrid,
    ShapeMismatch,
    SpaceMismatch,
)
from .fourier import SPACE_NORMALIZED, FourierDescriptor

DEFAULT_STRIDES = (8, 16, 32)


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int
    strides: tuple[int, ...] = DEFAULT_STRIDES


def grid_size(spec: GridSpec, level: int) -> tuple[int, int]:
    """(grid width, grid height) of one detection level."""
    stride = spec.strides[level]
    if spec.width % stride or spec.height % stride:
        raise NonDivisible(f"{spec.width}x{spec.height} not divisible by stride {stride}")
    return spec.width // stride, spec.height // stride


@dataclass
class SupervisionTarget:
    level: int
    dx: float
    dy: float
    harmonics: np.ndarray  # (order, 4) in grid units


def make_targets(desc: FourierDescriptor, spec: GridSpec, level: int,
                 u: int, v: int) -> SupervisionTarget:
    """Grid-unit regression targets for one positive cell.

    Center targets are offsets of the grid-scaled center from the cell;
    harmonic targets are the normalized coefficients scaled by the grid
    size (x-channels by width, y-channels by height).
    """
    if desc.space != SPACE_NORMALIZED:
        raise SpaceMismatch(f"targets need a normalized descriptor, got {desc.space!r}")
    gw, gh = grid_size(spec, level)
    if not (0 <= u < gw and 0 <= v < gh):
        raise OutOfGrid(f"cell ({u}, {v}) outside {gw}x{gh} grid")
    harmonics = desc.harmonics * np.array([gw, gw, gh, gh], dtype=np.float64)
    return SupervisionTarget(level, gw * desc.a0 - u, gh * desc.c0 - v, harmonics)


def ftnorm_weights(reference: Sequence[FourierDescriptor], floor: float = 1e-4) -> np.ndarray:
    """Inverse-RMS weight per harmonic order over a reference set.

    The RMS pools all four coefficients of an order across the whole set;
    the floor caps the weight of orders whose typical magnitude is
    essentially zero.
    """
    if not reference:
        raise EmptyReference("reference descriptor set is empty")
    orders = {d.order for d in reference}
    if len(orders) != 1:
        raise ShapeMismatch(f"reference set mixes orders {sorted(orders)}")
    stacked = np.stack([d.harmonics for d in reference])  # (R, N, 4)
    rms = np.sqrt(np.mean(stacked ** 2, axis=(0, 2)))
    return 1.0 / np.maximum(rms, floor)


@dataclass
class LossConfig:
    """Weights for the training objective.

    `omega` is the per-order weight vector (ones if unset), `weights` the
    per-sample weights (ones if unset), `normalizer` the factor S
    (defaults to the weight sum), and `beta` the Smooth-L1 transition.
    """

    lambda_xy: float = 1.0
    lambda_coef: float = 1.0
    omega: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    normalizer: Optional[float] = None
    beta: float = 1.0

    def sample_weights(self, batch: int) -> np.ndarray:
        if self.weights is None:
            return np.ones(batch)
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (batch,):
            raise ShapeMismatch(f"{w.shape[0]} sample weights for batch of {batch}")
        return w

    def order_weights(self, order: int) -> np.ndarray:
        if self.omega is None:
            return np.ones(order)
        om = np.asarray(self.omega, dtype=np.float64)
        if om.shape != (order,):
            raise ShapeMismatch(f"{om.shape[0]} order weights for order {order}")
        return om

    def norm_factor(self, w: np.ndarray) -> float:
        s = float(np.sum(w)) if self.normalizer is None else float(self.normalizer)
        if s <= 0.0:
            raise ValueError("normalization factor must be positive")
        return s


def _smooth_l1_elements(diff: np.ndarray, beta: float) -> np.ndarray:
    ad = np.abs(diff)
    return np.where(ad < beta, 0.5 * diff * diff / beta, ad - 0.5 * beta)


def smooth_l1(x, y, beta: float = 1.0) -> float:
    """Element-wise Smooth L1 between two equal-length vectors, summed."""
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    xv = np.asarray(x, dtype=np.float64).ravel()
    yv = np.asarray(y, dtype=np.float64).ravel()
    if xv.shape != yv.shape:
        raise LengthMismatch(f"lengths {xv.size} and {yv.size} differ")
    return float(np.sum(_smooth_l1_elements(xv - yv, beta)))


def _as_batch(arrays, depth: int) -> np.ndarray:
    a = np.stack([np.asarray(x, dtype=np.float64) for x in arrays]) \
        if isinstance(arrays, (list, tuple)) else np.asarray(arrays, dtype=np.float64)
    if a.ndim != depth:
        raise ShapeMismatch(f"expected a {depth}-d batch, got shape {a.shape}")
    return a


def coef_loss(preds, aligned_targets, cfg: LossConfig) -> float:
    """Weighted Smooth-L1 over harmonic quadruples against aligned targets."""
    p = _as_batch(preds, 3)
    t = _as_batch(aligned_targets, 3)
    if p.shape != t.shape or p.shape[2] != 4:
        raise ShapeMismatch(f"prediction batch {p.shape} vs target batch {t.shape}")
    per_order = np.sum(_smooth_l1_elements(p - t, cfg.beta), axis=2)  # (B, N)
    omega = cfg.order_weights(p.shape[1])
    w = cfg.sample_weights(p.shape[0])
    return float(np.dot(w, per_order @ omega) / cfg.norm_factor(w))


def center_loss(pred_offsets, target_offsets, cfg: LossConfig) -> float:
    """Weighted Smooth-L1 over grid-unit center offsets of positive samples."""
    p = _as_batch(pred_offsets, 2)
    t = _as_batch(target_offsets, 2)
    if p.shape != t.shape or p.shape[1] != 2:
        raise ShapeMismatch(f"offset batch {p.shape} vs target batch {t.shape}")
    per_sample = np.sum(_smooth_l1_elements(p - t, cfg.beta), axis=1)
    w = cfg.sample_weights(p.shape[0])
    return float(np.dot(w, per_sample) / cfg.norm_factor(w))


def total_loss(l_det: float, l_xy: float, l_coef: float, cfg: LossConfig) -> float:
    """Detector loss plus weighted center and coefficient terms."""
    return float(l_det + cfg.lambda_xy * l_xy + cfg.lambda_coef * l_coef)
