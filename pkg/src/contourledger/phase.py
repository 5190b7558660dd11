"""Closed-form harmonic phase alignment.

Two parameterizations of the same closed contour that start at different
boundary points differ only by a phase rotation in harmonic space.  The
optimal base phase between a target and a predicted descriptor has a
closed form in terms of their first harmonics; higher orders follow by
analytic phase propagation (k-th complex power).  Rotating the target's
harmonics by the propagated phases yields an aligned supervision target
without any rolling search, and without changing the contour geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import OrderMismatch, SpaceMismatch
from .fourier import FourierDescriptor

DEFAULT_EPS = 1e-12

# First harmonics shorter than this carry no usable phase information.
DEGENERATE_NORM = 1e-9


@dataclass(frozen=True)
class PhasePair:
    """(cos, sin) of one harmonic's rotation angle."""

    c: float
    s: float

    @property
    def angle(self) -> float:
        return math.atan2(self.s, self.c)


def solve_base_phase(gt_h1, pred_h1, eps: float = DEFAULT_EPS) -> PhasePair:
    """Closed-form first-harmonic phase between target and prediction.

    u is the dot correlation of the two quadruples, v the cross phase
    term; eps keeps the normalization finite when both vanish.
    """
    at, bt, ct, dt = np.asarray(gt_h1, dtype=np.float64)
    ap, bp, cp, dp = np.asarray(pred_h1, dtype=np.float64)
    u = at * ap + bt * bp + ct * cp + dt * dp
    v = bt * ap - at * bp + dt * cp - ct * dp
    denom = math.sqrt(u * u + v * v + eps)
    return PhasePair(u / denom, v / denom)


def propagate_phases(base: PhasePair, n: int) -> list[PhasePair]:
    """Phases of orders 1..n as complex powers of the base phase."""
    if n < 1:
        raise ValueError("need at least one order")
    z = complex(base.c, base.s)
    powers = np.cumprod(np.full(n, z, dtype=np.complex128))
    return [PhasePair(float(p.real), float(p.imag)) for p in powers]


def rotate_harmonic(quad, phase: PhasePair):
    """Block rotation of one (a, b, c, d) quadruple by a phase."""
    a, b, c, d = np.asarray(quad, dtype=np.float64)
    cc, ss = phase.c, phase.s
    return np.array([cc * a + ss * b, -ss * a + cc * b,
                     cc * c + ss * d, -ss * c + cc * d])


def align(gt: FourierDescriptor, pred: FourierDescriptor,
          eps: float = DEFAULT_EPS) -> FourierDescriptor:
    """Rotate the target's harmonics into the prediction's phase frame.

    The base phase is solved from the first harmonic only and propagated
    analytically to every order; the center is untouched.  When either
    first harmonic is numerically zero there is no phase information and
    the alignment degenerates to the identity.
    """
    if gt.order != pred.order:
        raise OrderMismatch(f"target order {gt.order} != prediction order {pred.order}")
    if gt.space != pred.space:
        raise SpaceMismatch(f"target space {gt.space!r} != prediction space {pred.space!r}")
    gt1, pred1 = gt.harmonics[0], pred.harmonics[0]
    if np.linalg.norm(gt1) < DEGENERATE_NORM or np.linalg.norm(pred1) < DEGENERATE_NORM:
        return replace(gt, harmonics=gt.harmonics.copy())
    base = solve_base_phase(gt1, pred1, eps)
    norm = math.hypot(base.c, base.s)
    if norm < 0.5:
        # correlation drowned by the stabilizer: no phase information
        return replace(gt, harmonics=gt.harmonics.copy())
    # renormalize so propagated rotations stay orthogonal; the stabilizer
    # otherwise shrinks high orders by (1 - eps/2|q1|^4)^k
    base = PhasePair(base.c / norm, base.s / norm)
    cos_k = np.empty(gt.order)
    sin_k = np.empty(gt.order)
    for k, ph in enumerate(propagate_phases(base, gt.order)):
        cos_k[k], sin_k[k] = ph.c, ph.s
    a, b, c, d = gt.harmonics.T
    rotated = np.stack([
        cos_k * a + sin_k * b,
        -sin_k * a + cos_k * b,
        cos_k * c + sin_k * d,
        -sin_k * c + cos_k * d,
    ], axis=1)
    return replace(gt, harmonics=rotated)
