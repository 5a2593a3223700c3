"""Cubic B-spline parameterization, knot placement, least-squares fitting.

The chain parameter ``t`` is cumulative travel: Euclidean step lengths
inside each segment plus the stored Euclidean gap between consecutive
segments, so occluded stretches keep their share of the parameter range.
Interior knots are data parameters themselves, picked equidistantly by
element index; this interleaves knots and data and keeps the collocation
problem full-rank (Schoenberg-Whitney).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .chainer import SegmentChain
    from .mask_io import DepthMap

DEGREE = 3


class InsufficientDataError(ValueError):
    """Too few chain points to place the requested knots."""


class NoDepthSupportError(ValueError):
    """No valid depth reading anywhere along a chain."""


@dataclass
class BSplineCurve:
    """Clamped B-spline: degree, knot vector, control points (2D or 3D)."""

    degree: int
    knots: np.ndarray
    control_points: np.ndarray

    def __post_init__(self):
        self.knots = np.asarray(self.knots, dtype=float)
        self.control_points = np.asarray(self.control_points, dtype=float)

    @property
    def t_range(self) -> tuple[float, float]:
        return float(self.knots[self.degree]), float(self.knots[-self.degree - 1])

    @property
    def dim(self) -> int:
        return self.control_points.shape[1]

    def evaluate(self, t) -> np.ndarray:
        return evaluate(self, t)


@dataclass
class ParameterizedChain:
    """Strictly increasing parameter vector with matching 2D/3D coordinates."""

    t: np.ndarray
    coords: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.coords = np.asarray(self.coords, dtype=float)
        if len(self.t) != len(self.coords):
            raise ValueError("t and coords length mismatch")


def parameterize(chain: "SegmentChain") -> ParameterizedChain:
    """Concatenate a chain's pixels and build the cumulative-distance parameter.

    Steps inside a segment contribute their Euclidean length (1 or sqrt 2);
    each junction contributes the stored gap distance. Duplicate parameter
    values (zero-width gaps) are collapsed keeping the first occurrence.
    """
    if not chain.segments:
        raise ValueError("cannot parameterize an empty chain")
    coords_parts = []
    steps_parts = []
    for i, (path, reverse) in enumerate(chain.segments):
        pts = path.points[::-1] if reverse else path.points
        pts = pts.astype(float)
        if i > 0:
            steps_parts.append(np.array([chain.gap_distances[i - 1]]))
        if len(pts) > 1:
            steps_parts.append(np.hypot(*np.diff(pts, axis=0).T))
        coords_parts.append(pts)
    coords = np.concatenate(coords_parts)
    steps = np.concatenate(steps_parts) if steps_parts else np.empty(0)
    t = np.concatenate([[0.0], np.cumsum(steps)])
    keep = np.concatenate([[True], np.diff(t) > 0])
    return ParameterizedChain(t=t[keep], coords=coords[keep])


def place_knots(t: np.ndarray, k: int) -> np.ndarray:
    """Clamped cubic knot vector with k interior knots taken from t.

    Interior knot j sits at element index round((j+1)(len(t)-1)/(k+1)),
    rounding halves up. Ends are repeated degree+1 times.
    """
    t = np.asarray(t, dtype=float)
    n = len(t)
    if k < 1:
        raise ValueError(f"knot count must be >= 1, got {k}")
    if n < k + 4:
        raise InsufficientDataError(f"{n} parameters cannot support {k} interior knots")
    idx = np.floor(np.arange(1, k + 1) * (n - 1) / (k + 1) + 0.5).astype(int)
    interior = t[idx]
    if np.any(np.diff(interior) <= 0) or interior[0] <= t[0] or interior[-1] >= t[-1]:
        raise RuntimeError("interior knots not strictly increasing; t not deduplicated?")
    return np.concatenate([np.repeat(t[0], 4), interior, np.repeat(t[-1], 4)])


def _find_spans(knots: np.ndarray, t: np.ndarray) -> np.ndarray:
    spans = np.searchsorted(knots, t, side="right") - 1
    return np.clip(spans, DEGREE, len(knots) - DEGREE - 2)


def _basis_values(knots: np.ndarray, t: np.ndarray, spans: np.ndarray) -> np.ndarray:
    """Nonzero cubic basis values at each t; column j is basis span-3+j."""
    nq = len(t)
    values = np.zeros((nq, DEGREE + 1))
    values[:, 0] = 1.0
    left = np.empty((nq, DEGREE))
    right = np.empty((nq, DEGREE))
    for j in range(1, DEGREE + 1):
        left[:, j - 1] = t - knots[spans + 1 - j]
        right[:, j - 1] = knots[spans + j] - t
        saved = np.zeros(nq)
        for r in range(j):
            denom = right[:, r] + left[:, j - r - 1]
            frac = np.divide(values[:, r], denom, out=np.zeros(nq), where=denom != 0)
            values[:, r] = saved + right[:, r] * frac
            saved = left[:, j - r - 1] * frac
        values[:, j] = saved
    return values


def evaluate(curve: BSplineCurve, t) -> np.ndarray:
    """De Boor evaluation at t (scalar or array); exact at the clamped ends."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    t_min, t_max = curve.t_range
    tol = 1e-9 * max(1.0, t_max - t_min)
    if np.any(t_arr < t_min - tol) or np.any(t_arr > t_max + tol):
        raise ValueError(f"parameter outside [{t_min}, {t_max}]")
    t_arr = np.clip(t_arr, t_min, t_max)
    spans = _find_spans(curve.knots, t_arr)
    values = _basis_values(curve.knots, t_arr, spans)
    cols = spans[:, None] + np.arange(DEGREE + 1)[None, :] - DEGREE
    pts = np.einsum("nj,njd->nd", values, curve.control_points[cols])
    return pts[0] if np.isscalar(t) or np.ndim(t) == 0 else pts


def _design_matrix(knots: np.ndarray, t: np.ndarray) -> np.ndarray:
    n_ctrl = len(knots) - DEGREE - 1
    spans = _find_spans(knots, t)
    values = _basis_values(knots, t, spans)
    design = np.zeros((len(t), n_ctrl))
    cols = spans[:, None] + np.arange(DEGREE + 1)[None, :] - DEGREE
    design[np.arange(len(t))[:, None], cols] = values
    return design


def fit(pc: ParameterizedChain, k: int) -> BSplineCurve:
    """Least-squares cubic fit with k interior knots (per coordinate dimension).

    When the chain is too short for k, k falls back to max(1, len(t) - 4)
    so short visible cables still get a curve; chains below 5 points raise
    InsufficientDataError.
    """
    n = len(pc.t)
    if n < k + 4:
        k = max(1, n - 4)
    if n < k + 4:
        raise InsufficientDataError(f"chain of {n} points cannot support a cubic fit")
    knots = place_knots(pc.t, k)
    design = _design_matrix(knots, pc.t)
    coef, _, rank, _ = np.linalg.lstsq(design, pc.coords, rcond=None)
    if rank != design.shape[1]:
        raise RuntimeError(
            f"rank-deficient collocation matrix ({rank} < {design.shape[1]})"
        )
    return BSplineCurve(degree=DEGREE, knots=knots, control_points=coef)


def lift_to_3d(pc: ParameterizedChain, depth: "DepthMap") -> ParameterizedChain:
    """Attach depth as a third coordinate, keeping the 2D parameter vector.

    Invalid depth pixels get z interpolated linearly in t between the
    nearest valid readings; beyond the outermost valid readings z clamps.
    """
    xs = np.rint(pc.coords[:, 0]).astype(int)
    ys = np.rint(pc.coords[:, 1]).astype(int)
    valid = depth.valid[ys, xs]
    if not valid.any():
        raise NoDepthSupportError("no valid depth along chain")
    z = np.interp(pc.t, pc.t[valid], depth.values[ys[valid], xs[valid]])
    return ParameterizedChain(t=pc.t, coords=np.column_stack([pc.coords[:, :2], z]))
