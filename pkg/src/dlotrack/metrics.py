"""Evaluation measures: mask coverage (MMD based L1/L2) and curve-to-curve
distance (L3).

L3 aligns two polylines by normalized arc length: point i of X is compared
against the segment of Y whose cumulative-length interval contains X's
position, using the clamped closest-point projection. The raw measure is
orientation sensitive, so comparisons of arbitrarily oriented curves go
through l3_aligned, which tries both directions of the second curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .mask_io import BinaryMask
from .spline import BSplineCurve, evaluate


@dataclass
class DiscretizedCurve:
    """Polyline samples plus cumulative arc length normalized to [0, 1]."""

    points: np.ndarray
    cum_norm_dist: np.ndarray

    @classmethod
    def from_points(cls, points) -> "DiscretizedCurve":
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or len(points) < 2:
            raise ValueError("need at least 2 points")
        steps = np.linalg.norm(np.diff(points, axis=0), axis=1)
        total = steps.sum()
        if total == 0:
            raise ValueError("zero-length curve")
        cum = np.concatenate([[0.0], np.cumsum(steps)]) / total
        cum[-1] = 1.0
        return cls(points=points, cum_norm_dist=cum)

    def reverse(self) -> "DiscretizedCurve":
        return DiscretizedCurve(
            points=self.points[::-1].copy(),
            cum_norm_dist=(1.0 - self.cum_norm_dist)[::-1].copy(),
        )


def discretize_curve(curve: BSplineCurve, samples: int = 512) -> DiscretizedCurve:
    if samples < 2:
        raise ValueError("need at least 2 samples")
    t = np.linspace(*curve.t_range, samples)
    return DiscretizedCurve.from_points(evaluate(curve, t))


def mmd(x, y) -> float:
    """Mean over x of the distance to the nearest point of y. Asymmetric."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if len(x) == 0 or len(y) == 0:
        raise ValueError("mmd needs non-empty point sets")
    dist, _ = cKDTree(y).query(x, k=1)
    return float(dist.mean())


def l1_l2(mask: BinaryMask, curves, samples: int = 512) -> tuple[float, float]:
    """(mask-to-curve, curve-to-mask) MMD pair for one or more instances.

    Multi-instance frames are scored against the union of all instance
    samples. 3D curves are compared in their image-plane projection.
    """
    if isinstance(curves, BSplineCurve):
        curves = [curves]
    if not curves:
        raise ValueError("no curves to evaluate")
    pts = np.vstack(
        [evaluate(c, np.linspace(*c.t_range, samples))[:, :2] for c in curves]
    )
    mask_pts = mask.points()
    if len(mask_pts) == 0:
        raise ValueError("empty mask")
    return mmd(mask_pts, pts), mmd(pts, mask_pts)


def _directed(x: DiscretizedCurve, y: DiscretizedCurve) -> float:
    """Mean distance from x's points to their arc-length-aligned y segment."""
    k = np.searchsorted(y.cum_norm_dist, x.cum_norm_dist, side="left") - 1
    k = np.clip(k, 0, len(y.points) - 2)
    a = y.points[k]
    b = y.points[k + 1]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    w = np.divide(
        np.einsum("ij,ij->i", x.points - a, ab),
        denom,
        out=np.zeros(len(k)),
        where=denom > 0,
    )
    proj = a + np.clip(w, 0.0, 1.0)[:, None] * ab
    return float(np.linalg.norm(x.points - proj, axis=1).mean())


def l3(a: DiscretizedCurve, b: DiscretizedCurve) -> float:
    """Symmetrized aligned mean distance; 0 iff the curves coincide."""
    if a.points.shape[1] != b.points.shape[1]:
        raise ValueError("dimension mismatch")
    return 0.5 * (_directed(a, b) + _directed(b, a))


def l3_aligned(a: DiscretizedCurve, b: DiscretizedCurve) -> float:
    """l3 minimized over the orientation of the second curve."""
    return min(l3(a, b), l3(a, b.reverse()))


def match_curves(
    refs: list[DiscretizedCurve], cands: list[DiscretizedCurve]
) -> list[tuple[int, int, float]]:
    """Greedy one-to-one pairing by ascending l3_aligned score."""
    scored = []
    for i, r in enumerate(refs):
        for j, c in enumerate(cands):
            if r.points.shape[1] != c.points.shape[1]:
                continue
            scored.append((l3_aligned(r, c), i, j))
    scored.sort()
    taken_r, taken_c, out = set(), set(), []
    for score, i, j in scored:
        if i in taken_r or j in taken_c:
            continue
        taken_r.add(i)
        taken_c.add(j)
        out.append((i, j, score))
    return out
