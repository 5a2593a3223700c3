"""Traversal of branch-free skeletons into ordered pixel paths.

Endpoints are visited in row-major scan order (top to bottom, left to
right) so repeated runs produce identical path lists. With at most two
neighbors per pixel each walk has at most one way forward, so traversal
is a plain loop. Closed loops have no endpoints; they are cut open at
their scan-order first pixel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .skeleton import Skeleton, neighbor_counts

# Row-major neighbor visiting order, as (dy, dx).
_STEPS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


@dataclass
class PixelPath:
    """Ordered pixel coordinates, consecutive entries 8-adjacent, no repeats."""

    points: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def head(self) -> np.ndarray:
        return self.points[0]

    @property
    def tail(self) -> np.ndarray:
        return self.points[-1]

    @property
    def length_px(self) -> float:
        if len(self.points) < 2:
            return 0.0
        return float(np.hypot(*np.diff(self.points, axis=0).T).sum())


def _walk(img: np.ndarray, visited: np.ndarray, y: int, x: int) -> np.ndarray:
    """Greedy walk over padded coordinates; returns (x, y) points unpadded."""
    pts = [(x, y)]
    visited[y, x] = True
    while True:
        for dy, dx in _STEPS:
            ny, nx = y + dy, x + dx
            if img[ny, nx] and not visited[ny, nx]:
                y, x = ny, nx
                visited[y, x] = True
                pts.append((x, y))
                break
        else:
            break
    return np.array(pts, dtype=float) - 1.0


def walk_segments(skel: Skeleton) -> list[PixelPath]:
    """Partition a skeleton into paths, one per open segment or loop.

    Open segments are walked endpoint to endpoint. Isolated pixels become
    single-point paths (the short filter drops them later). Remaining
    pixels belong to closed loops and are cut open deterministically.
    """
    counts = skel.neighbor_counts()
    if np.any(counts > 2):
        raise ValueError("skeleton has branch points; remove them first")
    img = np.pad(skel.data, 1)
    visited = np.zeros_like(img)
    paths = []
    for y, x in zip(*np.nonzero(counts == 1)):
        if not visited[y + 1, x + 1]:
            paths.append(PixelPath(_walk(img, visited, y + 1, x + 1)))
    for y, x in zip(*np.nonzero(skel.data)):
        if visited[y + 1, x + 1]:
            continue
        if counts[y, x] == 0:
            visited[y + 1, x + 1] = True
            paths.append(PixelPath(np.array([[x, y]], dtype=float)))
        else:
            paths.append(PixelPath(_walk(img, visited, y + 1, x + 1)))
    return paths


def walk_cycle(component: np.ndarray) -> PixelPath:
    """Cut a closed loop into an open path visiting every pixel once.

    Starts at the row-major first pixel and always steps to the scan-order
    smallest unvisited neighbor. Tolerates diagonal chords (2x2 blocks)
    as long as the greedy walk still covers the loop and closes back to
    the start.
    """
    ys, xs = np.nonzero(component)
    if len(ys) == 0:
        raise ValueError("empty component")
    counts = neighbor_counts(component)
    if np.any(counts[component] < 2):
        raise ValueError("component has an endpoint; not a closed loop")
    img = np.pad(component, 1)
    visited = np.zeros_like(img)
    pts = _walk(img, visited, ys[0] + 1, xs[0] + 1)
    closes = np.all(np.abs(pts[-1] - pts[0]) <= 1)
    if len(pts) != len(ys) or not closes:
        raise ValueError("component is not a single connected cycle")
    return PixelPath(pts)
