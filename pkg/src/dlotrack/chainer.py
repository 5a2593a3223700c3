"""Greedy joining of skeleton segments into per-cable ordered chains.

Candidate endpoint pairs are scored with J = m*J_d + (1-m)*J_o, mixing the
Euclidean endpoint gap (pixels) with how far both endpoint tangents deviate
from a smooth continuation (radians, 0 for a perfect head-on joint). Pairs
are committed cheapest first while J stays below j_th; consumed endpoints
and pairs that would close a cycle are skipped. Each resulting connected
sequence of segments is one cable instance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .walker import PixelPath

HEAD = 0
TAIL = 1


@dataclass
class ChainerParams:
    m: float = 0.05
    p: int = 10
    j_th: float = 10.0
    w: int = 10

    def __post_init__(self):
        if not 0.0 <= self.m <= 1.0:
            raise ValueError(f"m must be in [0, 1], got {self.m}")
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.j_th <= 0:
            raise ValueError(f"j_th must be positive, got {self.j_th}")
        if self.w < 2:
            raise ValueError(f"w must be >= 2, got {self.w}")


@dataclass
class EndpointDescriptor:
    segment_id: int
    end: int
    position: np.ndarray
    outgoing_tangent: np.ndarray


@dataclass
class SegmentChain:
    """Ordered segments with per-junction reversal flags and gap lengths.

    After applying the flags, each segment's last pixel is the junction
    partner of the next segment's first pixel; gap_distances[i] is the
    Euclidean distance across junction i.
    """

    segments: list[tuple[PixelPath, bool]]
    gap_distances: list[float]

    def __post_init__(self):
        if len(self.gap_distances) != max(0, len(self.segments) - 1):
            raise ValueError("need exactly one gap distance per junction")

    def first_point(self) -> np.ndarray:
        path, rev = self.segments[0]
        return path.points[-1] if rev else path.points[0]

    def last_point(self) -> np.ndarray:
        path, rev = self.segments[-1]
        return path.points[0] if rev else path.points[-1]

    def point_count(self) -> int:
        return sum(len(path) for path, _ in self.segments)


def reverse_chain(chain: SegmentChain) -> SegmentChain:
    segments = [(path, not rev) for path, rev in reversed(chain.segments)]
    return SegmentChain(segments, chain.gap_distances[::-1])


def filter_short(paths: list[PixelPath], p: int) -> list[PixelPath]:
    """Keep paths with at least p pixels; order preserved."""
    return [path for path in paths if len(path) >= p]


def endpoint_tangent(path: PixelPath, end: int, w: int) -> np.ndarray:
    """Unit vector at one end, pointing away from the path interior.

    Differenced against the pixel w-1 steps inside (clamped to the far
    end on short paths); w trades noise robustness against locality.
    """
    pts = path.points
    n = len(pts)
    if n < 2:
        raise ValueError("cannot orient a single-point path")
    if end == TAIL:
        vec = pts[-1] - pts[max(0, n - w)]
    else:
        vec = pts[0] - pts[min(n - 1, w - 1)]
    return vec / np.linalg.norm(vec)


def pair_cost(a: EndpointDescriptor, b: EndpointDescriptor, m: float) -> float:
    """J = m*J_d + (1-m)*J_o for one candidate junction.

    J_o sums each tangent's angle to the line toward the other endpoint;
    collinear head-on endpoints give 0, anti-aligned ones 2*pi. Coincident
    positions leave the direction undefined and count as a perfect joint.
    """
    diff = b.position - a.position
    j_d = float(np.linalg.norm(diff))
    if j_d == 0.0:
        return 0.0
    u = diff / j_d
    phi_a = np.arccos(np.clip(np.dot(a.outgoing_tangent, u), -1.0, 1.0))
    phi_b = np.arccos(np.clip(np.dot(b.outgoing_tangent, -u), -1.0, 1.0))
    return m * j_d + (1.0 - m) * float(phi_a + phi_b)


def _endpoint_position(path: PixelPath, end: int) -> np.ndarray:
    return path.points[-1] if end == TAIL else path.points[0]


def chain_greedy(paths: list[PixelPath], params: ChainerParams) -> list[SegmentChain]:
    """Partition segments into chains by committing cheapest joints first.

    Every input path lands in exactly one output chain; chains are ordered
    by their smallest input index. Ties in J break lexicographically on
    (segment, end) ids so reruns are identical.
    """
    descs = []
    for i, path in enumerate(paths):
        if len(path) < 2:
            continue
        for end in (HEAD, TAIL):
            tangent = endpoint_tangent(path, end, params.w)
            descs.append(EndpointDescriptor(i, end, _endpoint_position(path, end), tangent))

    candidates = []
    for ia in range(len(descs)):
        for ib in range(ia + 1, len(descs)):
            a, b = descs[ia], descs[ib]
            if a.segment_id == b.segment_id:
                continue
            j = pair_cost(a, b, params.m)
            if j < params.j_th:
                candidates.append((j, a.segment_id, a.end, b.segment_id, b.end))
    candidates.sort()

    parent = list(range(len(paths)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    used = set()
    links = {}
    for j, seg_a, end_a, seg_b, end_b in candidates:
        if (seg_a, end_a) in used or (seg_b, end_b) in used:
            continue
        root_a, root_b = find(seg_a), find(seg_b)
        if root_a == root_b:
            continue
        parent[root_a] = root_b
        used.add((seg_a, end_a))
        used.add((seg_b, end_b))
        links[(seg_a, end_a)] = (seg_b, end_b)
        links[(seg_b, end_b)] = (seg_a, end_a)

    groups = {}
    for i in range(len(paths)):
        groups.setdefault(find(i), []).append(i)

    chains = []
    for root in sorted(groups, key=lambda r: min(groups[r])):
        members = groups[root]
        terminals = [(s, e) for s in members for e in (HEAD, TAIL) if (s, e) not in used]
        seg, entry = min(terminals)
        segments = []
        gaps = []
        while True:
            segments.append((paths[seg], entry == TAIL))
            exit_end = (seg, TAIL if entry == HEAD else HEAD)
            nxt = links.get(exit_end)
            if nxt is None:
                break
            exit_pos = _endpoint_position(paths[seg], exit_end[1])
            entry_pos = _endpoint_position(paths[nxt[0]], nxt[1])
            gaps.append(float(np.linalg.norm(entry_pos - exit_pos)))
            seg, entry = nxt
        chains.append(SegmentChain(segments, gaps))
    return chains
