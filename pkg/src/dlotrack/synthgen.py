"""Synthetic cable scenes: analytic reference curves rasterized to masks.

Every scenario is a set of cubic B-spline control polygons evolving under a
seeded, bounded random walk. Frames are rendered by stamping disks of the
cable radius along densely sampled curve points (spacing well under half a
pixel, so rasterization error stays below the sampling floor), then cutting
out occlusion rectangles. The analytic curve itself is the ground truth and
is never affected by occlusions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .mask_io import BinaryMask, DepthMap
from .metrics import DiscretizedCurve
from .spline import BSplineCurve, evaluate

DEPTH_MODES = ("none", "plane", "ramp", "curve")
_SAMPLE_SPACING = 0.4


@dataclass
class Occlusion:
    """Axis-aligned rectangle blanked out of the mask while active."""

    x: int
    y: int
    w: int
    h: int
    start: int = 0
    stop: int | None = None

    def active(self, frame: int) -> bool:
        return frame >= self.start and (self.stop is None or frame < self.stop)


@dataclass
class ScenarioSpec:
    frames: int
    width: int
    height: int
    control_points: list[np.ndarray]
    cable_width: float = 5.0
    step_bound: float = 0.0
    margin: float = 25.0
    occlusions: list[Occlusion] = field(default_factory=list)
    depth_mode: str = "none"
    depth_args: tuple[float, ...] = ()

    def __post_init__(self):
        self.control_points = [np.asarray(p, dtype=float) for p in self.control_points]
        if self.frames < 1:
            raise ValueError("need at least one frame")
        if self.cable_width < 3:
            raise ValueError("cable thinner than 3 px does not survive the open")
        if self.depth_mode not in DEPTH_MODES:
            raise ValueError(f"unknown depth mode {self.depth_mode!r}")
        self.depth_args = tuple(float(a) for a in self.depth_args)
        wanted = {"none": 0, "plane": 1, "ramp": 2, "curve": 2}[self.depth_mode]
        if len(self.depth_args) != wanted:
            raise ValueError(
                f"depth mode {self.depth_mode!r} takes {wanted} args, "
                f"got {len(self.depth_args)}"
            )
        if not self.control_points:
            raise ValueError("need at least one instance")
        for poly in self.control_points:
            if poly.ndim != 2 or poly.shape[1] != 2 or len(poly) < 4:
                raise ValueError("each control polygon needs >= 4 2D points")
            if (
                poly.min() < 0
                or poly[:, 0].max() >= self.width
                or poly[:, 1].max() >= self.height
            ):
                raise ValueError("control polygon outside image bounds")
        if 2 * self.margin >= min(self.width, self.height):
            raise ValueError("margin leaves no interior")

    @property
    def instance_count(self) -> int:
        return len(self.control_points)


@dataclass
class GroundTruth:
    """Reference curves for every frame of a scenario."""

    frames: list[list[DiscretizedCurve]]


def reference_curve(polygon: np.ndarray) -> BSplineCurve:
    """Clamped uniform cubic B-spline on [0, 1] for a control polygon."""
    polygon = np.asarray(polygon, dtype=float)
    interior = len(polygon) - 4
    knots = np.concatenate(
        [np.zeros(4), (np.arange(interior) + 1) / (interior + 1), np.ones(4)]
    )
    return BSplineCurve(degree=3, knots=knots, control_points=polygon)


def evolve(spec: ScenarioSpec, seed: int) -> list[list[np.ndarray]]:
    """Per-frame control polygons under a velocity-damped random walk.

    Per-point displacement per frame never exceeds step_bound; positions
    reflect off the margin box. Each instance gets its own substream so
    adding instances does not reshuffle existing ones.
    """
    lo = np.array([spec.margin, spec.margin])
    hi = np.array([spec.width - 1 - spec.margin, spec.height - 1 - spec.margin])
    per_instance = []
    for idx, poly in enumerate(spec.control_points):
        rng = np.random.default_rng([seed, idx])
        states = np.empty((spec.frames, *poly.shape))
        states[0] = np.clip(poly, lo, hi)
        vel = np.zeros_like(poly)
        for f in range(1, spec.frames):
            vel = 0.9 * vel + rng.normal(scale=0.5 * spec.step_bound, size=poly.shape)
            norms = np.linalg.norm(vel, axis=1, keepdims=True)
            disp = vel * np.minimum(1.0, spec.step_bound / np.maximum(norms, 1e-12))
            nxt = states[f - 1] + disp
            under = nxt < lo
            over = nxt > hi
            nxt = np.where(under, 2 * lo - nxt, nxt)
            nxt = np.where(over, 2 * hi - nxt, nxt)
            vel = np.where(under | over, -vel, vel)
            states[f] = nxt
        per_instance.append(states)
    return [[inst[f] for inst in per_instance] for f in range(spec.frames)]


def _stamp(mask: np.ndarray, pts: np.ndarray, radius: float) -> None:
    h, w = mask.shape
    reach = int(np.ceil(radius + 0.5))
    offs = np.arange(-reach, reach + 1)
    ox, oy = np.meshgrid(offs, offs)
    px = np.rint(pts[:, 0]).astype(int)[:, None, None] + ox[None]
    py = np.rint(pts[:, 1]).astype(int)[:, None, None] + oy[None]
    d2 = (px - pts[:, 0, None, None]) ** 2 + (py - pts[:, 1, None, None]) ** 2
    hit = (d2 <= radius * radius) & (px >= 0) & (px < w) & (py >= 0) & (py < h)
    mask[py[hit], px[hit]] = True


def _ground_z(spec: ScenarioSpec, pts: np.ndarray, tq: np.ndarray) -> np.ndarray | None:
    if spec.depth_mode == "none":
        return None
    if spec.depth_mode == "plane":
        (z0,) = spec.depth_args
        return np.full(len(pts), float(z0))
    if spec.depth_mode == "ramp":
        z0, z1 = spec.depth_args
        return z0 + (z1 - z0) * pts[:, 0] / (spec.width - 1)
    z0, z1 = spec.depth_args
    return z0 + (z1 - z0) * tq


def _render_depth(
    spec: ScenarioSpec, mask: np.ndarray, samples: list[tuple[np.ndarray, np.ndarray]]
) -> DepthMap | None:
    h, w = mask.shape
    if spec.depth_mode == "none":
        return None
    if spec.depth_mode == "plane":
        (z0,) = spec.depth_args
        return DepthMap.from_raw(np.full((h, w), float(z0)))
    if spec.depth_mode == "ramp":
        z0, z1 = spec.depth_args
        row = z0 + (z1 - z0) * np.arange(w) / (w - 1)
        return DepthMap.from_raw(np.broadcast_to(row, (h, w)).copy())
    values = np.zeros((h, w))
    all_pts = np.vstack([pts for pts, _ in samples])
    all_z = np.concatenate([z for _, z in samples])
    ys, xs = np.nonzero(mask)
    if len(ys):
        _, idx = cKDTree(all_pts).query(np.column_stack([xs, ys]))
        values[ys, xs] = all_z[idx]
    return DepthMap.from_raw(values)


def render_frame(
    spec: ScenarioSpec, frame_index: int, seed: int
) -> tuple[BinaryMask, DepthMap | None, list[DiscretizedCurve]]:
    """Rasterize one frame; returns mask, optional depth, reference curves."""
    if not 0 <= frame_index < spec.frames:
        raise ValueError(f"frame {frame_index} outside 0..{spec.frames - 1}")
    polys = evolve(spec, seed)[frame_index]
    mask = np.zeros((spec.height, spec.width), dtype=bool)
    truth = []
    samples = []
    for poly in polys:
        curve = reference_curve(poly)
        bound = np.linalg.norm(np.diff(poly, axis=0), axis=1).sum()
        n = max(64, int(np.ceil(bound / _SAMPLE_SPACING)) + 1)
        tq = np.linspace(0.0, 1.0, n)
        pts = evaluate(curve, tq)
        _stamp(mask, pts, spec.cable_width / 2)
        z = _ground_z(spec, pts, tq)
        if z is None:
            truth.append(DiscretizedCurve.from_points(pts))
        else:
            truth.append(DiscretizedCurve.from_points(np.column_stack([pts, z])))
            samples.append((pts, z))
    for occ in spec.occlusions:
        if occ.active(frame_index):
            mask[occ.y : occ.y + occ.h, occ.x : occ.x + occ.w] = False
    return BinaryMask(mask), _render_depth(spec, mask, samples), truth


def render_scenario(
    spec: ScenarioSpec, seed: int
) -> tuple[list[BinaryMask], list[DepthMap | None], GroundTruth]:
    masks, depths, frames = [], [], []
    for f in range(spec.frames):
        mask, depth, truth = render_frame(spec, f, seed)
        masks.append(mask)
        depths.append(depth)
        frames.append(truth)
    return masks, depths, GroundTruth(frames=frames)


def builtin_scenarios() -> dict[str, tuple[ScenarioSpec, int]]:
    """Named stock scenarios with their default seeds."""
    plain_poly = [(60, 240), (170, 160), (280, 300), (390, 170), (500, 300), (580, 220)]
    scenarios = {
        "plain": (
            ScenarioSpec(
                frames=50,
                width=640,
                height=480,
                control_points=[np.array(plain_poly, float)],
                step_bound=3.0,
            ),
            7,
        ),
        "curvature": (
            ScenarioSpec(
                frames=50,
                width=640,
                height=480,
                control_points=[
                    np.array(
                        [
                            (80, 140),
                            (150, 400),
                            (230, 90),
                            (310, 400),
                            (390, 90),
                            (470, 400),
                            (560, 140),
                        ],
                        float,
                    )
                ],
                step_bound=2.5,
            ),
            11,
        ),
        "figure8": (
            ScenarioSpec(
                frames=50,
                width=640,
                height=480,
                control_points=[
                    np.array(
                        [
                            (110, 140),
                            (330, 240),
                            (540, 340),
                            (565, 240),
                            (540, 140),
                            (330, 240),
                            (110, 340),
                        ],
                        float,
                    )
                ],
                step_bound=2.0,
            ),
            13,
        ),
        "occlusion": (
            ScenarioSpec(
                frames=50,
                width=640,
                height=480,
                control_points=[np.array(plain_poly, float)],
                step_bound=2.0,
                occlusions=[Occlusion(x=305, y=0, w=30, h=480)],
            ),
            17,
        ),
        "two_cables": (
            ScenarioSpec(
                frames=50,
                width=640,
                height=480,
                control_points=[
                    np.array(
                        [(60, 120), (190, 80), (320, 160), (450, 90), (580, 140)], float
                    ),
                    np.array(
                        [(60, 360), (190, 330), (320, 410), (450, 330), (580, 380)],
                        float,
                    ),
                ],
                step_bound=2.0,
            ),
            19,
        ),
        "hd": (
            ScenarioSpec(
                frames=10,
                width=1280,
                height=720,
                control_points=[
                    np.array(
                        [
                            (100, 360),
                            (320, 200),
                            (540, 520),
                            (760, 240),
                            (980, 500),
                            (1180, 300),
                        ],
                        float,
                    )
                ],
                step_bound=3.0,
                margin=30.0,
            ),
            23,
        ),
    }
    return scenarios


def spec_to_json_obj(spec: ScenarioSpec) -> dict:
    return {
        "frames": spec.frames,
        "width": spec.width,
        "height": spec.height,
        "cable_width": spec.cable_width,
        "step_bound": spec.step_bound,
        "margin": spec.margin,
        "control_points": [poly.tolist() for poly in spec.control_points],
        "occlusions": [
            {"x": o.x, "y": o.y, "w": o.w, "h": o.h, "start": o.start, "stop": o.stop}
            for o in spec.occlusions
        ],
        "depth": {"mode": spec.depth_mode, "args": list(spec.depth_args)},
    }


def spec_from_json_obj(obj: dict) -> ScenarioSpec:
    depth = obj.get("depth", {"mode": "none", "args": []})
    return ScenarioSpec(
        frames=int(obj["frames"]),
        width=int(obj["width"]),
        height=int(obj["height"]),
        control_points=[np.asarray(p, float) for p in obj["control_points"]],
        cable_width=float(obj.get("cable_width", 5.0)),
        step_bound=float(obj.get("step_bound", 0.0)),
        margin=float(obj.get("margin", 25.0)),
        occlusions=[Occlusion(**o) for o in obj.get("occlusions", [])],
        depth_mode=depth["mode"],
        depth_args=tuple(depth.get("args", [])),
    )


def load_scenario(path) -> ScenarioSpec:
    with open(path, encoding="utf-8") as fh:
        return spec_from_json_obj(json.load(fh))


def save_scenario(spec: ScenarioSpec, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_json_obj(spec), fh, indent=1)
        fh.write("\n")


def with_frames(spec: ScenarioSpec, frames: int) -> ScenarioSpec:
    return replace(spec, frames=frames)
