"""Raster input (masks, depth maps) and curve document serialization.

Conventions used across the package:

* image arrays are indexed ``[y, x]`` (row-major, y grows downward);
* point coordinates are ``(x, y)`` pairs, matching the column/row order
  written to curve documents;
* a raw depth value of 0 marks an invalid pixel (the usual convention of
  consumer RGBD sensors).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .spline import BSplineCurve

MIN_SIDE = 3  # below this the 3x3 morphological open is undefined


@dataclass
class BinaryMask:
    """2D boolean occupancy grid."""

    data: np.ndarray  # bool, shape (height, width)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=bool)
        if self.data.ndim != 2:
            raise ValueError(f"mask must be 2D, got shape {self.data.shape}")
        h, w = self.data.shape
        if h < MIN_SIDE or w < MIN_SIDE:
            raise ValueError(
                f"mask dimensions {w}x{h} below minimum {MIN_SIDE}x{MIN_SIDE}"
            )

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def count(self) -> int:
        return int(self.data.sum())

    def points(self) -> np.ndarray:
        """Occupied pixel coordinates as an (n, 2) float array of (x, y)."""
        ys, xs = np.nonzero(self.data)
        return np.column_stack([xs, ys]).astype(float)


@dataclass
class DepthMap:
    """Per-pixel depth with an explicit validity flag per pixel."""

    values: np.ndarray  # float, shape (height, width)
    valid: np.ndarray  # bool, same shape

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.values.ndim != 2 or self.values.shape != self.valid.shape:
            raise ValueError("depth values and validity mask must be equal 2D shapes")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_raw(cls, raw: np.ndarray) -> "DepthMap":
        """Wrap a raw depth grid, flagging zero-valued pixels as invalid."""
        raw = np.asarray(raw, dtype=float)
        return cls(values=raw, valid=raw != 0)


@dataclass
class FrameMeta:
    width: int
    height: int
    source: str = ""
    elapsed_ms: float = 0.0


@dataclass
class CurveDocument:
    """Serializable per-frame set of fitted curves."""

    frame: FrameMeta
    instances: list[BSplineCurve] = field(default_factory=list)

    def __post_init__(self):
        for inst in self.instances:
            _validate_instance(inst)

    def to_json_obj(self) -> dict:
        return {
            "frame": {
                "width": self.frame.width,
                "height": self.frame.height,
                "source": self.frame.source,
                "elapsed_ms": self.frame.elapsed_ms,
            },
            "instances": [
                {
                    "degree": c.degree,
                    "knots": [float(v) for v in c.knots],
                    "control_points": [[float(v) for v in p] for p in c.control_points],
                    "t_range": [float(c.t_range[0]), float(c.t_range[1])],
                }
                for c in self.instances
            ],
        }


def _validate_instance(curve: BSplineCurve) -> None:
    if curve.degree != 3:
        raise ValueError(f"curve degree must be 3, got {curve.degree}")
    knots = np.asarray(curve.knots, dtype=float)
    if np.any(np.diff(knots) < 0):
        raise ValueError("knots must be non-decreasing")
    d = curve.degree
    if not (np.all(knots[: d + 1] == knots[0]) and np.all(knots[-(d + 1):] == knots[-1])):
        raise ValueError("knot vector must be clamped (end multiplicity degree+1)")
    n_ctrl = len(curve.control_points)
    if n_ctrl != len(knots) - d - 1:
        raise ValueError(
            f"control point count {n_ctrl} != len(knots) - degree - 1 = {len(knots) - d - 1}"
        )


def load_mask(path: str | Path, threshold: int = 127) -> BinaryMask:
    """Load a binary mask from an 8-bit grayscale or RGB image.

    A pixel is occupied iff its grayscale intensity is strictly above
    ``threshold``. RGB images are reduced with the standard luma weights
    before thresholding.
    """
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be in [0, 255], got {threshold}")
    img = Image.open(path)
    if img.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
        raise ValueError(f"unsupported bit depth for mask image: mode {img.mode}")
    if img.mode != "L":
        img = img.convert("L")
    arr = np.asarray(img)
    h, w = arr.shape
    if h < MIN_SIDE or w < MIN_SIDE:
        raise ValueError(f"mask dimensions {w}x{h} below minimum {MIN_SIDE}x{MIN_SIDE}")
    return BinaryMask(arr > threshold)


def save_mask(mask: BinaryMask, path: str | Path) -> None:
    Image.fromarray(mask.data.astype(np.uint8) * 255, mode="L").save(path)


def load_depth(path: str | Path) -> DepthMap:
    """Load a depth map from a 16-bit PNG, a .npy dump, or a text grid.

    Raw zeros are flagged invalid; all other values are kept as-is.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".npy":
        try:
            raw = np.load(path)
        except Exception as exc:
            raise ValueError(f"cannot decode depth grid {path}: {exc}") from exc
    elif suffix in (".txt", ".csv"):
        delim = "," if suffix == ".csv" else None
        raw = np.loadtxt(path, delimiter=delim)
    else:
        img = Image.open(path)
        if img.mode not in ("I", "I;16", "I;16B", "I;16L", "L"):
            raise ValueError(f"depth image must be single-channel, got mode {img.mode}")
        raw = np.asarray(img)
    raw = np.atleast_2d(np.asarray(raw))
    if raw.ndim != 2:
        raise ValueError(f"depth grid must be 2D, got shape {raw.shape}")
    return DepthMap.from_raw(raw)


def save_depth(depth: DepthMap, path: str | Path) -> None:
    """Write depth as 16-bit PNG; invalid pixels become raw zeros."""
    raw = np.where(depth.valid, depth.values, 0.0)
    raw = np.clip(np.rint(raw), 0, 65535).astype(np.uint16)
    Image.fromarray(raw).save(path)


def write_curves(doc: CurveDocument, path: str | Path) -> None:
    """Serialize a curve document to JSON.

    Floats are written with Python's shortest round-trip repr, so a
    write/read cycle reproduces every numeric field bit-exactly.
    """
    with open(path, "w") as fh:
        json.dump(doc.to_json_obj(), fh, indent=1)
        fh.write("\n")


def read_curves(path: str | Path) -> CurveDocument:
    with open(path) as fh:
        obj = json.load(fh)
    return document_from_json_obj(obj)


def document_from_json_obj(obj: dict) -> CurveDocument:
    try:
        frame = obj["frame"]
        meta = FrameMeta(
            width=int(frame["width"]),
            height=int(frame["height"]),
            source=str(frame["source"]),
            elapsed_ms=float(frame["elapsed_ms"]),
        )
        instances = [
            BSplineCurve(
                degree=int(inst["degree"]),
                knots=np.asarray(inst["knots"], dtype=float),
                control_points=np.asarray(inst["control_points"], dtype=float),
            )
            for inst in obj["instances"]
        ]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed curve document: {exc}") from exc
    return CurveDocument(frame=meta, instances=instances)
