"""Mask preprocessing and thinning down to 1 px wide curve skeletons.

Thinning is Zhang-Suen with both subiterations vectorized through 256-entry
lookup tables over the 8-neighborhood bit code, followed by simultaneous
cleanup subpasses that remove the doubled step pixels and right-angle
corner pixels the thinning is known to leave behind; see the subpass table
below for why deleting them cannot break 8-connectivity. Everything outside
the image border counts as background.

A Skeleton is only constructed after branch-point removal, so its defining
property (no pixel with more than two 8-neighbors) always holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mask_io import BinaryMask

# Neighborhood bit code: N=1, NE=2, E=4, SE=8, S=16, SW=32, W=64, NW=128.
_OFFSETS = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)]


def _build_luts():
    popcount = np.zeros(256, dtype=np.uint8)
    step1 = np.zeros(256, dtype=bool)
    step2 = np.zeros(256, dtype=bool)
    for code in range(256):
        bits = [(code >> i) & 1 for i in range(8)]
        n, ne, e, se, s, sw, w, nw = bits
        b = sum(bits)
        popcount[code] = b
        ring = [n, ne, e, se, s, sw, w, nw, n]
        a = sum(1 for i in range(8) if ring[i] == 0 and ring[i + 1] == 1)
        if 2 <= b <= 6 and a == 1:
            step1[code] = n * e * s == 0 and e * s * w == 0
            step2[code] = n * e * w == 0 and n * s * w == 0
    return popcount, step1, step2


_POPCOUNT, _STEP1, _STEP2 = _build_luts()


def _code_lut(codes) -> np.ndarray:
    lut = np.zeros(256, dtype=bool)
    lut[list(codes)] = True
    return lut


# Thinning leaves three artifact families that inflate 8-neighbor counts
# and would make branch-point removal shred a perfectly good line:
#  * doubled step pixels on shallow diagonals (neighborhood exactly
#    {W,N,NE}, {E,N,NW}, {N,W,SW} or {S,W,NW}); deleting the member whose
#    partner sits above (or left) keeps the partner, and the remaining
#    neighbors stay connected through it;
#  * 90-degree corners ({N,E} etc.) whose two neighbors already touch
#    diagonally, forming a 3-cycle that reads as a branch;
#  * two-pixel-wide bands along the NE-SW diagonal, which both thinning
#    subiterations leave untouched; their lower-left members read
#    {NE,E,S,SW} inside a band ({E,S,SW} / {NE,E,S} at the ends), and
#    deleting all of them at once keeps the upper-right members as a
#    clean single diagonal that every deleted pixel's neighbors touch.
# Within each of the first two subpasses no two matching pixels are
# 8-adjacent (each deleted pixel's neighbors carry bits the subpass codes
# exclude); in the band subpass matches are mutually adjacent, but their
# kept neighbors always include two adjacent upper-right members, so
# simultaneous deletion cannot disconnect anything either. Subpasses run
# on recomputed codes.
_STAIR_SUBPASSES = [
    _code_lut([64 + 1 + 2, 4 + 1 + 128]),  # {W,N,NE}, {E,N,NW}
    _code_lut([1 + 64 + 32, 16 + 64 + 128]),  # {N,W,SW}, {S,W,NW}
    _code_lut([1 + 4, 1 + 64, 4 + 16, 16 + 64]),  # corners
    _code_lut([2 + 4 + 16 + 32, 4 + 16 + 32, 2 + 4 + 16]),  # NE-SW bands
]


def _neighbor_codes(img: np.ndarray) -> np.ndarray:
    padded = np.pad(img, 1).astype(np.uint8)
    h, w = img.shape
    code = np.zeros((h, w), dtype=np.uint8)
    for bit, (dy, dx) in enumerate(_OFFSETS):
        code += padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w] << bit
    return code


def neighbor_counts(img: np.ndarray) -> np.ndarray:
    """8-neighbor count per pixel; zero wherever the image is empty."""
    counts = _POPCOUNT[_neighbor_codes(img)]
    return np.where(img, counts, 0).astype(np.uint8)


@dataclass
class Skeleton:
    """Branch-free skeleton raster; no pixel has more than two 8-neighbors."""

    data: np.ndarray

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def count(self) -> int:
        return int(self.data.sum())

    def points(self) -> np.ndarray:
        """Skeleton pixels as (x, y) rows in row-major scan order."""
        ys, xs = np.nonzero(self.data)
        return np.column_stack([xs, ys]).astype(float)

    def endpoints(self) -> np.ndarray:
        """Pixels with exactly one 8-neighbor, as (x, y) rows in scan order."""
        ys, xs = np.nonzero(self.neighbor_counts() == 1)
        return np.column_stack([xs, ys]).astype(float)

    def neighbor_counts(self) -> np.ndarray:
        return neighbor_counts(self.data)


def morphological_open(mask: BinaryMask, kernel: int = 3) -> BinaryMask:
    """Square-kernel erosion then dilation; kills speckles below kernel size."""
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"kernel must be odd and positive, got {kernel}")
    if kernel == 1:
        return BinaryMask(mask.data.copy())
    r = kernel // 2
    h, w = mask.data.shape
    padded = np.pad(mask.data, r)
    eroded = np.ones((h, w), dtype=bool)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            eroded &= padded[r + dy : r + dy + h, r + dx : r + dx + w]
    padded = np.pad(eroded, r)
    dilated = np.zeros((h, w), dtype=bool)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            dilated |= padded[r + dy : r + dy + h, r + dx : r + dx + w]
    return BinaryMask(dilated)


def _thin(img: np.ndarray) -> np.ndarray:
    img = img.copy()
    while True:
        changed = False
        for lut in (_STEP1, _STEP2):
            delete = img & lut[_neighbor_codes(img)]
            if delete.any():
                img &= ~delete
                changed = True
        if not changed:
            return img


def _cleanup(img: np.ndarray) -> np.ndarray:
    img = img.copy()
    for _ in range(5):
        changed = False
        for lut in _STAIR_SUBPASSES:
            delete = img & lut[_neighbor_codes(img)]
            if delete.any():
                img &= ~delete
                changed = True
        if not changed:
            break
    return img


def skeletonize(mask: BinaryMask) -> np.ndarray:
    """Thin a mask to a 1 px wide boolean image (may still contain branches)."""
    full = np.zeros(mask.data.shape, dtype=bool)
    ys, xs = np.nonzero(mask.data)
    if len(ys) == 0:
        return full
    y0, y1 = ys.min(), ys.max() + 1
    x0, x1 = xs.min(), xs.max() + 1
    full[y0:y1, x0:x1] = _cleanup(_thin(mask.data[y0:y1, x0:x1]))
    return full


def remove_branch_points(pixels: np.ndarray) -> Skeleton:
    """Delete every pixel with more than two 8-neighbors, all at once.

    Counts are frozen on the input set, so the result does not depend on
    any deletion order. Junctions between overlapping or touching cables
    disappear and the skeleton falls apart into plain open paths.
    """
    return Skeleton(pixels & (neighbor_counts(pixels) <= 2))
