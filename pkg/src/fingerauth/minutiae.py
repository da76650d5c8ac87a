"""Minutiae detection on skeleton rasters plus patch orientation.

A skeleton foreground pixel is a ridge ending when it has exactly one
foreground neighbor and a bifurcation when it has exactly three. Each
minutia is assigned the intensity-centroid orientation of the enhanced
patch around it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache

import numpy as np

from .imgops import BinaryImage, GrayImage, _check_binary, _check_gray

TWO_PI = 2.0 * math.pi
_MOMENT_EPS = 1e-9


class MinutiaKind(IntEnum):
    ENDING = 0
    BIFURCATION = 1


@dataclass(frozen=True)
class Minutia:
    x: int
    y: int
    kind: MinutiaKind
    angle: float  # radians in [0, 2*pi)


def neighbor_count(skel: BinaryImage, x: int, y: int) -> int:
    """Foreground pixels among the 8 neighbors; out-of-bounds neighbors count 0."""
    _check_binary(skel)
    h, w = skel.shape
    if not (0 <= x < w and 0 <= y < h):
        raise ValueError(f"({x}, {y}) outside {w}x{h} raster")
    total = 0
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and skel[ny, nx]:
                total += 1
    return total


@lru_cache(maxsize=None)
def _disk_offsets(radius: int) -> tuple[np.ndarray, np.ndarray]:
    """(u, v) integer offsets of the discrete disk u^2 + v^2 <= radius^2."""
    vv, uu = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    keep = uu * uu + vv * vv <= radius * radius
    return uu[keep].copy(), vv[keep].copy()


def keypoint_orientation(img: GrayImage, x: int, y: int, patch_radius: int) -> float:
    """Intensity-centroid angle atan2(m01, m10) of the disk patch, in [0, 2*pi).

    Returns 0 when both first moments vanish (radially symmetric patch).
    """
    _check_gray(img)
    h, w = img.shape
    r = patch_radius
    if not (r <= x < w - r and r <= y < h - r):
        raise ValueError(f"patch of radius {r} at ({x}, {y}) exceeds {w}x{h} raster")
    u, v = _disk_offsets(r)
    vals = img[y + v, x + u].astype(np.float64)
    m10 = float(np.dot(u, vals))
    m01 = float(np.dot(v, vals))
    if abs(m10) < _MOMENT_EPS and abs(m01) < _MOMENT_EPS:
        return 0.0
    return math.atan2(m01, m10) % TWO_PI


def _orientations(img: GrayImage, xs: np.ndarray, ys: np.ndarray, patch_radius: int) -> np.ndarray:
    """Batched keypoint_orientation for many points at once."""
    u, v = _disk_offsets(patch_radius)
    patches = img[ys[:, None] + v[None, :], xs[:, None] + u[None, :]].astype(np.float64)
    m10 = patches @ u
    m01 = patches @ v
    angles = np.mod(np.arctan2(m01, m10), TWO_PI)
    flat = (np.abs(m10) < _MOMENT_EPS) & (np.abs(m01) < _MOMENT_EPS)
    angles[flat] = 0.0
    return angles


def extract_minutiae(
    skel: BinaryImage,
    enhanced: GrayImage,
    border_margin: int = 15,
    patch_radius: int = 15,
) -> list[Minutia]:
    """Classify eligible skeleton pixels into endings and bifurcations.

    Pixels closer than border_margin to any image edge are skipped so the
    orientation patch always fits. Output is ordered row-major by (y, x).
    """
    _check_binary(skel)
    _check_gray(enhanced)
    if skel.shape != enhanced.shape:
        raise ValueError(f"skeleton {skel.shape} and enhanced {enhanced.shape} differ")
    h, w = skel.shape

    u8 = skel.astype(np.uint8)
    padded = np.pad(u8, 1, mode="constant", constant_values=0)
    counts = np.zeros((h, w), dtype=np.uint8)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            if dy == 1 and dx == 1:
                continue
            counts += padded[dy : dy + h, dx : dx + w]

    eligible = skel.copy()
    m = border_margin
    if m > 0:
        eligible[:m, :] = False
        eligible[-m:, :] = False
        eligible[:, :m] = False
        eligible[:, -m:] = False
    hits = eligible & ((counts == 1) | (counts == 3))
    coords = np.argwhere(hits)  # row-major (y, x) order
    if len(coords) == 0:
        return []
    ys = coords[:, 0]
    xs = coords[:, 1]
    r = patch_radius
    if xs.min() < r or ys.min() < r or xs.max() >= w - r or ys.max() >= h - r:
        raise ValueError("orientation patch exceeds image bounds; raise border_margin to patch_radius")
    angles = _orientations(enhanced, xs, ys, patch_radius)
    kinds = np.where(counts[ys, xs] == 1, MinutiaKind.ENDING, MinutiaKind.BIFURCATION)
    return [
        Minutia(x=int(x), y=int(y), kind=MinutiaKind(int(k)), angle=float(a))
        for x, y, k, a in zip(xs, ys, kinds, angles)
    ]
