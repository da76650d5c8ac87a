"""Finger isolation: HSV skin mask, morphological cleanup, elliptical crop."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoFingerError
from .imgops import (
    BinaryImage,
    GrayImage,
    RgbImage,
    StructuringElement,
    _check_binary,
    _check_gray,
    hsv_channels,
    largest_component,
    closing,
    opening,
)


@dataclass(frozen=True)
class HsvRange:
    """Inclusive HSV box; h_lo > h_hi wraps the hue interval across 360."""

    h_lo: float
    h_hi: float
    s_lo: float
    s_hi: float
    v_lo: float
    v_hi: float

    def __post_init__(self) -> None:
        for name in ("h_lo", "h_hi"):
            val = getattr(self, name)
            if not 0.0 <= val < 360.0:
                raise ValueError(f"{name} must lie in [0, 360), got {val}")
        if not (0.0 <= self.s_lo <= self.s_hi <= 1.0):
            raise ValueError(f"bad saturation interval [{self.s_lo}, {self.s_hi}]")
        if not (0.0 <= self.v_lo <= self.v_hi <= 1.0):
            raise ValueError(f"bad value interval [{self.v_lo}, {self.v_hi}]")


# Conventional photographic skin-tone box; every bound is config-overridable.
DEFAULT_SKIN_RANGE = HsvRange(h_lo=340.0, h_hi=50.0, s_lo=0.15, s_hi=0.75, v_lo=0.30, v_hi=1.0)


@dataclass(frozen=True)
class Ellipse:
    cx: float
    cy: float
    rx: float
    ry: float
    angle: float  # radians

    def __post_init__(self) -> None:
        if self.rx <= 0 or self.ry <= 0:
            raise ValueError(f"semi-axes must be positive, got rx={self.rx}, ry={self.ry}")


def skin_mask(img: RgbImage, hsv_range: HsvRange = DEFAULT_SKIN_RANGE) -> BinaryImage:
    """True where the pixel's HSV value lies inside the (inclusive) range."""
    h, s, v = hsv_channels(img)
    if hsv_range.h_lo <= hsv_range.h_hi:
        h_ok = (h >= hsv_range.h_lo) & (h <= hsv_range.h_hi)
    else:
        h_ok = (h >= hsv_range.h_lo) | (h <= hsv_range.h_hi)
    return (
        h_ok
        & (s >= hsv_range.s_lo)
        & (s <= hsv_range.s_hi)
        & (v >= hsv_range.v_lo)
        & (v <= hsv_range.v_hi)
    )


def clean_mask(mask: BinaryImage, open_radius: int = 3, close_radius: int = 3) -> BinaryImage:
    """Morphological opening, then closing, then keep the largest 8-connected blob.

    A radius of 0 skips that pass.
    """
    _check_binary(mask)
    if open_radius < 0 or close_radius < 0:
        raise ValueError("radii must be >= 0")
    out = mask
    if open_radius > 0:
        out = opening(out, StructuringElement(open_radius, "disk"))
    if close_radius > 0:
        out = closing(out, StructuringElement(close_radius, "disk"))
    return largest_component(out, connectivity=8)


def elliptical_crop(img: GrayImage, roi: Ellipse, background: int) -> GrayImage:
    """Keep pixels whose centers fall inside the ellipse; set the rest to `background`."""
    _check_gray(img)
    if not 0 <= background <= 255:
        raise ValueError(f"background must be a byte, got {background}")
    h, w = img.shape
    yy, xx = np.mgrid[0:h, 0:w]
    dx = xx - roi.cx
    dy = yy - roi.cy
    c, s = math.cos(roi.angle), math.sin(roi.angle)
    u = dx * c + dy * s
    v = -dx * s + dy * c
    inside = (u / roi.rx) ** 2 + (v / roi.ry) ** 2 <= 1.0
    out = np.full_like(img, background)
    out[inside] = img[inside]
    return out


def mask_to_ellipse(mask: BinaryImage) -> Ellipse:
    """Moment-based ellipse fit of the foreground pixels.

    Center is the centroid; semi-axes are twice the square roots of the
    eigenvalues of the coordinate covariance (clamped to a minimum of one
    pixel so degenerate masks still yield a valid ellipse).
    """
    _check_binary(mask)
    ys, xs = np.nonzero(mask)
    if len(xs) < 5:
        raise NoFingerError(f"mask has only {len(xs)} foreground pixels, need >= 5")
    cx = xs.mean()
    cy = ys.mean()
    dx = xs - cx
    dy = ys - cy
    cxx = np.mean(dx * dx)
    cyy = np.mean(dy * dy)
    cxy = np.mean(dx * dy)
    # eigen-decomposition of the 2x2 covariance, major axis first
    tr = cxx + cyy
    det = cxx * cyy - cxy * cxy
    disc = math.sqrt(max(tr * tr / 4.0 - det, 0.0))
    lam1 = tr / 2.0 + disc
    lam2 = tr / 2.0 - disc
    angle = 0.5 * math.atan2(2.0 * cxy, cxx - cyy)
    rx = max(2.0 * math.sqrt(max(lam1, 0.0)), 1.0)
    ry = max(2.0 * math.sqrt(max(lam2, 0.0)), 1.0)
    return Ellipse(cx=cx, cy=cy, rx=rx, ry=ry, angle=angle)
