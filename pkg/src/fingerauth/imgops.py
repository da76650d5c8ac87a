"""Pixel-level primitives shared by all pipeline stages.

Raster conventions (plain numpy arrays throughout):

    RgbImage    -- (h, w, 3) uint8, row-major RGB
    GrayImage   -- (h, w) uint8 intensities
    BinaryImage -- (h, w) bool, True = foreground

All operations are pure: they never modify their inputs and identical
inputs yield bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image
from scipy import ndimage

RgbImage = np.ndarray
GrayImage = np.ndarray
BinaryImage = np.ndarray

# ITU-R BT.601 luma weights
LUMA_R, LUMA_G, LUMA_B = 0.299, 0.587, 0.114


class HsvPixel(NamedTuple):
    h: float  # degrees in [0, 360)
    s: float  # fraction in [0, 1]
    v: float  # fraction in [0, 1]


@dataclass(frozen=True)
class StructuringElement:
    """Neighborhood shape for binary morphology: a square or a Euclidean disk."""

    radius: int
    shape: str = "disk"

    def __post_init__(self) -> None:
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if self.shape not in ("disk", "square"):
            raise ValueError(f"shape must be 'disk' or 'square', got {self.shape!r}")

    def footprint(self) -> np.ndarray:
        r = self.radius
        if self.shape == "square":
            return np.ones((2 * r + 1, 2 * r + 1), dtype=bool)
        yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
        return xx * xx + yy * yy <= r * r


def _round_u8(x: np.ndarray) -> np.ndarray:
    # half-up rounding; np.round would round half to even
    return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)


def _check_rgb(img: np.ndarray) -> None:
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError(f"expected (h, w, 3) uint8 RGB raster, got {img.shape} {img.dtype}")


def _check_gray(img: np.ndarray) -> None:
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ValueError(f"expected (h, w) uint8 raster, got {img.shape} {img.dtype}")


def _check_binary(img: np.ndarray) -> None:
    if img.ndim != 2 or img.dtype != np.bool_:
        raise ValueError(f"expected (h, w) bool raster, got {img.shape} {img.dtype}")


def to_grayscale(img: RgbImage) -> GrayImage:
    """BT.601 luma conversion, rounded half-up per pixel."""
    _check_rgb(img)
    f = img.astype(np.float64)
    luma = LUMA_R * f[:, :, 0] + LUMA_G * f[:, :, 1] + LUMA_B * f[:, :, 2]
    return _round_u8(luma)


def hsv_channels(img: RgbImage) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized hexcone conversion of a whole RGB raster.

    Returns (h, s, v) float64 arrays with h in degrees [0, 360) and s, v
    in [0, 1]. Achromatic pixels get h = 0.
    """
    _check_rgb(img)
    f = img.astype(np.float64) / 255.0
    r, g, b = f[:, :, 0], f[:, :, 1], f[:, :, 2]
    v = f.max(axis=2)
    c = v - f.min(axis=2)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)

    safe_c = np.where(c > 0, c, 1.0)
    h = np.zeros_like(v)
    is_r = (v == r) & (c > 0)
    is_g = (v == g) & (c > 0) & ~is_r
    is_b = (c > 0) & ~is_r & ~is_g
    h = np.where(is_r, np.mod((g - b) / safe_c, 6.0), h)
    h = np.where(is_g, (b - r) / safe_c + 2.0, h)
    h = np.where(is_b, (r - g) / safe_c + 4.0, h)
    return np.mod(h * 60.0, 360.0), s, v


def rgb_to_hsv(r: int, g: int, b: int) -> HsvPixel:
    """Hexcone conversion of a single pixel; h = 0 when r = g = b."""
    px = np.array([[[r, g, b]]], dtype=np.uint8)
    h, s, v = hsv_channels(px)
    return HsvPixel(float(h[0, 0]), float(s[0, 0]), float(v[0, 0]))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian taps at integer offsets in [-ceil(3*sigma), +ceil(3*sigma)], sum 1."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    half = math.ceil(3.0 * sigma)
    xs = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img: GrayImage, sigma: float) -> GrayImage:
    """Separable Gaussian smoothing with edge replication at the borders.

    The intermediate stays in float; quantization to bytes happens once at
    the end, so an impulse comes back as the rounded 2-D kernel.
    """
    _check_gray(img)
    k = gaussian_kernel(sigma)
    f = img.astype(np.float64)
    f = ndimage.correlate1d(f, k, axis=0, mode="nearest")
    f = ndimage.correlate1d(f, k, axis=1, mode="nearest")
    return _round_u8(f)


def erode(img: BinaryImage, se: StructuringElement) -> BinaryImage:
    """Pixel stays true iff every neighborhood pixel that lies in bounds is true.

    Out-of-bounds neighbors are treated as absent, so a full-frame mask keeps
    its border ring.
    """
    _check_binary(img)
    return ndimage.binary_erosion(img, structure=se.footprint(), border_value=1)


def dilate(img: BinaryImage, se: StructuringElement) -> BinaryImage:
    """Dual of erode: true iff any in-bounds neighborhood pixel is true."""
    _check_binary(img)
    return ndimage.binary_dilation(img, structure=se.footprint(), border_value=0)


def opening(img: BinaryImage, se: StructuringElement) -> BinaryImage:
    return dilate(erode(img, se), se)


def closing(img: BinaryImage, se: StructuringElement) -> BinaryImage:
    return erode(dilate(img, se), se)


def largest_component(img: BinaryImage, connectivity: int = 8) -> BinaryImage:
    """Keep only the biggest connected foreground component.

    Ties are broken by the component containing the smallest row-major pixel
    index. An all-false raster comes back all-false.
    """
    _check_binary(img)
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    structure = ndimage.generate_binary_structure(2, 1 if connectivity == 4 else 2)
    labels, n = ndimage.label(img, structure=structure)
    if n == 0:
        return np.zeros_like(img)
    sizes = np.bincount(labels.ravel())[1:]  # skip background
    best_size = sizes.max()
    candidates = np.flatnonzero(sizes == best_size) + 1
    if len(candidates) == 1:
        best = candidates[0]
    else:
        flat = labels.ravel()
        best = min(candidates, key=lambda lab: int(np.argmax(flat == lab)))
    return labels == best


def downscale(img: np.ndarray, max_side: int = 640) -> np.ndarray:
    """Bilinear-shrink so max(width, height) == max_side; smaller images pass through."""
    h, w = img.shape[:2]
    side = max(h, w)
    if side <= max_side:
        return img.copy()
    scale = max_side / side
    out_h = max(1, int(round(h * scale)))
    out_w = max(1, int(round(w * scale)))
    return _bilinear_resize(img, out_h, out_w)


def _bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    h, w = img.shape[:2]
    f = img.astype(np.float64)
    ys = np.clip((np.arange(out_h) + 0.5) * h / out_h - 0.5, 0, h - 1)
    xs = np.clip((np.arange(out_w) + 0.5) * w / out_w - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    if img.ndim == 3:
        fy = fy[:, :, None]
        fx = fx[:, :, None]
    top = f[np.ix_(y0, x0)] * (1 - fx) + f[np.ix_(y0, x1)] * fx
    bot = f[np.ix_(y1, x0)] * (1 - fx) + f[np.ix_(y1, x1)] * fx
    return _round_u8(top * (1 - fy) + bot * fy)


def load_image(path: str | Path) -> RgbImage:
    """Decode an image file (PNG or binary PPM/PGM) into an RGB raster."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_png(path: str | Path, img: np.ndarray) -> None:
    """Write an RGB, gray, or binary raster as PNG."""
    if img.dtype == np.bool_:
        pil = Image.fromarray(img.astype(np.uint8) * 255, mode="L")
    elif img.ndim == 2:
        pil = Image.fromarray(img, mode="L")
    else:
        pil = Image.fromarray(img, mode="RGB")
    pil.save(path, format="PNG")
