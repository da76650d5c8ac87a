"""Ridge/valley contrast enhancement (CLAHE) and adaptive binarization."""

from __future__ import annotations

import math

import numpy as np

from .imgops import BinaryImage, GrayImage, _check_gray


def _equalize_mapping(hist: np.ndarray) -> np.ndarray:
    """256-entry transfer function from a (possibly fractional) histogram.

    Uses the classic cdf-min normalization so the lowest occupied level maps
    to 0 and the highest to 255; degenerate histograms map to identity.
    """
    cdf = np.cumsum(hist)
    total = cdf[-1]
    occupied = np.nonzero(hist > 0)[0]
    if len(occupied) == 0:
        return np.arange(256, dtype=np.uint8)
    cdf_min = cdf[occupied[0]]
    denom = total - cdf_min
    if denom <= 0:
        return np.arange(256, dtype=np.uint8)
    out = np.floor(255.0 * (cdf - cdf_min) / denom + 0.5)
    return np.clip(out, 0, 255).astype(np.uint8)


def _clipped_hist(tile: np.ndarray, clip_limit: float) -> np.ndarray:
    hist = np.bincount(tile.ravel(), minlength=256).astype(np.float64)
    clip = clip_limit * tile.size / 256.0
    excess = np.maximum(hist - clip, 0.0).sum()
    hist = np.minimum(hist, clip)
    return hist + excess / 256.0


def global_equalize(img: GrayImage) -> GrayImage:
    _check_gray(img)
    hist = np.bincount(img.ravel(), minlength=256).astype(np.float64)
    return _equalize_mapping(hist)[img]


def contrast_enhance(img: GrayImage, clip_limit: float = 2.0, tile: int = 32) -> GrayImage:
    """Contrast-limited adaptive histogram equalization.

    Per-tile histograms are clipped at clip_limit times the uniform bin
    height (excess redistributed evenly) and each pixel bilinearly blends
    the transfer functions of its four nearest tile centers. Images smaller
    than one tile fall back to global equalization.
    """
    _check_gray(img)
    if tile < 8:
        raise ValueError(f"tile must be >= 8, got {tile}")
    if clip_limit < 1:
        raise ValueError(f"clip_limit must be >= 1, got {clip_limit}")
    h, w = img.shape
    if h < tile or w < tile:
        return global_equalize(img)

    nty = math.ceil(h / tile)
    ntx = math.ceil(w / tile)
    maps = np.empty((nty, ntx, 256), dtype=np.float64)
    centers_y = np.empty(nty)
    centers_x = np.empty(ntx)
    for ti in range(nty):
        y0, y1 = ti * tile, min((ti + 1) * tile, h)
        centers_y[ti] = (y0 + y1 - 1) / 2.0
        for tj in range(ntx):
            x0, x1 = tj * tile, min((tj + 1) * tile, w)
            if ti == 0:
                centers_x[tj] = (x0 + x1 - 1) / 2.0
            maps[ti, tj] = _equalize_mapping(_clipped_hist(img[y0:y1, x0:x1], clip_limit))

    # per-pixel bilinear blend between the four surrounding tile mappings
    ys = np.arange(h, dtype=np.float64)
    xs = np.arange(w, dtype=np.float64)
    iy1 = np.clip(np.searchsorted(centers_y, ys), 0, nty - 1)
    iy0 = np.clip(iy1 - 1, 0, nty - 1)
    ix1 = np.clip(np.searchsorted(centers_x, xs), 0, ntx - 1)
    ix0 = np.clip(ix1 - 1, 0, ntx - 1)
    span_y = np.where(iy1 > iy0, centers_y[iy1] - centers_y[iy0], 1.0)
    span_x = np.where(ix1 > ix0, centers_x[ix1] - centers_x[ix0], 1.0)
    fy = np.clip((ys - centers_y[iy0]) / span_y, 0.0, 1.0)[:, None]
    fx = np.clip((xs - centers_x[ix0]) / span_x, 0.0, 1.0)[None, :]

    iy0g = iy0[:, None]
    iy1g = iy1[:, None]
    ix0g = ix0[None, :]
    ix1g = ix1[None, :]
    v00 = maps[iy0g, ix0g, img]
    v01 = maps[iy0g, ix1g, img]
    v10 = maps[iy1g, ix0g, img]
    v11 = maps[iy1g, ix1g, img]
    blended = (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11)
    return np.clip(np.floor(blended + 0.5), 0, 255).astype(np.uint8)


def local_mean_sums(img: GrayImage, window: int) -> np.ndarray:
    """Exact integer window sums with edge-replicated borders; shape matches img."""
    half = window // 2
    padded = np.pad(img.astype(np.int64), half, mode="edge")
    integral = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64)
    integral[1:, 1:] = padded.cumsum(axis=0).cumsum(axis=1)
    h, w = img.shape
    # padded window for output (y, x) spans padded rows y..y+window-1
    return (
        integral[window:, window:]
        - integral[:h, window:]
        - integral[window:, :w]
        + integral[:h, :w]
    )


def binarize(img: GrayImage, window: int = 25, offset: float = 4.0) -> BinaryImage:
    """Adaptive mean threshold: foreground (ridge) iff value < local mean - offset.

    Ridges are the darker curves, so foreground means dark. Window sums are
    exact integers (edge-replicated borders) and the comparison is carried
    out without division, so results never depend on float rounding.
    """
    _check_gray(img)
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    sums = local_mean_sums(img, window)
    area = window * window
    # img < sums/area - offset  <=>  img*area < sums - offset*area
    return img.astype(np.int64) * area < sums - offset * area
