"""Zhang-Suen thinning of binary ridge maps to one-pixel-wide skeletons."""

from __future__ import annotations

import numpy as np

from .imgops import BinaryImage, _check_binary


def _neighbors(img: np.ndarray) -> list[np.ndarray]:
    """The eight neighbor rasters p2..p9, clockwise from north.

    Out-of-bounds neighbors count as background.
    """
    p = np.pad(img, 1, mode="constant", constant_values=0)
    n = p[:-2, 1:-1]
    ne = p[:-2, 2:]
    e = p[1:-1, 2:]
    se = p[2:, 2:]
    s = p[2:, 1:-1]
    sw = p[2:, :-2]
    w = p[1:-1, :-2]
    nw = p[:-2, :-2]
    return [n, ne, e, se, s, sw, w, nw]


def _deletion_mask(img: np.ndarray, subiteration: int) -> np.ndarray:
    nb = _neighbors(img)
    b = np.zeros(img.shape, dtype=np.uint8)
    for q in nb:
        b += q
    a = np.zeros(img.shape, dtype=np.uint8)
    for i in range(8):
        a += (nb[i] == 0) & (nb[(i + 1) % 8] == 1)
    p2, _, p4, _, p6, _, p8, _ = nb
    if subiteration == 1:
        direction = ((p2 & p4 & p6) == 0) & ((p4 & p6 & p8) == 0)
    else:
        direction = ((p2 & p4 & p8) == 0) & ((p2 & p6 & p8) == 0)
    return (img == 1) & (b >= 2) & (b <= 6) & (a == 1) & direction


def thin_pass(img: BinaryImage, subiteration: int) -> tuple[BinaryImage, int]:
    """One Zhang-Suen subiteration with simultaneous deletion.

    Every deletion condition is evaluated on the input raster, then all
    flagged pixels are removed together. Returns the new raster and the
    number of deleted pixels.
    """
    _check_binary(img)
    if subiteration not in (1, 2):
        raise ValueError(f"subiteration must be 1 or 2, got {subiteration}")
    u8 = img.astype(np.uint8)
    kill = _deletion_mask(u8, subiteration)
    out = img & ~kill
    return out, int(kill.sum())


def zhang_suen_thin(img: BinaryImage) -> BinaryImage:
    """Iterate both subiterations until a full iteration deletes nothing.

    Work is confined to the foreground bounding box (plus one pixel of
    background margin), which changes nothing: deletion conditions only see
    3x3 neighborhoods and everything outside the box is background.
    """
    _check_binary(img)
    ys, xs = np.nonzero(img)
    if len(ys) == 0:
        return img.copy()
    y0 = max(int(ys.min()) - 1, 0)
    y1 = min(int(ys.max()) + 2, img.shape[0])
    x0 = max(int(xs.min()) - 1, 0)
    x1 = min(int(xs.max()) + 2, img.shape[1])

    view = img[y0:y1, x0:x1].astype(np.uint8)
    while True:
        deleted = 0
        for sub in (1, 2):
            kill = _deletion_mask(view, sub)
            view[kill] = 0
            deleted += int(kill.sum())
        if deleted == 0:
            break
    out = np.zeros_like(img)
    out[y0:y1, x0:x1] = view.astype(bool)
    return out
