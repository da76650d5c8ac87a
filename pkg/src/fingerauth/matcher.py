"""Template matching: Hamming brute force, ratio test, RANSAC verification.

The headline score is 100 * inliers / min(feature counts), so a template
matched against itself scores exactly 100 whenever its descriptors are
pairwise distinct. Raw correspondences are kept on the result for
inspection alongside the inlier-based score.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import MatchConfig, RansacConfig
from .descriptor import Descriptor256, Template

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint16)


@dataclass(frozen=True)
class Correspondence:
    probe_index: int
    gallery_index: int
    distance: int
    second_distance: int

    def __post_init__(self) -> None:
        if self.distance > self.second_distance:
            raise ValueError("distance must not exceed second_distance")


@dataclass(frozen=True)
class SimilarityTransform:
    scale: float
    rotation: float  # radians
    tx: float
    ty: float

    def apply(self, pts: np.ndarray) -> np.ndarray:
        c = self.scale * math.cos(self.rotation)
        s = self.scale * math.sin(self.rotation)
        out = np.empty_like(pts, dtype=np.float64)
        out[:, 0] = c * pts[:, 0] - s * pts[:, 1] + self.tx
        out[:, 1] = s * pts[:, 0] + c * pts[:, 1] + self.ty
        return out


@dataclass
class MatchResult:
    correspondences: list[Correspondence]
    inliers: list[int]  # indices into correspondences
    transform: Optional[SimilarityTransform]
    score: float  # percentage in [0, 100]


def hamming(a: Descriptor256, b: Descriptor256) -> int:
    """Number of differing bits between two descriptors."""
    return (int.from_bytes(a.bits, "big") ^ int.from_bytes(b.bits, "big")).bit_count()


def _descriptor_matrix(t: Template) -> np.ndarray:
    return np.frombuffer(b"".join(d.bits for _, d in t.features), dtype=np.uint8).reshape(-1, 32)


def _positions(t: Template, indices: list[int] | None = None) -> np.ndarray:
    feats = t.features if indices is None else [t.features[i] for i in indices]
    return np.array([(m.x, m.y) for m, _ in feats], dtype=np.float64)


def ratio_match(probe: Template, gallery: Template, ratio: float = 0.75) -> list[Correspondence]:
    """Nearest-neighbor matches that pass Lowe's ratio test.

    Keeps a probe feature iff its best Hamming distance is strictly below
    ratio times the runner-up distance. A single-feature gallery uses 257
    as the runner-up. Distance ties resolve to the lower gallery index.
    """
    if len(probe) == 0 or len(gallery) == 0:
        raise ValueError("ratio_match requires non-empty templates")
    if not 0 < ratio <= 1:
        raise ValueError(f"ratio must lie in (0, 1], got {ratio}")
    pd = _descriptor_matrix(probe)
    gd = _descriptor_matrix(gallery)
    dists = _POPCOUNT[pd[:, None, :] ^ gd[None, :, :]].sum(axis=2).astype(np.int32)

    nearest = dists.argmin(axis=1)  # first occurrence wins ties
    best = dists[np.arange(len(pd)), nearest]
    if len(gallery) == 1:
        second = np.full(len(pd), 257, dtype=np.int32)
    else:
        masked = dists.copy()
        masked[np.arange(len(pd)), nearest] = 1000
        second = masked.min(axis=1)
    keep = best < ratio * second
    return [
        Correspondence(int(i), int(nearest[i]), int(best[i]), int(second[i]))
        for i in np.flatnonzero(keep)
    ]


def _solve_two_point(p1, p2, q1, q2) -> complex | None:
    """Exact similarity from two point pairs, as the complex map q = a*p + t."""
    dp = p2 - p1
    if dp == 0:
        return None
    return (q2 - q1) / dp


def _fit_similarity(src: np.ndarray, dst: np.ndarray) -> SimilarityTransform:
    """Least-squares similarity via the complex linear model q = a*p + t."""
    p = src[:, 0] + 1j * src[:, 1]
    q = dst[:, 0] + 1j * dst[:, 1]
    pm = p.mean()
    qm = q.mean()
    denom = float(np.sum(np.abs(p - pm) ** 2))
    if denom == 0:
        a = complex(1.0, 0.0)
    else:
        a = complex(np.sum(np.conj(p - pm) * (q - qm)) / denom)
    t = qm - a * pm
    return SimilarityTransform(scale=abs(a), rotation=math.atan2(a.imag, a.real), tx=t.real, ty=t.imag)


def ransac_similarity(
    corr: list[Correspondence],
    probe: Template,
    gallery: Template,
    cfg: RansacConfig | None = None,
) -> tuple[Optional[SimilarityTransform], list[int]]:
    """Robust similarity fit over the correspondences.

    Two-point hypotheses are drawn with a seeded generator; every sampling
    attempt (including scale-rejected and degenerate ones) counts toward
    max_iterations, with an adaptive early exit at the configured
    confidence. The winner (most inliers, ties by lower reprojection RMS)
    is refit by least squares on its inlier set.
    """
    if cfg is None:
        cfg = RansacConfig()
    n = len(corr)
    if n < 2:
        return None, []
    src = np.array([(probe.features[c.probe_index][0].x, probe.features[c.probe_index][0].y) for c in corr], dtype=np.float64)
    dst = np.array(
        [(gallery.features[c.gallery_index][0].x, gallery.features[c.gallery_index][0].y) for c in corr],
        dtype=np.float64,
    )
    p = src[:, 0] + 1j * src[:, 1]
    q = dst[:, 0] + 1j * dst[:, 1]

    rng = random.Random(cfg.seed)
    best_count = 0
    best_rms = math.inf
    best_mask: np.ndarray | None = None
    needed = cfg.max_iterations
    it = 0
    while it < min(cfg.max_iterations, needed):
        it += 1
        i, j = rng.sample(range(n), 2)
        a = _solve_two_point(p[i], p[j], q[i], q[j])
        if a is None:
            continue
        scale = abs(a)
        if not cfg.min_scale <= scale <= cfg.max_scale:
            continue
        t = q[i] - a * p[i]
        err = np.abs(a * p + t - q)
        mask = err < cfg.inlier_threshold
        count = int(mask.sum())
        if count < 2:
            continue
        rms = float(math.sqrt(np.mean(err[mask] ** 2)))
        if count > best_count or (count == best_count and rms < best_rms):
            best_count = count
            best_rms = rms
            best_mask = mask
            w = count / n
            if w >= 1.0:
                break
            denom = math.log(1.0 - w * w)
            if denom < 0:
                needed = min(needed, math.ceil(math.log(1.0 - cfg.confidence) / denom))
    if best_mask is None or best_count < 2:
        return None, []
    inliers = [int(k) for k in np.flatnonzero(best_mask)]
    transform = _fit_similarity(src[best_mask], dst[best_mask])
    return transform, inliers


def match_score(probe: Template, gallery: Template, cfg: MatchConfig | None = None) -> MatchResult:
    """Ratio test, RANSAC verification, and the inlier-based percentage."""
    if cfg is None:
        cfg = MatchConfig()
    if len(probe) == 0 or len(gallery) == 0:
        return MatchResult(correspondences=[], inliers=[], transform=None, score=0.0)
    corr = ratio_match(probe, gallery, cfg.ratio)
    transform, inliers = ransac_similarity(corr, probe, gallery, cfg.ransac)
    score = 100.0 * len(inliers) / min(len(probe), len(gallery))
    return MatchResult(correspondences=corr, inliers=inliers, transform=transform, score=score)
