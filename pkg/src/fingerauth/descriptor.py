"""256-bit steered binary descriptors at minutiae and template assembly.

The sampling pattern is 256 point pairs drawn from an isotropic Gaussian
(sigma = 31/5) inside a 31x31 patch, generated by a self-contained
xorshift64* PRNG with Box-Muller so the pattern is bit-identical for a
given seed on every platform. At description time the pattern is steered
by the minutia angle quantized to 30 bins and each bit compares box-smoothed
intensities at the rotated pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import segmentation
from .config import PipelineConfig
from .enhance import binarize, contrast_enhance, local_mean_sums
from .errors import NoFeaturesError, NoFingerError
from .imgops import (
    BinaryImage,
    GrayImage,
    RgbImage,
    downscale,
    gaussian_blur,
    to_grayscale,
)
from .minutiae import Minutia, extract_minutiae
from .skeleton import zhang_suen_thin

PATCH_RADIUS = 15  # 31x31 descriptor patch
PATTERN_SIGMA = 31.0 / 5.0
N_PAIRS = 256
N_ANGLE_BINS = 30
ANGLE_STEP = 2.0 * math.pi / N_ANGLE_BINS
SMOOTH_WINDOW = 5

TEMPLATE_VERSION = 1

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class Descriptor256:
    """256 comparison outcomes packed MSB-first into 32 bytes."""

    bits: bytes

    def __post_init__(self) -> None:
        if len(self.bits) != 32:
            raise ValueError(f"descriptor must be 32 bytes, got {len(self.bits)}")


@dataclass(frozen=True, eq=False)
class TestPattern:
    """256 point pairs, int16 rows (u1, v1, u2, v2), all within [-15, 15]."""

    pairs: np.ndarray

    def __post_init__(self) -> None:
        if self.pairs.shape != (N_PAIRS, 4):
            raise ValueError(f"pattern must be ({N_PAIRS}, 4), got {self.pairs.shape}")
        if np.abs(self.pairs).max() > PATCH_RADIUS:
            raise ValueError("pattern coordinates exceed the patch")
        self.pairs.setflags(write=False)


@dataclass
class Template:
    """Everything stored for one fingerprint: minutiae plus descriptors."""

    version: int
    label: str
    working_width: int
    working_height: int
    features: list[tuple[Minutia, Descriptor256]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.features)


class XorShift64Star:
    """xorshift64* generator; uniform doubles come from the top 53 bits."""

    MULT = 0x2545F4914F6CDD1D
    FALLBACK_STATE = 0x9E3779B97F4A7C15  # seed 0 would lock the register

    def __init__(self, seed: int) -> None:
        self.state = (seed & _U64) or self.FALLBACK_STATE
        self._spare: float | None = None

    def next_u64(self) -> int:
        x = self.state
        x ^= (x >> 12)
        x = (x ^ (x << 25)) & _U64
        x ^= (x >> 27)
        self.state = x
        return (x * self.MULT) & _U64

    def next_unit(self) -> float:
        # (0, 1]: never 0, so it is safe inside log()
        return ((self.next_u64() >> 11) + 1) / float(1 << 53)

    def next_gauss(self) -> float:
        if self._spare is not None:
            z = self._spare
            self._spare = None
            return z
        u1 = self.next_unit()
        u2 = self.next_unit()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)


def generate_pattern(seed: int) -> TestPattern:
    """Deterministic Gaussian sampling pattern for the given 64-bit seed."""
    rng = XorShift64Star(seed)
    coords = np.empty((N_PAIRS, 4), dtype=np.int16)
    for i in range(N_PAIRS):
        for j in range(4):
            g = rng.next_gauss() * PATTERN_SIGMA
            coords[i, j] = min(max(int(math.floor(g + 0.5)), -PATCH_RADIUS), PATCH_RADIUS)
    return TestPattern(coords)


def box_smooth_sums(img: GrayImage) -> np.ndarray:
    """5x5 window sums (edge-replicated); comparing sums equals comparing means."""
    return local_mean_sums(img, SMOOTH_WINDOW)


def quantize_angle_bin(angle: float) -> int:
    return int(math.floor(angle / ANGLE_STEP + 0.5)) % N_ANGLE_BINS


def rotated_pairs(pattern: TestPattern, angle_bin: int) -> np.ndarray:
    """Pattern coordinates steered to the bin angle, clamped to the patch."""
    theta = angle_bin * ANGLE_STEP
    c, s = math.cos(theta), math.sin(theta)
    p = pattern.pairs.astype(np.float64)
    out = np.empty_like(p)
    out[:, 0] = p[:, 0] * c - p[:, 1] * s
    out[:, 1] = p[:, 0] * s + p[:, 1] * c
    out[:, 2] = p[:, 2] * c - p[:, 3] * s
    out[:, 3] = p[:, 2] * s + p[:, 3] * c
    rounded = np.floor(out + 0.5)
    return np.clip(rounded, -PATCH_RADIUS, PATCH_RADIUS).astype(np.int32)


def _bits_for(sums: np.ndarray, x: int, y: int, rot: np.ndarray) -> bytes:
    first = sums[y + rot[:, 1], x + rot[:, 0]]
    second = sums[y + rot[:, 3], x + rot[:, 2]]
    return np.packbits(first < second).tobytes()


def describe(img: GrayImage, m: Minutia, pattern: TestPattern) -> Descriptor256:
    """Steered binary descriptor at one minutia of a grayscale image."""
    h, w = img.shape
    r = PATCH_RADIUS
    if not (r <= m.x < w - r and r <= m.y < h - r):
        raise ValueError(f"31x31 patch at ({m.x}, {m.y}) exceeds {w}x{h} raster")
    sums = box_smooth_sums(img)
    rot = rotated_pairs(pattern, quantize_angle_bin(m.angle))
    return Descriptor256(_bits_for(sums, m.x, m.y, rot))


def describe_all(
    img: GrayImage, minutiae: list[Minutia], pattern: TestPattern
) -> list[Descriptor256]:
    """Describe many minutiae sharing one image; rotations cached per angle bin."""
    if not minutiae:
        return []
    h, w = img.shape
    r = PATCH_RADIUS
    for m in minutiae:
        if not (r <= m.x < w - r and r <= m.y < h - r):
            raise ValueError(f"31x31 patch at ({m.x}, {m.y}) exceeds {w}x{h} raster")
    sums = box_smooth_sums(img)
    rotations: dict[int, np.ndarray] = {}
    out = []
    for m in minutiae:
        b = quantize_angle_bin(m.angle)
        rot = rotations.get(b)
        if rot is None:
            rot = rotations[b] = rotated_pairs(pattern, b)
        out.append(Descriptor256(_bits_for(sums, m.x, m.y, rot)))
    return out


@dataclass
class PipelineResult:
    """Template plus every intermediate raster, for debugging and stage dumps."""

    working: RgbImage
    mask: BinaryImage
    clean: BinaryImage
    ellipse: segmentation.Ellipse
    gray: GrayImage
    blurred: GrayImage
    cropped: GrayImage
    enhanced: GrayImage
    binary: BinaryImage
    skel: BinaryImage
    minutiae: list[Minutia]
    template: Template


def run_pipeline(photo: RgbImage, label: str, cfg: PipelineConfig | None = None) -> PipelineResult:
    """The full acquisition-to-template pipeline, keeping every stage output."""
    if cfg is None:
        cfg = PipelineConfig()
    working = downscale(photo, cfg.working_max_side)
    mask = segmentation.skin_mask(working, cfg.skin)
    clean = segmentation.clean_mask(mask, cfg.open_radius, cfg.close_radius)
    try:
        ellipse = segmentation.mask_to_ellipse(clean)
    except NoFingerError:
        raise NoFingerError("no finger found") from None
    gray = to_grayscale(working)
    blurred = gaussian_blur(gray, cfg.blur_sigma)
    cropped = segmentation.elliptical_crop(blurred, ellipse, cfg.crop_background)
    enhanced = contrast_enhance(cropped, cfg.clip_limit, cfg.clahe_tile)
    binary = binarize(enhanced, cfg.binarize_window, cfg.binarize_offset)
    skel = zhang_suen_thin(binary)
    found = extract_minutiae(skel, enhanced, cfg.border_margin, cfg.patch_radius)
    if not found:
        raise NoFeaturesError("no features")
    pattern = generate_pattern(cfg.pattern_seed)
    descriptors = describe_all(enhanced, found, pattern)
    template = Template(
        version=TEMPLATE_VERSION,
        label=label,
        working_width=working.shape[1],
        working_height=working.shape[0],
        features=list(zip(found, descriptors)),
    )
    return PipelineResult(
        working=working,
        mask=mask,
        clean=clean,
        ellipse=ellipse,
        gray=gray,
        blurred=blurred,
        cropped=cropped,
        enhanced=enhanced,
        binary=binary,
        skel=skel,
        minutiae=found,
        template=template,
    )


def extract_template(photo: RgbImage, label: str, cfg: PipelineConfig | None = None) -> Template:
    """Run the pipeline and return just the template."""
    return run_pipeline(photo, label, cfg).template
