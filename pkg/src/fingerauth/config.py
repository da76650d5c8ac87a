"""Tunable parameters for the pipeline and the matcher.

Configs serialize to a flat ``key=value`` text format (one pair per line,
``#`` comments allowed) so a run can be reproduced from a single small file.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .segmentation import HsvRange, DEFAULT_SKIN_RANGE


@dataclass(frozen=True)
class RansacConfig:
    inlier_threshold: float = 5.0  # px reprojection error
    max_iterations: int = 1000
    min_scale: float = 0.5
    max_scale: float = 2.0
    confidence: float = 0.99  # adaptive early-exit target
    seed: int = 1

    def __post_init__(self) -> None:
        if self.inlier_threshold <= 0:
            raise ValueError("inlier_threshold must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 < self.min_scale <= self.max_scale:
            raise ValueError("need 0 < min_scale <= max_scale")


@dataclass(frozen=True)
class MatchConfig:
    ratio: float = 0.75  # Lowe ratio threshold
    ransac: RansacConfig = field(default_factory=RansacConfig)

    def __post_init__(self) -> None:
        if not 0 < self.ratio <= 1:
            raise ValueError("ratio must lie in (0, 1]")


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of the photo-to-template pipeline plus matching knobs.

    Pixel-valued parameters are expressed at the working scale, where the
    longer image side is at most working_max_side.
    """

    working_max_side: int = 640
    skin: HsvRange = DEFAULT_SKIN_RANGE
    open_radius: int = 3
    close_radius: int = 3
    blur_sigma: float = 1.5
    clip_limit: float = 2.0
    clahe_tile: int = 32
    binarize_window: int = 25
    binarize_offset: float = 4.0
    crop_background: int = 255
    border_margin: int = 15
    patch_radius: int = 15
    pattern_seed: int = 0x46424C58
    match: MatchConfig = field(default_factory=MatchConfig)


_SKIN_KEYS = {
    "skin_h_lo": "h_lo",
    "skin_h_hi": "h_hi",
    "skin_s_lo": "s_lo",
    "skin_s_hi": "s_hi",
    "skin_v_lo": "v_lo",
    "skin_v_hi": "v_hi",
}
_RANSAC_KEYS = {
    "ransac_inlier_threshold": "inlier_threshold",
    "ransac_max_iterations": "max_iterations",
    "ransac_min_scale": "min_scale",
    "ransac_max_scale": "max_scale",
    "ransac_confidence": "confidence",
    "ransac_seed": "seed",
}
_INT_KEYS = {
    "working_max_side",
    "open_radius",
    "close_radius",
    "clahe_tile",
    "binarize_window",
    "crop_background",
    "border_margin",
    "patch_radius",
    "pattern_seed",
    "ransac_max_iterations",
    "ransac_seed",
}


def config_to_text(cfg: PipelineConfig) -> str:
    """Render every tunable as key=value lines, seeds in hex."""
    lines: list[str] = []
    for name in (
        "working_max_side",
        "open_radius",
        "close_radius",
        "blur_sigma",
        "clip_limit",
        "clahe_tile",
        "binarize_window",
        "binarize_offset",
        "crop_background",
        "border_margin",
        "patch_radius",
    ):
        lines.append(f"{name}={getattr(cfg, name)}")
    lines.append(f"pattern_seed={cfg.pattern_seed:#x}")
    for key, attr in _SKIN_KEYS.items():
        lines.append(f"{key}={getattr(cfg.skin, attr)}")
    lines.append(f"ratio={cfg.match.ratio}")
    for key, attr in _RANSAC_KEYS.items():
        lines.append(f"{key}={getattr(cfg.match.ransac, attr)}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse key=value lines, overriding fields of `base` (defaults when None)."""
    cfg = base if base is not None else PipelineConfig()
    plain: dict = {}
    skin: dict = {}
    ransac: dict = {}
    ratio = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            parsed = int(value, 0) if key in _INT_KEYS else float(value)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key}: {value!r}") from exc
        if key in _SKIN_KEYS:
            skin[_SKIN_KEYS[key]] = parsed
        elif key in _RANSAC_KEYS:
            ransac[_RANSAC_KEYS[key]] = parsed
        elif key == "ratio":
            ratio = parsed
        elif hasattr(cfg, key) and key != "skin" and key != "match":
            plain[key] = parsed
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    if skin:
        plain["skin"] = dataclasses.replace(cfg.skin, **skin)
    match_kwargs: dict = {}
    if ransac:
        match_kwargs["ransac"] = dataclasses.replace(cfg.match.ransac, **ransac)
    if ratio is not None:
        match_kwargs["ratio"] = ratio
    if match_kwargs:
        plain["match"] = dataclasses.replace(cfg.match, **match_kwargs)
    return dataclasses.replace(cfg, **plain)


def load_config(path: str | Path, base: PipelineConfig | None = None) -> PipelineConfig:
    return config_from_text(Path(path).read_text(), base=base)
