"""Deterministic synthetic finger-photo generator for tests and demos.

Renders a skin-toned elliptical finger over a non-skin background with a
dark quasi-concentric ridge pattern. Ridge endings come from seeded breaks;
bifurcations emerge from the interference of the radial field with a
secondary linear field. The whole scene is an analytic function of pattern
coordinates, so pose changes re-render exactly (no resampling blur).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imgops import RgbImage, save_png


@dataclass(frozen=True)
class Pose:
    rotation_deg: float = 0.0
    tx: float = 0.0
    ty: float = 0.0
    noise: float = 0.0  # gaussian sigma on 0..255 RGB values


def _hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized inverse hexcone; h degrees, s/v fractions; returns float 0..1."""
    h6 = (h % 360.0) / 60.0
    i = np.floor(h6).astype(int) % 6
    f = h6 - np.floor(h6)
    p = v * (1 - s)
    q = v * (1 - s * f)
    t = v * (1 - s * (1 - f))
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def render_finger(
    seed: int,
    width: int = 480,
    height: int = 640,
    pose: Pose | None = None,
) -> RgbImage:
    """Render one synthetic finger photo; identical (seed, pose) gives identical pixels."""
    if pose is None:
        pose = Pose()
    rng = np.random.default_rng(seed)

    # scene layout in pattern coordinates (scales with the canvas)
    scale = min(width, height) / 480.0
    ecx = width / 2.0
    ecy = height * 0.52
    erx = width * 0.28
    ery = height * 0.36
    core_x = ecx + float(rng.uniform(-8, 8)) * scale
    core_y = ecy - ery * 0.35 + float(rng.uniform(-10, 10)) * scale
    wavelength = 9.0 * scale
    squash = float(rng.uniform(0.75, 0.9))

    # secondary linear field; its beat with the radial field makes bifurcations
    beta = float(rng.uniform(0.30, 0.42))
    alpha2 = float(rng.uniform(0, 2 * math.pi))
    wavelength2 = wavelength * float(rng.uniform(1.08, 1.25))

    # smooth phase warp
    n_warp = 3
    warp_amp = rng.uniform(0.8, 2.0, size=n_warp)
    warp_len = rng.uniform(45, 110, size=n_warp) * scale
    warp_dir = rng.uniform(0, 2 * math.pi, size=n_warp)
    warp_phase = rng.uniform(0, 2 * math.pi, size=n_warp)

    # seeded ridge breaks (each break erases a small disk of ridge)
    n_breaks = int(rng.integers(45, 75))
    break_theta = rng.uniform(0, 2 * math.pi, size=n_breaks)
    break_rho = np.sqrt(rng.uniform(0.02, 0.92, size=n_breaks))
    break_x = ecx + erx * break_rho * np.cos(break_theta)
    break_y = ecy + ery * break_rho * np.sin(break_theta)
    break_r = rng.uniform(1.6, 4.2, size=n_breaks) * scale

    base_hue = 25.0 + float(rng.uniform(-4, 4))
    base_sat = 0.45 + float(rng.uniform(-0.04, 0.04))
    base_val = 0.80
    ridge_depth = 0.34
    illum_dir = float(rng.uniform(0, 2 * math.pi))
    illum_amp = float(rng.uniform(0.0, 0.035))

    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    # inverse pose: image pixel -> pattern coordinates
    theta = math.radians(pose.rotation_deg)
    c, s = math.cos(-theta), math.sin(-theta)
    dx = xx - width / 2.0 - pose.tx
    dy = yy - height / 2.0 - pose.ty
    px = c * dx - s * dy + width / 2.0
    py = s * dx + c * dy + height / 2.0

    inside = ((px - ecx) / erx) ** 2 + ((py - ecy) / ery) ** 2 <= 1.0

    rx = px - core_x
    ry = (py - core_y) * squash
    radial = np.sqrt(rx * rx + ry * ry)
    phase = 2 * math.pi * radial / wavelength
    for k in range(n_warp):
        proj = px * math.cos(warp_dir[k]) + py * math.sin(warp_dir[k])
        phase = phase + warp_amp[k] * np.sin(2 * math.pi * proj / warp_len[k] + warp_phase[k])
    linear = px * math.cos(alpha2) + py * math.sin(alpha2)
    field = np.cos(phase) + beta * np.cos(2 * math.pi * linear / wavelength2)

    # soft threshold of the interference field -> ridge occupancy in [0, 1]
    ridge = np.clip((field - 0.15) / 0.35, 0.0, 1.0)

    for bx, by, br in zip(break_x, break_y, break_r):
        d2 = (px - bx) ** 2 + (py - by) ** 2
        ridge = ridge * np.clip((np.sqrt(d2) - br) / (1.5 * scale), 0.0, 1.0)

    illum = illum_amp * (
        (px - ecx) * math.cos(illum_dir) + (py - ecy) * math.sin(illum_dir)
    ) / max(erx, ery)
    v = np.clip(base_val - ridge_depth * ridge + illum, 0.36, 1.0)
    h = np.full_like(v, base_hue)
    sat = np.full_like(v, base_sat)

    rgb = _hsv_to_rgb(h, sat, v)
    background = np.array([52.0, 63.0, 118.0]) / 255.0
    out = np.where(inside[:, :, None], rgb, background[None, None, :])
    out = out * 255.0

    if pose.noise > 0:
        noise_rng = np.random.default_rng(
            [seed & 0xFFFFFFFF, _pose_key(pose.rotation_deg), _pose_key(pose.tx), _pose_key(pose.ty), _pose_key(pose.noise)]
        )
        out = out + noise_rng.normal(0.0, pose.noise, size=out.shape)

    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def _pose_key(value: float) -> int:
    return int(round(value * 1000.0)) & 0xFFFFFFFF


def write_finger_png(
    path,
    seed: int,
    width: int = 480,
    height: int = 640,
    pose: Pose | None = None,
) -> None:
    save_png(path, render_finger(seed, width=width, height=height, pose=pose))
