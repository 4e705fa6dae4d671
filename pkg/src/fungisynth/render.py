"""Binary-coverage rasterizer for spores (discs) and branches (capsules).

Normalized coordinates map to pixels as ``(x * width, y * height)`` with the
origin at the top-left and y growing downward. Radii and stroke widths scale
by ``min(width, height)``. A pixel is painted when its center lies inside the
shape; there is no blending, so output is bit-stable across platforms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .lifecycle import Stage, WorldState
from .morphology import Segment

__all__ = [
    "Color",
    "Palette",
    "Raster",
    "interpolate_color",
    "draw_disc",
    "draw_stroke",
    "render_frame",
    "DEFAULT_Z_ORDER",
]

DEFAULT_Z_ORDER = (Stage.HYPHA, Stage.MYCELIUM, Stage.SPORE)
SUPERSAMPLE = 4


class Color(NamedTuple):
    r: float
    g: float
    b: float

    @classmethod
    def clamped(cls, r: float, g: float, b: float) -> "Color":
        return cls(*(min(1.0, max(0.0, float(c))) for c in (r, g, b)))

    def to_rgb8(self) -> tuple[int, int, int]:
        return tuple(int(math.floor(min(1.0, max(0.0, c)) * 255.0 + 0.5)) for c in self)


def interpolate_color(start: Color, end: Color, position: float) -> Color:
    """Channel-wise lerp; exact at both endpoints."""
    if not 0.0 <= position <= 1.0:
        raise ValueError(f"interpolation position {position} outside [0, 1]")
    return Color.clamped(*((1.0 - position) * s + position * e for s, e in zip(start, end)))


@dataclass(frozen=True)
class Palette:
    spore: tuple[Color, Color] = (Color(0.36, 0.22, 0.10), Color(0.78, 0.78, 0.76))
    hypha: tuple[Color, Color] = (Color(0.62, 0.85, 0.50), Color(0.05, 0.40, 0.12))
    mycelium: tuple[Color, Color] = (Color(0.65, 0.80, 0.95), Color(0.05, 0.15, 0.45))
    background: Color = Color(0.97, 0.96, 0.93)

    def stage_color(self, stage: Stage, T: float) -> Color:
        start, end = getattr(self, Stage(stage).value)
        return interpolate_color(start, end, T)


@dataclass
class Raster:
    width: int
    height: int
    background: Color = Color(1.0, 1.0, 1.0)
    pixels: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("raster dimensions must be positive")
        if self.pixels is None:
            self.pixels = np.empty((self.height, self.width, 3), dtype=np.uint8)
            self.clear()

    def clear(self) -> None:
        self.pixels[...] = self.background.to_rgb8()

    @property
    def scale(self) -> int:
        return min(self.width, self.height)

    def painted_mask(self) -> np.ndarray:
        return np.any(self.pixels != np.array(self.background.to_rgb8(), dtype=np.uint8), axis=-1)


def _span(lo: float, hi: float, limit: int) -> tuple[int, int]:
    # pixel indices k whose centers k + 0.5 lie in [lo, hi], clipped to [0, limit)
    return max(0, math.ceil(lo - 0.5)), min(limit, math.floor(hi - 0.5) + 1)


def _paint_disc_px(raster: Raster, cx: float, cy: float, r: float, rgb) -> None:
    if r <= 0:
        return
    c0, c1 = _span(cx - r, cx + r, raster.width)
    r0, r1 = _span(cy - r, cy + r, raster.height)
    if c0 >= c1 or r0 >= r1:
        return
    px = np.arange(c0, c1, dtype=np.float64) + 0.5 - cx
    py = np.arange(r0, r1, dtype=np.float64)[:, None] + 0.5 - cy
    mask = px * px + py * py <= r * r
    raster.pixels[r0:r1, c0:c1][mask] = rgb


def draw_disc(raster: Raster, center: tuple[float, float], radius: float, color: Color) -> Raster:
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    x, y = center
    _paint_disc_px(raster, x * raster.width, y * raster.height, radius * raster.scale, color.to_rgb8())
    return raster


def _paint_capsule_px(raster: Raster, x0, y0, x1, y1, half, rgb) -> None:
    dx, dy = x1 - x0, y1 - y0
    len2 = dx * dx + dy * dy
    if len2 == 0.0:
        _paint_disc_px(raster, x0, y0, half, rgb)
        return
    if half <= 0:
        return
    c0, c1 = _span(min(x0, x1) - half, max(x0, x1) + half, raster.width)
    r0, r1 = _span(min(y0, y1) - half, max(y0, y1) + half, raster.height)
    if c0 >= c1 or r0 >= r1:
        return
    px = np.arange(c0, c1, dtype=np.float64) + 0.5 - x0
    py = np.arange(r0, r1, dtype=np.float64)[:, None] + 0.5 - y0
    t = np.minimum(np.maximum((px * dx + py * dy) * (1.0 / len2), 0.0), 1.0)
    ex = px - t * dx
    ey = py - t * dy
    mask = ex * ex + ey * ey <= half * half
    raster.pixels[r0:r1, c0:c1][mask] = rgb


def draw_stroke(raster: Raster, segment: Segment, color: Color) -> Raster:
    """Paint ``segment`` as a capsule of its width (round caps, no anti-aliasing)."""
    w, h = raster.width, raster.height
    _paint_capsule_px(
        raster,
        segment.x0 * w, segment.y0 * h, segment.x1 * w, segment.y1 * h,
        0.5 * segment.width * raster.scale,
        color.to_rgb8(),
    )
    return raster


def _compose(raster: Raster, state: WorldState, segments: Iterable[Segment], palette: Palette, z_order) -> None:
    T = state.T
    w, h, scale = raster.width, raster.height, raster.scale
    by_stage: dict[Stage, list[Segment]] = {Stage.HYPHA: [], Stage.MYCELIUM: []}
    for seg in segments:
        by_stage[seg.stage].append(seg)
    for stage in z_order:
        stage = Stage(stage)
        rgb = palette.stage_color(stage, T).to_rgb8()
        if stage is Stage.SPORE:
            for s in state.spores:
                _paint_disc_px(raster, s.x * w, s.y * h, s.size * scale, rgb)
        else:
            for seg in by_stage[stage]:
                _paint_capsule_px(raster, seg.x0 * w, seg.y0 * h, seg.x1 * w, seg.y1 * h,
                                  0.5 * seg.width * scale, rgb)


def render_frame(
    state: WorldState,
    segments: Sequence[Segment],
    palette: Palette = Palette(),
    size: tuple[int, int] = (512, 512),
    z_order: Sequence[Stage] = DEFAULT_Z_ORDER,
    antialias: bool = False,
) -> Raster:
    """Rasterize one frame. Every entity is colored by its stage ramp at the frame's T."""
    w, h = size
    if w < 16 or h < 16:
        raise ValueError(f"image size must be at least 16x16, got {w}x{h}")
    if sorted(Stage(s).value for s in z_order) != sorted(s.value for s in Stage):
        raise ValueError(f"z_order must list each stage exactly once, got {z_order}")
    if not antialias:
        raster = Raster(w, h, palette.background)
        _compose(raster, state, segments, palette, z_order)
        return raster
    big = Raster(w * SUPERSAMPLE, h * SUPERSAMPLE, palette.background)
    _compose(big, state, segments, palette, z_order)
    blocks = big.pixels.reshape(h, SUPERSAMPLE, w, SUPERSAMPLE, 3).astype(np.float64).mean(axis=(1, 3))
    return Raster(w, h, palette.background, np.floor(blocks + 0.5).astype(np.uint8))
