"""Distance light diminishing.

Follows the shape of the classic ``zlight`` table: 16 light levels, 32
colormaps, distance bucketed in 16-unit steps up to 127 buckets.
"""
from __future__ import annotations

import numpy as np

from ..graphics import PaletteSet
from .camera import RenderConfig

LIGHT_LEVELS = 16
NUM_COLORMAPS = 32
MAX_LIGHT_Z = 128
LIGHT_Z_SHIFT = 4  # map units per bucket = 16


def light_rows(sector_light, depth) -> np.ndarray:
    """Colormap row per pixel; 0 brightest, 31 darkest. Broadcasts."""
    level = np.clip(np.asarray(sector_light, np.int64) >> 4, 0, LIGHT_LEVELS - 1)
    start = (LIGHT_LEVELS - 1 - level) * 2 * NUM_COLORMAPS // LIGHT_LEVELS
    d = np.asarray(depth, np.float64)
    bucket = np.clip(np.floor(np.where(np.isfinite(d), d, 0.0)), 0, None).astype(np.int64)
    bucket = np.minimum(bucket >> LIGHT_Z_SHIFT, MAX_LIGHT_Z - 1)
    scale = 160 // (bucket + 1)
    return np.clip(start - scale // 2, 0, NUM_COLORMAPS - 1)


def light_row(sector_light: int, depth: float) -> int:
    return int(light_rows(sector_light, depth))


def shade(texel_index: int, sector_light: int, view_depth: float, cfg: RenderConfig,
          palette: PaletteSet) -> tuple[int, int, int]:
    row = light_row(sector_light, view_depth) if cfg.apply_light else 0
    r, g, b = palette.render_palette[palette.colormaps[row, texel_index]]
    return int(r), int(g), int(b)
