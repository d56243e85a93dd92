"""Yaw-only pinhole camera and screen projection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field


class RenderError(Exception):
    pass


class Behind(RenderError):
    """Point is at or behind the camera plane."""


class AtHorizon(RenderError):
    """Screen row lies on the horizon; no plane is visible there."""


class CameraOutOfWorld(RenderError):
    pass


ANGLE_STEPS = 1 << 32  # binary angle units per full turn


def normalize_yaw(yaw: float) -> float:
    """Wrap into [0, 360) on a 2**-32 turn grid, so yaw and yaw + 360 give the same camera."""
    steps = round(float(yaw) * (ANGLE_STEPS / 360.0)) % ANGLE_STEPS
    return steps * (360.0 / ANGLE_STEPS)


def _cos_sin(deg: float) -> tuple[float, float]:
    # exact on the axes so axis-aligned views have no drift
    quarter, rem = divmod(deg, 90.0)
    if rem == 0.0:
        return ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[int(quarter) % 4]
    rad = math.radians(deg)
    return math.cos(rad), math.sin(rad)


@dataclass(frozen=True)
class Camera:
    """Viewpoint in map units. ``yaw`` is degrees counter-clockwise from +x."""
    x: float
    y: float
    eye_z: float
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))

    @property
    def forward(self) -> tuple[float, float]:
        return _cos_sin(self.yaw)

    @property
    def right(self) -> tuple[float, float]:
        c, s = _cos_sin(self.yaw)
        return s, -c

    def to_view(self, x: float, y: float) -> tuple[float, float]:
        """World (x, y) to (depth along forward, lateral offset to the right)."""
        c, s = _cos_sin(self.yaw)
        dx, dy = x - self.x, y - self.y
        return dx * c + dy * s, dx * s - dy * c


@dataclass(frozen=True)
class RenderConfig:
    width: int = 320
    height: int = 200
    hfov: float = 90.0
    apply_light: bool = True
    depth_scale: float = 8.0
    sky_depth_sentinel: int = 65535
    sky_color: tuple[int, int, int] = field(default=(96, 128, 200))

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"frame size must be positive, got {self.width}x{self.height}")
        if not 10.0 < self.hfov < 170.0:
            raise ValueError(f"hfov must lie in (10, 170), got {self.hfov}")

    @property
    def focal(self) -> float:
        return (self.width / 2) / math.tan(math.radians(self.hfov) / 2)

    @property
    def center(self) -> float:
        return self.width / 2

    @property
    def horizon(self) -> float:
        return self.height / 2


def world_to_screen(camera: Camera, cfg: RenderConfig,
                    p: tuple[float, float, float]) -> tuple[float, float, float]:
    """Project a world point to continuous (column, row, view depth).

    Pixel ``(c, r)`` covers ``[c, c+1) x [r, r+1)``; its center is ``(c+0.5, r+0.5)``.
    """
    depth, lateral = camera.to_view(p[0], p[1])
    if depth <= 0:
        raise Behind(f"point {p} has view depth {depth}")
    f = cfg.focal
    return (cfg.center + f * lateral / depth,
            cfg.horizon + f * (camera.eye_z - p[2]) / depth,
            depth)


def plane_depth_at_row(camera: Camera, cfg: RenderConfig, plane_z: float, row: float) -> float:
    """View depth at which the ray through screen ``row`` meets the plane at ``plane_z``."""
    dy = row - cfg.horizon
    if dy == 0:
        raise AtHorizon(f"row {row} is the horizon")
    dz = camera.eye_z - plane_z
    if dz != 0 and (dz > 0) != (dy > 0):
        raise AtHorizon(f"plane at z={plane_z} is not visible at row {row}")
    return cfg.focal * abs(dz) / abs(dy)
