from .bsp import Side, classify_point, sector_at, subsector_at, to_fixed
from .camera import (AtHorizon, Behind, Camera, CameraOutOfWorld, RenderConfig, RenderError,
                     plane_depth_at_row, world_to_screen)
from .frame import HORIZONTAL, INSTANCE_BASE, SKY, VERTICAL, FrameBuffers, instance_label, render_frame
from .lighting import light_row, light_rows, shade

__all__ = [
    "AtHorizon", "Behind", "Camera", "CameraOutOfWorld", "FrameBuffers", "HORIZONTAL",
    "INSTANCE_BASE", "RenderConfig", "RenderError", "SKY", "Side", "VERTICAL", "classify_point",
    "instance_label", "light_row", "light_rows", "plane_depth_at_row", "render_frame",
    "sector_at", "shade", "subsector_at", "to_fixed", "world_to_screen",
]
