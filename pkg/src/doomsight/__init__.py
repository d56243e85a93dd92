"""Deterministic frame, depth and object-mask extraction from Doom maps, plus Coco export."""

__version__ = "0.1.0"
