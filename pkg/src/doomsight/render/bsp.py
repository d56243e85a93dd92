"""BSP point classification and descent, in 16.16 fixed point."""
from __future__ import annotations

import enum
import math

from ..level import LEAF, LevelMap, Node, is_leaf

FRACBITS = 16
FRACUNIT = 1 << FRACBITS


class Side(enum.IntEnum):
    FRONT = 0
    BACK = 1


def to_fixed(v: float) -> int:
    return int(math.floor(v * FRACUNIT + 0.5))


def classify_point(node: Node, p: tuple[float, float]) -> Side:
    """Front iff the point is left of (or on) the partition direction."""
    px, py = to_fixed(p[0]), to_fixed(p[1])
    ox, oy = node.x << FRACBITS, node.y << FRACBITS
    cross = node.dx * (py - oy) - node.dy * (px - ox)
    return Side.FRONT if cross >= 0 else Side.BACK


def child(node: Node, side: Side) -> int:
    return node.front if side is Side.FRONT else node.back


def subsector_at(level: LevelMap, p: tuple[float, float]) -> int:
    ref = level.root
    while not is_leaf(ref):
        node = level.nodes[ref]
        ref = child(node, classify_point(node, p))
    return ref & ~LEAF


def sector_at(level: LevelMap, p: tuple[float, float]) -> int:
    return level.subsector_sector(subsector_at(level, p))
