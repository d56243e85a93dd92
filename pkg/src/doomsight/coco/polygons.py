"""Mask boundaries as Coco polygon rings.

Rings follow pixel edges, so vertices sit on integer pixel corners and a
ring encloses exactly the pixels of its component.  Coco polygons have no
inner rings, so a component with holes is cut into hole-free horizontal
bands first; the union of their rings is the component itself.  Image
coordinates: x to the right, y down; rings run with the interior on the
right, starting at the piece's top-left corner.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

# 4-connectivity: pixels touching only at a corner are separate components
_CROSS = ndimage.generate_binary_structure(2, 1)

# direction index -> (dx, dy); 0 east, 1 south, 2 west, 3 north
_STEPS = ((1, 0), (0, 1), (-1, 0), (0, -1))


def _boundary_edges(filled: np.ndarray) -> dict[tuple[int, int], int]:
    """Outgoing boundary edge direction per corner vertex.

    A hole-free 4-connected component has no pinch vertices (the pixel cut off
    by a diagonal touch would be a hole), so each vertex has one successor.
    """
    p = np.pad(filled, 1)
    inner = p[1:-1, 1:-1]
    out: dict[tuple[int, int], int] = {}
    sides = (
        (~p[:-2, 1:-1], 0, 0, 0),   # top edge runs east from (x, y)
        (~p[1:-1, 2:], 1, 0, 1),    # right edge runs south from (x+1, y)
        (~p[2:, 1:-1], 1, 1, 2),    # bottom edge runs west from (x+1, y+1)
        (~p[1:-1, :-2], 0, 1, 3),   # left edge runs north from (x, y+1)
    )
    for open_side, ox, oy, direction in sides:
        ys, xs = np.nonzero(inner & open_side)
        for x, y in zip((xs + ox).tolist(), (ys + oy).tolist()):
            out[(x, y)] = direction
    return out


def _walk(edges: dict[tuple[int, int], int], start: tuple[int, int]) -> list[tuple[int, int]]:
    ring = [start]
    x, y = start
    while True:
        dx, dy = _STEPS[edges[(x, y)]]
        x, y = x + dx, y + dy
        if (x, y) == start:
            return ring
        ring.append((x, y))


def _simplify(ring: list[tuple[int, int]]) -> list[tuple[int, int]]:
    n = len(ring)
    keep = []
    for k in range(n):
        ax, ay = ring[k - 1]
        bx, by = ring[k]
        cx, cy = ring[(k + 1) % n]
        if (bx - ax) * (cy - by) - (by - ay) * (cx - bx) != 0:
            keep.append(ring[k])
    return keep


def trace_component(filled: np.ndarray, offset: tuple[int, int] = (0, 0)) -> list[int]:
    """Ring around one hole-free 4-connected component."""
    edges = _boundary_edges(filled)
    start = min(edges, key=lambda v: (v[1], v[0]))
    flat = []
    for x, y in _simplify(_walk(edges, start)):
        flat += [x + offset[0], y + offset[1]]
    return flat


def _components(mask: np.ndarray, x0: int, y0: int):
    labels, _ = ndimage.label(mask, structure=_CROSS)
    for k, sl in enumerate(ndimage.find_objects(labels), 1):
        if sl is not None:
            yield labels[sl] == k, x0 + sl[1].start, y0 + sl[0].start


def hole_free_pieces(mask: np.ndarray) -> list[tuple[np.ndarray, int, int]]:
    """Split a mask into 4-connected pieces without holes, as (piece, x, y).

    A component with holes is cut above the top row of its highest hole.
    That opens the hole in the lower band and cannot close any background
    region, so every cut removes at least one hole.
    """
    out = []
    stack = list(_components(np.asarray(mask, bool), 0, 0))
    while stack:
        comp, x, y = stack.pop()
        holes = ndimage.binary_fill_holes(comp) & ~comp
        if not holes.any():
            out.append((comp, x, y))
            continue
        r = int(np.nonzero(holes.any(axis=1))[0][0])
        stack += _components(comp[:r], x, y)
        stack += _components(comp[r:], x, y + r)
    return out


def trace_polygons(mask: np.ndarray, offset: tuple[int, int] = (0, 0)) -> list[list[int]]:
    """Rings covering the mask exactly, as flat [x0, y0, x1, y1, ...] lists.

    Each 4-connected component gives one ring, or one ring per band when it
    has holes.  ``offset`` (x, y) is added to every vertex, for masks cropped
    out of a larger image.  Rings are ordered by their top-left corner.
    """
    rings = [trace_component(piece, (offset[0] + x, offset[1] + y)) for piece, x, y in hole_free_pieces(mask)]
    rings.sort(key=lambda r: (r[1], r[0]))
    return rings
