"""Synthetic WADs built from grids of rectangular sectors.

Every open grid cell becomes one sector and one subsector; the BSP is a
kd-tree over cell boundaries, so each subsector's segs close its square.
Void cells (``None``) are solid rock behind one-sided walls.  Used for test
fixtures and for the demo data set; not a general node builder.

    python -m doomsight.mapgen demo.wad --maps 2
"""
from __future__ import annotations

import argparse
import colorsys
import math
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .graphics import TextureDef, encode_picture, encode_pnames, encode_texture_lump
from .level import (LEAF, NO_SIDE, LevelMap, Linedef, Node, Sector, Seg, Sidedef, Subsector,
                    Thing, Vertex, level_lumps)
from .wad import WadKind, build_wad

SKY = "F_SKY1"
EYE_HEIGHT = 41


@dataclass(frozen=True)
class Cell:
    floor: int = 0
    ceiling: int = 128
    light: int = 192
    floor_flat: str = "FLOOR0"
    ceiling_flat: str = "CEIL0"
    wall: str = "WALL0"


def _bam(dx: float, dy: float) -> int:
    ang = int(round(math.degrees(math.atan2(dy, dx)) / 360.0 * 65536)) & 0xFFFF
    return ang - 0x10000 if ang >= 0x8000 else ang


def grid_level(name: str, cells: Sequence[Sequence[Optional[Cell]]], cell_size: int = 128,
               things: Iterable[tuple[int, int, int, int]] = (), origin=(0, 0)) -> LevelMap:
    """Build a map; ``cells[j][i]`` is the cell at column i, row j (row 0 lowest y).

    ``things`` are ``(x, y, angle, doomed_type)``.
    """
    ny, nx = len(cells), len(cells[0])
    ox, oy = origin
    open_cells = [(i, j) for j in range(ny) for i in range(nx) if cells[j][i] is not None]
    if not open_cells:
        raise ValueError("grid has no open cells")
    sector_of = {ij: k for k, ij in enumerate(open_cells)}
    sectors = []
    for i, j in open_cells:
        c = cells[j][i]
        sectors.append(Sector(c.floor, c.ceiling, c.floor_flat, c.ceiling_flat, c.light))

    vertices: list[Vertex] = []
    vindex: dict[tuple[int, int], int] = {}

    def vert(gx, gy):
        key = (gx, gy)
        if key not in vindex:
            vindex[key] = len(vertices)
            vertices.append(Vertex(ox + gx * cell_size, oy + gy * cell_size))
        return vindex[key]

    linedefs: list[Linedef] = []
    sidedefs: list[Sidedef] = []
    cell_segs: dict[tuple[int, int], list[Seg]] = {ij: [] for ij in open_cells}

    def edges(i, j):
        # clockwise around the cell so the cell is on the right of each edge
        return (
            ((i + 1, j), (i, j), (i, j - 1)),          # bottom
            ((i, j), (i, j + 1), (i - 1, j)),          # left
            ((i, j + 1), (i + 1, j + 1), (i, j + 1)),  # top
            ((i + 1, j + 1), (i + 1, j), (i + 1, j)),  # right
        )

    done: set[frozenset] = set()
    for i, j in open_cells:
        cell = cells[j][i]
        for a, b, (ni, nj) in edges(i, j):
            key = frozenset((a, b))
            if key in done:
                continue
            done.add(key)
            v1, v2 = vert(*a), vert(*b)
            neighbour = (ni, nj) if 0 <= ni < nx and 0 <= nj < ny and cells[nj][ni] is not None else None
            line_index = len(linedefs)
            p, q = vertices[v1], vertices[v2]
            if neighbour is None:
                sidedefs.append(Sidedef(0, 0, "-", "-", cell.wall, sector_of[(i, j)]))
                linedefs.append(Linedef(v1, v2, 1, 0, 0, len(sidedefs) - 1, NO_SIDE))
                cell_segs[(i, j)].append(Seg(v1, v2, _bam(q.x - p.x, q.y - p.y), line_index, 0, 0))
            else:
                other = cells[nj][ni]
                sidedefs.append(Sidedef(0, 0, cell.wall, cell.wall, "-", sector_of[(i, j)]))
                sidedefs.append(Sidedef(0, 0, other.wall, other.wall, "-", sector_of[neighbour]))
                linedefs.append(Linedef(v1, v2, 4, 0, 0, len(sidedefs) - 2, len(sidedefs) - 1))
                cell_segs[(i, j)].append(Seg(v1, v2, _bam(q.x - p.x, q.y - p.y), line_index, 0, 0))
                cell_segs[neighbour].append(Seg(v2, v1, _bam(p.x - q.x, p.y - q.y), line_index, 1, 0))

    segs: list[Seg] = []
    subsectors: list[Subsector] = []
    ss_of: dict[tuple[int, int], int] = {}
    for ij in open_cells:
        ss_of[ij] = len(subsectors)
        subsectors.append(Subsector(len(cell_segs[ij]), len(segs)))
        segs.extend(cell_segs[ij])

    nodes: list[Node] = []

    def bbox(group):
        xs = [i for i, _ in group]
        ys = [j for _, j in group]
        return (oy + (max(ys) + 1) * cell_size, oy + min(ys) * cell_size,
                ox + min(xs) * cell_size, ox + (max(xs) + 1) * cell_size)

    def build(group) -> int:
        if len(group) == 1:
            return LEAF | ss_of[group[0]]
        xs = sorted({i for i, _ in group})
        ys = sorted({j for _, j in group})
        if len(xs) >= len(ys) and len(xs) > 1:
            gx = xs[len(xs) // 2]
            front = [c for c in group if c[0] < gx]
            back = [c for c in group if c[0] >= gx]
            lo, hi = min(ys), max(ys) + 1
            x, y, dx, dy = ox + gx * cell_size, oy + lo * cell_size, 0, (hi - lo) * cell_size
        else:
            gy = ys[len(ys) // 2]
            front = [c for c in group if c[1] >= gy]
            back = [c for c in group if c[1] < gy]
            lo, hi = min(xs), max(xs) + 1
            x, y, dx, dy = ox + lo * cell_size, oy + gy * cell_size, (hi - lo) * cell_size, 0
        f, b = build(front), build(back)
        nodes.append(Node(x, y, dx, dy, bbox(front), bbox(back), f, b))
        return len(nodes) - 1

    build(open_cells)
    thing_list = tuple(Thing(x, y, angle, t, 7, k) for k, (x, y, angle, t) in enumerate(things))
    return LevelMap(name.upper(), tuple(vertices), tuple(linedefs), tuple(sidedefs), tuple(sectors),
                    tuple(segs), tuple(subsectors), tuple(nodes), thing_list)


def room_level(name: str = "MAP01", width: int = 256, depth: int = 256, floor: int = 0,
               ceiling: int = 128, things=(), **cell) -> LevelMap:
    """Single rectangular sector: 4 vertices, 4 one-sided linedefs, no nodes."""
    if width != depth:
        raise ValueError("room_level builds square rooms; use grid_level for others")
    return grid_level(name, [[Cell(floor, ceiling, **cell)]], width, things)


# graphics ------------------------------------------------------------------

def demo_palette() -> np.ndarray:
    """14 palettes: 16 hue ramps of 16 shades, then red/gold/green tints."""
    base = np.zeros((256, 3), np.uint8)
    for i in range(256):
        ramp, shade = divmod(i, 16)
        v = (shade + 1) / 16
        if ramp == 0:
            r = g = b = v
        else:
            r, g, b = colorsys.hsv_to_rgb((ramp - 1) / 15, 0.65, v)
        base[i] = np.round(np.array([r, g, b]) * 255)
    pals = [base]
    for k in range(1, 14):
        tint = np.array([255, 0, 0] if k < 9 else [215, 186, 69] if k < 13 else [0, 255, 0], float)
        amt = (k % 9 + 1) / 12
        pals.append(np.round(base * (1 - amt) + tint * amt).astype(np.uint8))
    return np.stack(pals)


def demo_colormap(palette: np.ndarray) -> np.ndarray:
    pal = palette.astype(np.float64)

    def nearest(colors):
        d = ((colors[:, None, :] - pal[None, :, :]) ** 2).sum(axis=2)
        return np.argmin(d, axis=1).astype(np.uint8)

    maps = [np.arange(256, dtype=np.uint8)]
    for row in range(1, 32):
        maps.append(nearest(pal * (1 - row / 32)))
    grey = pal.mean(axis=1, keepdims=True)
    maps.append(nearest(np.repeat(255 - grey, 3, axis=1)))
    maps.append(nearest(np.zeros((256, 3))))
    return np.stack(maps)


def _brick(ramp: int, size=64) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size]
    row = yy // 16
    mortar = (yy % 16 == 0) | ((xx + (row % 2) * 16) % 32 == 0)
    shade = 8 + ((xx * 7 + yy * 3) % 5)
    return np.where(mortar, 4, ramp * 16 + shade).astype(np.uint8)


def _flat(ramp: int, pattern: int, size=64) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size]
    if pattern == 0:
        shade = 6 + ((xx // 8 + yy // 8) % 2) * 4
    else:
        shade = 5 + ((xx * xx + yy * 3) % 7)
    return (ramp * 16 + shade).astype(np.uint8)


def _sprite(ramp: int, width=40, height=56, facing: int = 0):
    yy, xx = np.mgrid[0:height, 0:width]
    cx, cy = (width - 1) / 2, (height - 1) / 2
    body = ((xx - cx) / (width / 2)) ** 2 + ((yy - cy) / (height / 2)) ** 2 <= 1.0
    head = ((xx - cx) ** 2 + (yy - 8) ** 2) <= 49
    opaque = body | head
    index = np.full((height, width), ramp * 16 + 10, np.uint8)
    # a darker stripe on one side shows the facing direction
    stripe = xx < width // 3 + facing
    index[stripe] = ramp * 16 + 5
    return index, opaque


DEMO_SPRITES = {
    "POSS": 2, "TROO": 4, "SARG": 12, "BAR1": 7, "STIM": 10, "MEDI": 11, "COLU": 14, "CLIP": 6,
}


def resource_lumps() -> list[tuple[str, bytes]]:
    pal = demo_palette()
    lumps = [("PLAYPAL", pal.tobytes()), ("COLORMAP", demo_colormap(pal[0]).tobytes())]
    patch_names = ["WALLP0", "WALLP1", "WALLP2", "WALLP3", "DOTP"]
    patches = [encode_picture(_brick(r)) for r in (1, 5, 9, 13)]
    dot = np.full((16, 16), 3 * 16 + 12, np.uint8)
    patches.append(encode_picture(dot))
    defs = [TextureDef(f"WALL{k}", 64, 64, ((0, 0, k),)) for k in range(4)]
    defs.append(TextureDef("WALL4", 64, 128, ((0, 0, 0), (0, 64, 1), (24, 56, 4))))
    lumps += [("PNAMES", encode_pnames(patch_names)), ("TEXTURE1", encode_texture_lump(defs))]
    lumps.append(("P_START", b""))
    lumps += list(zip(patch_names, patches))
    lumps.append(("P_END", b""))
    lumps.append(("F_START", b""))
    for name, flat in (("FLOOR0", _flat(3, 0)), ("FLOOR1", _flat(8, 1)),
                       ("CEIL0", _flat(0, 1)), ("CEIL1", _flat(15, 0)), (SKY, _flat(10, 0))):
        lumps.append((name, flat.tobytes()))
    lumps.append(("F_END", b""))
    lumps.append(("S_START", b""))
    for prefix, ramp in DEMO_SPRITES.items():
        if prefix == "POSS":
            # eight rotations with mirrored pairs
            for name, facing in (("POSSA1", 0), ("POSSA2A8", 2), ("POSSA3A7", 4),
                                 ("POSSA4A6", 6), ("POSSA5", 8)):
                index, opaque = _sprite(ramp, facing=facing)
                lumps.append((name, encode_picture(index, opaque, left=20, top=52)))
        else:
            index, opaque = _sprite(ramp, 32, 40)
            lumps.append((prefix + "A0", encode_picture(index, opaque, left=16, top=38)))
    lumps.append(("S_END", b""))
    return lumps


# demo content ----------------------------------------------------------------

DEMO_THING_TYPES = (3004, 3001, 3002, 2035, 2011, 2012, 2028, 2007)


def demo_level(name: str = "MAP01", seed: int = 1, size: int = 6, cell_size: int = 128,
               thing_count: int = 12) -> LevelMap:
    rng = random.Random(f"{name}:{seed}")
    cells: list[list[Optional[Cell]]] = []
    for j in range(size):
        row = []
        for i in range(size):
            if (i, j) != (0, 0) and rng.random() < 0.12:
                row.append(None)
                continue
            floor = rng.choice((0, 0, 0, 16, 24, -16))
            ceiling = floor + rng.choice((96, 128, 128, 160, 192))
            sky = rng.random() < 0.2
            row.append(Cell(floor, ceiling, rng.choice((128, 160, 192, 224, 255)),
                            rng.choice(("FLOOR0", "FLOOR1")), SKY if sky else rng.choice(("CEIL0", "CEIL1")),
                            rng.choice(("WALL0", "WALL1", "WALL2", "WALL3", "WALL4"))))
        cells.append(row)
    cells[0][0] = Cell(0, 128, 192, "FLOOR0", "CEIL0", "WALL0")
    open_cells = [(i, j) for j in range(size) for i in range(size) if cells[j][i] is not None]
    things = [(cell_size // 2, cell_size // 2, 0, 1)]  # player start
    for _ in range(thing_count):
        i, j = rng.choice(open_cells)
        x = i * cell_size + rng.randrange(24, cell_size - 24)
        y = j * cell_size + rng.randrange(24, cell_size - 24)
        things.append((x, y, rng.choice((0, 45, 90, 135, 180, 225, 270, 315)), rng.choice(DEMO_THING_TYPES)))
    return grid_level(name, cells, cell_size, things)


def demo_wad(map_names: Sequence[str] = ("MAP01",), seed: int = 1, kind: WadKind = WadKind.IWAD,
             size: int = 6) -> bytes:
    lumps = resource_lumps()
    for name in map_names:
        lumps += level_lumps(demo_level(name, seed, size))
    return build_wad(lumps, kind)


def orbit_track(level: LevelMap, samples: int, start_tic: int = 0) -> str:
    """Pose script that turns on the spot near the player start while sidestepping."""
    start = next((t for t in level.things if t.doomed_type == 1), None)
    x0, y0 = (start.x, start.y) if start else (64, 64)
    from .render.bsp import sector_at
    floor = level.sectors[sector_at(level, (x0, y0))].floor
    lines = ["# tic x y z yaw"]
    for k in range(samples):
        phase = 2 * math.pi * k / max(samples, 1)
        x = x0 + 12.0 * math.cos(phase)
        y = y0 + 12.0 * math.sin(phase)
        yaw = (k * 360.0 / max(samples, 1) * 3) % 360.0
        lines.append(f"{start_tic + k} {x:.3f} {y:.3f} {floor + EYE_HEIGHT:.3f} {yaw:.3f}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m doomsight.mapgen",
                                     description="Write a synthetic demo WAD (and optional pose track).")
    parser.add_argument("out")
    parser.add_argument("--maps", type=int, default=1, help="number of MAPxx levels (1-32)")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--size", type=int, default=6, help="grid cells per side")
    parser.add_argument("--track", help="also write an orbit pose track for MAP01 here")
    parser.add_argument("--frames", type=int, default=35)
    args = parser.parse_args(argv)
    if not 1 <= args.maps <= 32:
        parser.error("--maps must be within 1..32")
    names = [f"MAP{k:02d}" for k in range(1, args.maps + 1)]
    with open(args.out, "wb") as f:
        f.write(demo_wad(names, args.seed, size=args.size))
    if args.track:
        with open(args.track, "w", encoding="utf-8") as f:
            f.write(orbit_track(demo_level(names[0], args.seed, args.size), args.frames))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
