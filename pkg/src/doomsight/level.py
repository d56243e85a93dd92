"""Map geometry lumps: decoding, cross-reference validation, and re-encoding."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .wad import MissingLump, WadArchive, WadError, decode_name, encode_name, lump_bytes

MAP_LUMPS = ("THINGS", "LINEDEFS", "SIDEDEFS", "VERTEXES", "SEGS", "SSECTORS", "NODES", "SECTORS")
# lumps that may sit between the marker and the end of a map block
_OPTIONAL_LUMPS = ("REJECT", "BLOCKMAP")

LEAF = 0x8000
NO_SIDE = -1

THING = struct.Struct("<hhhhh")
LINEDEF = struct.Struct("<HHhhhHH")
SIDEDEF = struct.Struct("<hh8s8s8sH")
VERTEX = struct.Struct("<hh")
SEG = struct.Struct("<HHhHhh")
SUBSECTOR = struct.Struct("<HH")
NODE = struct.Struct("<hhhh4h4hHH")
SECTOR = struct.Struct("<hh8s8shhh")


class LevelError(WadError):
    pass


class MapNotFound(LevelError):
    pass


class DanglingReference(LevelError):
    pass


class InvalidTree(LevelError):
    pass


class Vertex(NamedTuple):
    x: int
    y: int


class Linedef(NamedTuple):
    v1: int
    v2: int
    flags: int
    special: int
    tag: int
    front: int
    back: int  # NO_SIDE for one-sided lines

    @property
    def two_sided(self) -> bool:
        return self.back != NO_SIDE


class Sidedef(NamedTuple):
    x_offset: int
    y_offset: int
    upper: str
    lower: str
    middle: str
    sector: int


class Sector(NamedTuple):
    floor: int
    ceiling: int
    floor_flat: str
    ceiling_flat: str
    light: int
    special: int = 0
    tag: int = 0


class Seg(NamedTuple):
    v1: int
    v2: int
    angle: int  # binary angle, 0x10000 = full turn
    linedef: int
    side: int  # 0: runs along the linedef's front side
    offset: int


class Subsector(NamedTuple):
    count: int
    first: int


class Node(NamedTuple):
    """BSP split. ``front``/``back`` are child refs; bit 0x8000 marks a subsector.

    ``front`` is the child on the left of the partition direction (where the
    cross product of the direction with the point offset is >= 0). In lump
    order that is the *second* child.
    """
    x: int
    y: int
    dx: int
    dy: int
    front_bbox: tuple[int, int, int, int]  # top, bottom, left, right
    back_bbox: tuple[int, int, int, int]
    front: int
    back: int


class Thing(NamedTuple):
    x: int
    y: int
    angle: int
    doomed_type: int
    flags: int
    instance_id: int


def is_leaf(ref: int) -> bool:
    return bool(ref & LEAF)


@dataclass(frozen=True)
class LevelMap:
    name: str
    vertices: tuple[Vertex, ...]
    linedefs: tuple[Linedef, ...]
    sidedefs: tuple[Sidedef, ...]
    sectors: tuple[Sector, ...]
    segs: tuple[Seg, ...]
    subsectors: tuple[Subsector, ...]
    nodes: tuple[Node, ...]
    things: tuple[Thing, ...]

    @property
    def root(self) -> int:
        """Root child ref; with no nodes the single subsector 0."""
        return len(self.nodes) - 1 if self.nodes else LEAF | 0

    def seg_sector(self, seg_index: int) -> int:
        """Sector on the facing side of a seg."""
        seg = self.segs[seg_index]
        line = self.linedefs[seg.linedef]
        side = line.front if seg.side == 0 else line.back
        return self.sidedefs[side].sector

    def seg_back_sector(self, seg_index: int) -> Optional[int]:
        seg = self.segs[seg_index]
        line = self.linedefs[seg.linedef]
        if not line.two_sided:
            return None
        side = line.back if seg.side == 0 else line.front
        return self.sidedefs[side].sector

    def subsector_sector(self, ss: int) -> int:
        sub = self.subsectors[ss]
        return self.seg_sector(sub.first)

    def bounds(self) -> tuple[int, int, int, int]:
        """(min_x, min_y, max_x, max_y) over all vertices."""
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)


def _records(data, fmt: struct.Struct, name: str):
    if len(data) % fmt.size:
        raise LevelError(f"{name}: size {len(data)} is not a multiple of {fmt.size}")
    return list(fmt.iter_unpack(bytes(data)))


def _map_block(archive: WadArchive, map_name: str) -> dict[str, int]:
    map_name = map_name.upper()
    try:
        marker = archive.index_of(map_name)
    except KeyError:
        raise MapNotFound(f"map not found: {map_name}") from None
    found: dict[str, int] = {}
    for i in range(marker + 1, len(archive.lumps)):
        name = archive.lumps[i].name
        if name in MAP_LUMPS and name not in found:
            found[name] = i
        elif name not in _OPTIONAL_LUMPS:
            break
    return found


def load_level(archive: WadArchive, map_name: str) -> LevelMap:
    block = _map_block(archive, map_name)
    for name in MAP_LUMPS:
        if name not in block:
            raise MissingLump(name)

    def raw(name):
        return lump_bytes(archive, block[name])

    things = tuple(Thing(x, y, a, t, f, i)
                   for i, (x, y, a, t, f) in enumerate(_records(raw("THINGS"), THING, "THINGS")))
    vertices = tuple(Vertex(*r) for r in _records(raw("VERTEXES"), VERTEX, "VERTEXES"))
    linedefs = tuple(
        Linedef(v1, v2, flags, special, tag, front, NO_SIDE if back == 0xFFFF else back)
        for v1, v2, flags, special, tag, front, back in _records(raw("LINEDEFS"), LINEDEF, "LINEDEFS"))
    sidedefs = tuple(
        Sidedef(xo, yo, decode_name(up), decode_name(lo), decode_name(mid), sec)
        for xo, yo, up, lo, mid, sec in _records(raw("SIDEDEFS"), SIDEDEF, "SIDEDEFS"))
    sectors = tuple(
        Sector(fh, ch, decode_name(ff), decode_name(cf), light, special, tag)
        for fh, ch, ff, cf, light, special, tag in _records(raw("SECTORS"), SECTOR, "SECTORS"))
    segs = tuple(Seg(*r) for r in _records(raw("SEGS"), SEG, "SEGS"))
    subsectors = tuple(Subsector(*r) for r in _records(raw("SSECTORS"), SUBSECTOR, "SSECTORS"))
    nodes = []
    for r in _records(raw("NODES"), NODE, "NODES"):
        x, y, dx, dy = r[0:4]
        right_bbox, left_bbox = tuple(r[4:8]), tuple(r[8:12])
        right, left = r[12], r[13]
        # lump stores the right-hand child first
        nodes.append(Node(x, y, dx, dy, left_bbox, right_bbox, left, right))

    level = LevelMap(map_name.upper(), vertices, linedefs, sidedefs, sectors, segs,
                     subsectors, tuple(nodes), things)
    validate_level(level)
    return level


def _check(cond: bool, what: str) -> None:
    if not cond:
        raise DanglingReference(what)


def validate_level(level: LevelMap) -> None:
    nv, nl, ns, nsec = len(level.vertices), len(level.linedefs), len(level.sidedefs), len(level.sectors)
    for i, line in enumerate(level.linedefs):
        _check(line.v1 < nv and line.v2 < nv, f"linedef {i}: vertex {max(line.v1, line.v2)} of {nv}")
        _check(0 <= line.front < ns, f"linedef {i}: front sidedef {line.front} of {ns}")
        _check(line.back == NO_SIDE or 0 <= line.back < ns, f"linedef {i}: back sidedef {line.back} of {ns}")
    for i, side in enumerate(level.sidedefs):
        _check(side.sector < nsec, f"sidedef {i}: sector {side.sector} of {nsec}")
    for i, seg in enumerate(level.segs):
        _check(seg.v1 < nv and seg.v2 < nv, f"seg {i}: vertex {max(seg.v1, seg.v2)} of {nv}")
        _check(seg.linedef < nl, f"seg {i}: linedef {seg.linedef} of {nl}")
        _check(seg.side in (0, 1), f"seg {i}: side {seg.side}")
        if seg.side == 1:
            _check(level.linedefs[seg.linedef].two_sided, f"seg {i}: back side of one-sided linedef {seg.linedef}")
    nseg = len(level.segs)
    for i, sub in enumerate(level.subsectors):
        _check(sub.count > 0 and sub.first + sub.count <= nseg,
               f"subsector {i}: segs {sub.first}+{sub.count} of {nseg}")
    nss, nn = len(level.subsectors), len(level.nodes)
    for i, node in enumerate(level.nodes):
        for ref in (node.front, node.back):
            if is_leaf(ref):
                _check((ref & ~LEAF) < nss, f"node {i}: subsector {ref & ~LEAF} of {nss}")
            else:
                _check(ref < nn, f"node {i}: child node {ref} of {nn}")
    if not nss:
        raise InvalidTree("map has no subsectors")
    if not level.nodes and nss != 1:
        raise InvalidTree(f"{nss} subsectors but no nodes")
    seen = leaves_in_order(level)
    if sorted(seen) != list(range(nss)):
        raise InvalidTree("BSP leaves do not cover every subsector exactly once")


def leaves_in_order(level: LevelMap) -> list[int]:
    """Subsectors in depth-first order from the root (front child first)."""
    out = []
    stack = [level.root]
    visited_nodes = 0
    while stack:
        ref = stack.pop()
        if is_leaf(ref):
            out.append(ref & ~LEAF)
            continue
        visited_nodes += 1
        if visited_nodes > len(level.nodes):
            raise InvalidTree("BSP node graph is not a tree")
        node = level.nodes[ref]
        stack.append(node.back)
        stack.append(node.front)
    return out


def level_lumps(level: LevelMap) -> list[tuple[str, bytes]]:
    """Marker plus the eight geometry lumps, in canonical order."""
    def pack(fmt, rows):
        return b"".join(fmt.pack(*r) for r in rows)

    return [
        (level.name, b""),
        ("THINGS", pack(THING, (t[:5] for t in level.things))),
        ("LINEDEFS", pack(LINEDEF, (
            (l.v1, l.v2, l.flags, l.special, l.tag, l.front, 0xFFFF if l.back == NO_SIDE else l.back)
            for l in level.linedefs))),
        ("SIDEDEFS", pack(SIDEDEF, (
            (s.x_offset, s.y_offset, encode_name(s.upper), encode_name(s.lower),
             encode_name(s.middle), s.sector) for s in level.sidedefs))),
        ("VERTEXES", pack(VERTEX, level.vertices)),
        ("SEGS", pack(SEG, level.segs)),
        ("SSECTORS", pack(SUBSECTOR, level.subsectors)),
        ("NODES", pack(NODE, (
            (n.x, n.y, n.dx, n.dy, *n.back_bbox, *n.front_bbox, n.back, n.front)
            for n in level.nodes))),
        ("SECTORS", pack(SECTOR, (
            (s.floor, s.ceiling, encode_name(s.floor_flat), encode_name(s.ceiling_flat),
             s.light, s.special, s.tag) for s in level.sectors))),
    ]
