"""Palettes, colormaps, column-post pictures, composite wall textures, flats and sprites."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .wad import MissingLump, WadArchive, WadError, decode_name, encode_name, lump_bytes

PLAYPAL_SIZE = 14 * 256 * 3
COLORMAP_COUNT = 34
COLORMAP_SIZE = COLORMAP_COUNT * 256
FLAT_SIZE = 64
MAX_PICTURE_SIDE = 4096


class WrongSize(WadError):
    pass


class Malformed(WadError):
    pass


class UnknownTexture(WadError):
    pass


class UnknownPatch(WadError):
    pass


@dataclass(frozen=True)
class PaletteSet:
    palettes: np.ndarray  # (14, 256, 3) uint8
    colormaps: np.ndarray  # (34, 256) uint8

    @property
    def render_palette(self) -> np.ndarray:
        return self.palettes[0]


def default_palette() -> PaletteSet:
    """Grey ramp with linear fade colormaps; stands in when an archive has no PLAYPAL."""
    ramp = np.repeat(np.arange(256, dtype=np.uint8)[:, None], 3, axis=1)
    palettes = np.repeat(ramp[None], 14, axis=0)
    levels = np.arange(256)
    maps = [np.floor(levels * (32 - i) / 32).astype(np.uint8) for i in range(32)]
    maps.append(levels.astype(np.uint8)[::-1])
    maps.append(np.zeros(256, np.uint8))
    return PaletteSet(palettes, np.stack(maps))


def load_palette(archive: WadArchive) -> PaletteSet:
    for name in ("PLAYPAL", "COLORMAP"):
        if not archive.has(name):
            raise MissingLump(name)
    playpal = bytes(lump_bytes(archive, "PLAYPAL"))
    if len(playpal) != PLAYPAL_SIZE:
        raise WrongSize(f"PLAYPAL is {len(playpal)} bytes, expected {PLAYPAL_SIZE}")
    colormap = bytes(lump_bytes(archive, "COLORMAP"))
    if len(colormap) < COLORMAP_SIZE:
        raise WrongSize(f"COLORMAP is {len(colormap)} bytes, expected at least {COLORMAP_SIZE}")
    palettes = np.frombuffer(playpal, np.uint8).reshape(14, 256, 3).copy()
    colormaps = np.frombuffer(colormap[:COLORMAP_SIZE], np.uint8).reshape(COLORMAP_COUNT, 256).copy()
    return PaletteSet(palettes, colormaps)


@dataclass(frozen=True)
class Picture:
    width: int
    height: int
    left: int
    top: int
    index: np.ndarray  # (height, width) uint8 palette indices
    opaque: np.ndarray  # (height, width) bool

    def texel(self, x: int, y: int) -> Optional[int]:
        """Palette index at column ``x``, row ``y``; None where transparent."""
        return int(self.index[y, x]) if self.opaque[y, x] else None


_PIC_HEADER = struct.Struct("<HHhh")


def decode_picture(data) -> Picture:
    data = bytes(data)
    if len(data) < _PIC_HEADER.size:
        raise Malformed("picture header truncated")
    width, height, left, top = _PIC_HEADER.unpack_from(data, 0)
    if width > MAX_PICTURE_SIDE or height > MAX_PICTURE_SIDE:
        raise Malformed(f"picture {width}x{height} too large")
    table_end = _PIC_HEADER.size + 4 * width
    if table_end > len(data):
        raise Malformed("column offset table truncated")
    offsets = struct.unpack_from(f"<{width}I", data, _PIC_HEADER.size)
    index = np.zeros((height, width), np.uint8)
    opaque = np.zeros((height, width), bool)
    n = len(data)
    for x, pos in enumerate(offsets):
        while True:
            if pos >= n:
                raise Malformed(f"column {x}: post runs past end of data")
            topdelta = data[pos]
            if topdelta == 0xFF:
                break
            if pos + 3 > n:
                raise Malformed(f"column {x}: post header truncated")
            length = data[pos + 1]
            start = pos + 3
            if start + length + 1 > n:
                raise Malformed(f"column {x}: post data truncated")
            if topdelta + length > height:
                raise Malformed(f"column {x}: post {topdelta}+{length} overruns height {height}")
            index[topdelta:topdelta + length, x] = np.frombuffer(data, np.uint8, length, start)
            opaque[topdelta:topdelta + length, x] = True
            pos = start + length + 1
    return Picture(width, height, left, top, index, opaque)


def encode_picture(index: np.ndarray, opaque: Optional[np.ndarray] = None,
                   left: int = 0, top: int = 0) -> bytes:
    """Inverse of :func:`decode_picture` (posts capped at 128 texels)."""
    index = np.asarray(index, np.uint8)
    height, width = index.shape
    if height > 254:
        raise ValueError("encode_picture supports heights up to 254")
    if opaque is None:
        opaque = np.ones_like(index, bool)
    columns = []
    for x in range(width):
        col = bytearray()
        y = 0
        while y < height:
            if not opaque[y, x]:
                y += 1
                continue
            end = y
            while end < height and opaque[end, x] and end - y < 128:
                end += 1
            col += bytes((y, end - y, 0)) + index[y:end, x].tobytes() + b"\0"
            y = end
        col.append(0xFF)
        columns.append(bytes(col))
    out = bytearray(_PIC_HEADER.pack(width, height, left, top))
    pos = _PIC_HEADER.size + 4 * width
    for col in columns:
        out += struct.pack("<I", pos)
        pos += len(col)
    for col in columns:
        out += col
    return bytes(out)


def read_pnames(archive: WadArchive) -> list[str]:
    data = bytes(lump_bytes(archive, "PNAMES"))
    (count,) = struct.unpack_from("<i", data, 0)
    return [decode_name(data[4 + 8 * i:12 + 8 * i]) for i in range(count)]


@dataclass(frozen=True)
class TextureDef:
    name: str
    width: int
    height: int
    patches: tuple[tuple[int, int, int], ...]  # (origin x, origin y, pnames index)


def read_texture_defs(archive: WadArchive) -> dict[str, TextureDef]:
    defs: dict[str, TextureDef] = {}
    for lump in ("TEXTURE1", "TEXTURE2"):
        if not archive.has(lump):
            continue
        data = bytes(lump_bytes(archive, lump))
        (count,) = struct.unpack_from("<i", data, 0)
        offsets = struct.unpack_from(f"<{count}i", data, 4)
        for off in offsets:
            name = decode_name(data[off:off + 8])
            _masked, width, height, _coldir, npatch = struct.unpack_from("<ihhih", data, off + 8)
            patches = tuple(
                struct.unpack_from("<hhh", data, off + 22 + 10 * i) for i in range(npatch))
            defs.setdefault(name, TextureDef(name, width, height, patches))
    return defs


def encode_texture_lump(defs: list[TextureDef]) -> bytes:
    bodies = []
    for d in defs:
        body = encode_name(d.name) + struct.pack("<ihhih", 0, d.width, d.height, 0, len(d.patches))
        body += b"".join(struct.pack("<hhhhh", x, y, p, 1, 0) for x, y, p in d.patches)
        bodies.append(body)
    out = bytearray(struct.pack("<i", len(defs)))
    pos = 4 + 4 * len(defs)
    for body in bodies:
        out += struct.pack("<i", pos)
        pos += len(body)
    for body in bodies:
        out += body
    return bytes(out)


def encode_pnames(names: list[str]) -> bytes:
    return struct.pack("<i", len(names)) + b"".join(encode_name(n) for n in names)


def compose_texture(archive: WadArchive, texture_name: str,
                    defs: Optional[dict[str, TextureDef]] = None,
                    pnames: Optional[list[str]] = None) -> Picture:
    """Blit a texture's patches in definition order; later patches win on overlap."""
    if defs is None:
        defs = read_texture_defs(archive)
    tdef = defs.get(texture_name.upper())
    if tdef is None:
        raise UnknownTexture(texture_name)
    if pnames is None:
        pnames = read_pnames(archive)
    index = np.zeros((tdef.height, tdef.width), np.uint8)
    for ox, oy, p in tdef.patches:
        if not 0 <= p < len(pnames) or not archive.has(pnames[p]):
            raise UnknownPatch(f"{texture_name}: patch #{p}")
        patch = decode_picture(lump_bytes(archive, pnames[p]))
        x0, y0 = max(ox, 0), max(oy, 0)
        x1, y1 = min(ox + patch.width, tdef.width), min(oy + patch.height, tdef.height)
        if x0 >= x1 or y0 >= y1:
            continue
        src = (slice(y0 - oy, y1 - oy), slice(x0 - ox, x1 - ox))
        dst = index[y0:y1, x0:x1]
        np.copyto(dst, patch.index[src], where=patch.opaque[src])
    return Picture(tdef.width, tdef.height, 0, 0, index, np.ones_like(index, bool))


def decode_flat(data) -> np.ndarray:
    data = bytes(data)
    if len(data) < FLAT_SIZE * FLAT_SIZE:
        raise WrongSize(f"flat is {len(data)} bytes")
    return np.frombuffer(data[:FLAT_SIZE * FLAT_SIZE], np.uint8).reshape(FLAT_SIZE, FLAT_SIZE).copy()


def checkerboard(width: int, height: int, cell: int = 8) -> np.ndarray:
    """Boolean checker pattern; True cells are drawn magenta, False black."""
    yy, xx = np.mgrid[0:height, 0:width]
    return ((xx // cell + yy // cell) % 2) == 0


@dataclass
class SpriteRotation:
    lump: int
    flipped: bool


@dataclass
class Resources:
    """Read-only graphics bundle handed to the renderer.

    Textures and flats are decoded on first use and cached; every lookup of a
    missing name returns None so the renderer can substitute a placeholder.
    """
    archive: Optional[WadArchive]
    palette: PaletteSet
    texture_defs: dict[str, TextureDef] = field(default_factory=dict)
    pnames: list[str] = field(default_factory=list)
    flat_lumps: dict[str, int] = field(default_factory=dict)
    sprite_frames: dict[str, dict[int, SpriteRotation]] = field(default_factory=dict)
    _textures: dict = field(default_factory=dict, repr=False)
    _flats: dict = field(default_factory=dict, repr=False)
    _sprites: dict = field(default_factory=dict, repr=False)

    @classmethod
    def empty(cls) -> "Resources":
        return cls(None, default_palette())

    @classmethod
    def from_archive(cls, archive: WadArchive) -> "Resources":
        try:
            palette = load_palette(archive)
        except MissingLump:
            palette = default_palette()
        defs = read_texture_defs(archive)
        pnames = read_pnames(archive) if archive.has("PNAMES") else []
        flats = {}
        for marker in (("F_START", "F_END"), ("FF_START", "FF_END")):
            for i in archive.between(*marker):
                if archive.lumps[i].size >= FLAT_SIZE * FLAT_SIZE:
                    flats[archive.lumps[i].name] = i
        sprites: dict[str, dict[int, SpriteRotation]] = {}
        for marker in (("S_START", "S_END"), ("SS_START", "SS_END")):
            for i in archive.between(*marker):
                _index_sprite(sprites, archive.lumps[i].name, i)
        return cls(archive, palette, defs, pnames, flats, sprites)

    def texture(self, name: str) -> Optional[Picture]:
        name = name.upper()
        if name in ("", "-"):
            return None
        if name not in self._textures:
            pic = None
            if self.archive is not None and name in self.texture_defs:
                try:
                    pic = compose_texture(self.archive, name, self.texture_defs, self.pnames)
                except WadError:
                    pic = None
            self._textures[name] = pic
        return self._textures[name]

    def flat(self, name: str) -> Optional[np.ndarray]:
        name = name.upper()
        if name not in self._flats:
            lump = self.flat_lumps.get(name)
            self._flats[name] = None if lump is None else decode_flat(lump_bytes(self.archive, lump))
        return self._flats[name]

    def sprite(self, prefix: str, rotation: int) -> Optional[tuple[Picture, bool]]:
        """Frame A picture for ``rotation`` 1..8 of a sprite, and whether to mirror it."""
        frames = self.sprite_frames.get(prefix.upper())
        if not frames:
            return None
        rot = frames.get(0) or frames.get(rotation)
        if rot is None:
            return None
        if rot.lump not in self._sprites:
            try:
                self._sprites[rot.lump] = decode_picture(lump_bytes(self.archive, rot.lump))
            except Malformed:
                self._sprites[rot.lump] = None
        pic = self._sprites[rot.lump]
        return None if pic is None else (pic, rot.flipped)


def _index_sprite(sprites: dict, name: str, lump: int) -> None:
    # only frame A is used; names look like POSSA1 or POSSA2A8
    if len(name) < 6:
        return
    prefix = name[:4]
    for pos, flipped in ((4, False), (6, True)):
        if len(name) >= pos + 2 and name[pos] == "A" and name[pos + 1].isdigit():
            rot = int(name[pos + 1])
            sprites.setdefault(prefix, {})[rot] = SpriteRotation(lump, flipped)
