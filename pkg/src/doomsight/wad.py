"""WAD archive container: header, lump directory, and byte access.

Layout (all integers little-endian)::

    header     4s magic ("IWAD"/"PWAD"), int32 lump count, int32 directory offset
    directory  count x (int32 offset, int32 size, 8s name)
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Iterable, Union

HEADER = struct.Struct("<4sii")
ENTRY = struct.Struct("<ii8s")


class WadError(Exception):
    """Base class for all archive and resource errors."""


class BadMagic(WadError):
    pass


class TruncatedDirectory(WadError):
    pass


class BadEntry(WadError):
    pass


class MissingLump(WadError):
    pass


class NotFound(WadError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class WadKind(enum.Enum):
    IWAD = "IWAD"
    PWAD = "PWAD"


@dataclass(frozen=True)
class LumpEntry:
    name: str
    offset: int
    size: int


def decode_name(raw: bytes) -> str:
    """8-byte NUL padded name to an uppercase string.

    Bytes after the first NUL are junk in some PWADs and are dropped.
    """
    return raw.split(b"\0", 1)[0].decode("ascii", errors="replace").upper()


def encode_name(name: str) -> bytes:
    data = name.upper().encode("ascii")
    if len(data) > 8:
        raise ValueError(f"lump name longer than 8 characters: {name!r}")
    return data.ljust(8, b"\0")


@dataclass(frozen=True)
class WadArchive:
    kind: WadKind
    lumps: tuple[LumpEntry, ...]
    raw: bytes

    def __len__(self) -> int:
        return len(self.lumps)

    def names(self) -> list[str]:
        return [lump.name for lump in self.lumps]

    def index_of(self, name: str, start: int = 0) -> int:
        """Index of the LAST lump called ``name`` at or after ``start``."""
        name = name.upper()
        for i in range(len(self.lumps) - 1, start - 1, -1):
            if self.lumps[i].name == name:
                return i
        raise NotFound(name)

    def has(self, name: str) -> bool:
        try:
            self.index_of(name)
        except NotFound:
            return False
        return True

    def lump_bytes(self, selector: Union[str, int]) -> memoryview:
        return lump_bytes(self, selector)

    def between(self, start: str, end: str) -> list[int]:
        """Indices of lumps strictly between every ``start``..``end`` marker pair."""
        out = []
        inside = False
        for i, lump in enumerate(self.lumps):
            if lump.name == start:
                inside = True
            elif lump.name == end:
                inside = False
            elif inside:
                out.append(i)
        return out

    def map_names(self) -> list[str]:
        """Map marker lumps: any lump followed immediately by THINGS."""
        names = []
        for i in range(len(self.lumps) - 1):
            if self.lumps[i + 1].name == "THINGS" and self.lumps[i].name not in names:
                names.append(self.lumps[i].name)
        return names

    def directory_bytes(self) -> bytes:
        return b"".join(ENTRY.pack(l.offset, l.size, encode_name(l.name)) for l in self.lumps)


def parse_archive(data: bytes) -> WadArchive:
    data = bytes(data)
    if len(data) < HEADER.size:
        raise TruncatedDirectory(f"file is {len(data)} bytes, header needs {HEADER.size}")
    magic, count, dir_offset = HEADER.unpack_from(data, 0)
    try:
        kind = WadKind(magic.decode("ascii"))
    except (UnicodeDecodeError, ValueError):
        raise BadMagic(f"unknown magic {magic!r}") from None
    if count < 0 or dir_offset < 0 or dir_offset + count * ENTRY.size > len(data):
        raise TruncatedDirectory(
            f"directory of {count} entries at {dir_offset} exceeds {len(data)} bytes")
    lumps = []
    for i in range(count):
        offset, size, raw_name = ENTRY.unpack_from(data, dir_offset + i * ENTRY.size)
        name = decode_name(raw_name)
        if size < 0 or offset < 0 or offset + size > len(data):
            raise BadEntry(f"lump {i} {name!r}: window {offset}+{size} out of bounds")
        lumps.append(LumpEntry(name, offset, size))
    return WadArchive(kind, tuple(lumps), data)


def read_archive(path) -> WadArchive:
    with open(path, "rb") as f:
        return parse_archive(f.read())


def lump_bytes(archive: WadArchive, selector: Union[str, int]) -> memoryview:
    if isinstance(selector, str):
        lump = archive.lumps[archive.index_of(selector)]
    else:
        if not 0 <= selector < len(archive.lumps):
            raise NotFound(f"lump index {selector} (archive has {len(archive.lumps)})")
        lump = archive.lumps[selector]
    return memoryview(archive.raw)[lump.offset:lump.offset + lump.size]


def build_wad(lumps: Iterable[tuple[str, bytes]], kind: WadKind = WadKind.PWAD) -> bytes:
    """Serialize ``(name, data)`` pairs; data first, directory last."""
    body = bytearray()
    entries = []
    for name, data in lumps:
        offset = HEADER.size + len(body) if data else 0
        entries.append(ENTRY.pack(offset, len(data), encode_name(name)))
        body += data
    header = HEADER.pack(kind.value.encode("ascii"), len(entries), HEADER.size + len(body))
    return header + bytes(body) + b"".join(entries)
