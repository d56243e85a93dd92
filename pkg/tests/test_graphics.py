import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doomsight.graphics import (Malformed, Resources, TextureDef, UnknownPatch, UnknownTexture, WrongSize,
                                compose_texture, decode_picture, encode_picture, encode_pnames,
                                encode_texture_lump, load_palette)
from doomsight.mapgen import resource_lumps
from doomsight.wad import MissingLump, build_wad, parse_archive


def test_palette_shapes():
    pal = load_palette(parse_archive(build_wad(resource_lumps())))
    assert pal.palettes.shape == (14, 256, 3)
    assert pal.colormaps.shape == (34, 256)
    # colormap 0 is full bright: the identity remap
    assert (pal.colormaps[0] == np.arange(256)).all()


def test_palette_wrong_size():
    lumps = [("PLAYPAL", b"\0" * 100), ("COLORMAP", b"\0" * 8704)]
    with pytest.raises(WrongSize):
        load_palette(parse_archive(build_wad(lumps)))
    lumps = [("PLAYPAL", b"\0" * 10752), ("COLORMAP", b"\0" * 8000)]
    with pytest.raises(WrongSize):
        load_palette(parse_archive(build_wad(lumps)))


def test_palette_missing():
    with pytest.raises(MissingLump):
        load_palette(parse_archive(build_wad([("PLAYPAL", b"\0" * 10752)])))


def one_by_one(texel=5) -> bytes:
    # header w=1 h=1 left=0 top=0, one column offset (12), post: top 0, len 1, pad, texel, pad, end
    return struct.pack("<HHhhI", 1, 1, 0, 0, 12) + bytes((0, 1, 0, texel, 0, 0xFF))


def test_decode_one_texel():
    pic = decode_picture(one_by_one(5))
    assert (pic.width, pic.height) == (1, 1)
    assert pic.texel(0, 0) == 5


def test_transparent_distinct_from_index_zero():
    pic = decode_picture(one_by_one(0))
    assert pic.texel(0, 0) == 0
    empty = decode_picture(struct.pack("<HHhhI", 1, 1, 0, 0, 12) + b"\xff")
    assert empty.texel(0, 0) is None
    assert not empty.opaque.any()


def test_post_beyond_height():
    data = struct.pack("<HHhhI", 1, 2, 0, 0, 12) + bytes((3, 1, 0, 9, 0, 0xFF))
    with pytest.raises(Malformed):
        decode_picture(data)


def test_truncated_post():
    with pytest.raises(Malformed):
        decode_picture(one_by_one()[:-3])


@given(st.binary(max_size=200))
@settings(max_examples=300, deadline=None)
def test_decode_arbitrary_bytes(data):
    try:
        pic = decode_picture(data)
    except Malformed:
        return
    assert pic.index.shape == pic.opaque.shape == (pic.height, pic.width)
    assert pic.opaque.sum() <= pic.width * pic.height


@given(st.binary(max_size=64), st.integers(0, 200), st.integers(0, 255))
@settings(max_examples=300, deadline=None)
def test_decode_corrupted_picture(tail, cut, flip):
    good = bytearray(encode_picture(np.arange(30, dtype=np.uint8).reshape(5, 6),
                                    np.arange(30).reshape(5, 6) % 3 != 0))
    if good:
        good[cut % len(good)] = flip
    data = bytes(good[:max(cut, 8)]) + tail
    try:
        decode_picture(data)
    except Malformed:
        pass


@given(st.integers(1, 20), st.integers(1, 40), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=100, deadline=None)
def test_encode_decode_round_trip(w, h, seed):
    rng = np.random.default_rng(seed)
    index = rng.integers(0, 256, (h, w), dtype=np.uint8)
    opaque = rng.random((h, w)) < 0.7
    pic = decode_picture(encode_picture(index, opaque, left=3, top=-2))
    assert (pic.left, pic.top) == (3, -2)
    assert (pic.opaque == opaque).all()
    assert (pic.index[opaque] == index[opaque]).all()


def texture_archive(defs, patches):
    names = [n for n, _ in patches]
    lumps = [("PNAMES", encode_pnames(names)), ("TEXTURE1", encode_texture_lump(defs))]
    lumps += [(n, encode_picture(*p)) for n, p in patches]
    return parse_archive(build_wad(lumps))


def test_single_patch_texture():
    idx = np.arange(64, dtype=np.uint8).reshape(8, 8)
    arc = texture_archive([TextureDef("T1", 8, 8, ((0, 0, 0),))], [("P1", (idx,))])
    tex = compose_texture(arc, "T1")
    assert (tex.index == idx).all()
    assert tex.opaque.all()


def test_later_patch_wins():
    a = np.full((4, 4), 10, np.uint8)
    b = np.full((4, 4), 20, np.uint8)
    arc = texture_archive([TextureDef("T", 6, 4, ((0, 0, 0), (2, 0, 1)))], [("PA", (a,)), ("PB", (b,))])
    tex = compose_texture(arc, "T")
    assert (tex.index[:, :2] == 10).all()
    assert (tex.index[:, 2:] == 20).all()


def test_transparent_patch_texels_keep_earlier_patch():
    a = np.full((4, 4), 10, np.uint8)
    b = np.full((4, 4), 20, np.uint8)
    holes = np.ones((4, 4), bool)
    holes[1, 1] = False
    arc = texture_archive([TextureDef("T", 4, 4, ((0, 0, 0), (0, 0, 1)))], [("PA", (a,)), ("PB", (b, holes))])
    tex = compose_texture(arc, "T")
    assert tex.index[1, 1] == 10 and tex.index[0, 0] == 20


def test_unknown_texture_and_patch():
    arc = texture_archive([TextureDef("T", 4, 4, ((0, 0, 5),))], [("PA", (np.zeros((4, 4), np.uint8),))])
    with pytest.raises(UnknownTexture):
        compose_texture(arc, "NOPE")
    with pytest.raises(UnknownPatch):
        compose_texture(arc, "T")


def test_resources_lookups():
    res = Resources.from_archive(parse_archive(build_wad(resource_lumps())))
    assert res.texture("WALL4").height == 128
    assert res.texture("MISSING") is None
    assert res.flat("FLOOR0").shape == (64, 64)
    assert res.flat("NOFLAT") is None
    pic, flipped = res.sprite("POSS", 1)
    assert not flipped
    pic2, flipped2 = res.sprite("POSS", 2)
    pic8, flipped8 = res.sprite("POSS", 8)
    assert not flipped2 and flipped8
    assert (pic2.index == pic8.index).all()
    # rotation 0 sprites serve every angle
    assert res.sprite("STIM", 5)[0] is res.sprite("STIM", 1)[0]
    assert res.sprite("NONE", 1) is None
