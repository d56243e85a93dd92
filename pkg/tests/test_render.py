import math

import numpy as np
import pytest

from doomsight.graphics import Resources, encode_picture
from doomsight.level import load_level
from doomsight.mapgen import SKY, Cell, grid_level, resource_lumps, room_level
from doomsight.render import (HORIZONTAL, INSTANCE_BASE, SKY as SKY_LABEL, VERTICAL, Camera, CameraOutOfWorld,
                              RenderConfig, plane_depth_at_row, render_frame, world_to_screen)
from doomsight.things import sprite_prefix
from doomsight.wad import build_wad, parse_archive
from oracles import painter_labels, ray_oracle
from scenes import demo_resources, random_scene


def room_frame(yaw=90.0, y=128.0, **cell):
    level = room_level(**cell)
    cam = Camera(128, y, 41, yaw)
    cfg = RenderConfig()
    return level, cam, cfg, render_frame(level, (), cam, cfg, demo_resources())


def test_wall_depth_at_center():
    _, _, cfg, fb = room_frame()
    assert fb.label[cfg.height // 2, cfg.width // 2] == VERTICAL
    assert abs(fb.depth[cfg.height // 2, cfg.width // 2] - 128) <= 0.5
    # with a 90 degree view from the room centre only the facing wall is visible, and a
    # wall facing the camera squarely has the same perpendicular depth in every column
    walls = fb.label == VERTICAL
    assert np.abs(fb.depth[walls] - 128).max() <= 0.5


def test_floor_and_ceiling_depth_per_row():
    level, cam, cfg, fb = room_frame(y=16.0)
    rows = {0: 0, 128: 0}
    for r in range(cfg.height):
        horiz = fb.label[r] == HORIZONTAL
        if not horiz.any():
            continue
        plane = 0 if r + 0.5 > cfg.horizon else 128
        want = plane_depth_at_row(cam, cfg, plane, r + 0.5)
        assert np.abs(fb.depth[r, horiz] - want).max() <= 0.5
        rows[plane] += 1
    # wall at 240: floor below row 100 + 41*160/240, ceiling above 100 - 87*160/240
    assert rows == {0: 73, 128: 42}


def test_sky_ceiling():
    _, cam, cfg, fb = room_frame(y=16.0, ceiling_flat=SKY)
    sky = fb.label == SKY_LABEL
    assert np.isinf(fb.depth[sky]).all() and np.isfinite(fb.depth[~sky]).all()
    assert (fb.color[sky] == np.array(cfg.sky_color, np.uint8)).all()
    # a sky ceiling never renders as a plane
    assert not (fb.label[:cfg.height // 2] == HORIZONTAL).any()
    # centre columns only see the far wall (depth 240), whose top edge sits at row 42;
    # near the screen edges the side walls are closer and reach above the top row
    mid = slice(120, 200)
    assert (fb.label[:42, mid] == SKY_LABEL).all() and (fb.label[42:58, mid] != SKY_LABEL).all()
    assert not sky[:, 0].any()


def test_camera_out_of_world():
    with pytest.raises(CameraOutOfWorld):
        render_frame(room_level(), (), Camera(-5, 10, 41, 0), RenderConfig(32, 24))


def opaque_sprite_resources(sizes):
    lumps = [l for l in resource_lumps() if l[0] in ("PLAYPAL", "COLORMAP")]
    lumps.append(("S_START", b""))
    for prefix, (w, h) in sizes.items():
        lumps.append((prefix + "A0", encode_picture(np.full((h, w), 40, np.uint8), left=w // 2, top=h)))
    lumps.append(("S_END", b""))
    return Resources.from_archive(parse_archive(build_wad(lumps)))


def sprite_rect(cam, cfg, thing, w, h):
    """Pixel rectangle covered by a bottom-centred w x h billboard, from projected corners."""
    depth, lat = cam.to_view(thing.x, thing.y)
    c, s = math.cos(math.radians(cam.yaw)), math.sin(math.radians(cam.yaw))
    base = (cam.x + depth * c, cam.y + depth * s)

    def at(lateral, z):
        return world_to_screen(cam, cfg, (base[0] + lateral * s, base[1] - lateral * c, z))

    x0, y0, _ = at(lat - w // 2, h)
    x1, y1, _ = at(lat - w // 2 + w, 0)
    for v in (x0, x1, y0, y1):
        assert (v - 0.5) % 1 != 0  # no pixel center sits exactly on an edge
    return depth, math.ceil(x0 - 0.5), math.ceil(y0 - 0.5), math.ceil(x1 - 0.5), math.ceil(y1 - 0.5)


def test_overlapping_sprites_painter_oracle():
    sizes = {"STIM": (16, 20), "MEDI": (24, 30), "BAR1": (10, 44)}
    res = opaque_sprite_resources(sizes)
    things = [(164, 512, 0, 2011), (196, 517, 0, 2012), (210, 505, 0, 2035)]
    level = room_level(width=1024, depth=1024, ceiling=256, things=things)
    cam = Camera(100.3, 512.2, 41, 0)
    cfg = RenderConfig(64, 48, 90)
    fb = render_frame(level, level.things, cam, cfg, res)
    rects = []
    for t in level.things:
        w, h = sizes[sprite_prefix(t.doomed_type)]
        d, c0, r0, c1, r1 = sprite_rect(cam, cfg, t, w, h)
        rects.append((d, INSTANCE_BASE + t.instance_id, c0, r0, c1, r1))
    assert sorted(r[0] for r in rects)[0] == pytest.approx(63.7, abs=0.5)
    want, want_depth = painter_labels(rects, cfg.width, cfg.height)
    sprite = want >= INSTANCE_BASE
    assert sprite.sum() > 100
    assert ((fb.label >= INSTANCE_BASE) == sprite).all()
    assert (fb.label[sprite] == want[sprite]).all()
    assert np.allclose(fb.depth[sprite], want_depth[sprite])
    # the overlap really exists and resolves to the nearest thing
    near = INSTANCE_BASE + 0
    both = np.zeros_like(sprite)
    for _, lab, c0, r0, c1, r1 in rects[1:2]:
        both[r0:r1, c0:c1] = True
    overlap = both & (want == near)
    assert overlap.any() and (fb.label[overlap] == near).all()


@pytest.mark.parametrize("seed", range(24))
def test_random_scene_matches_ray_oracle(seed):
    sc = random_scene(seed)
    res = demo_resources()
    fb = render_frame(sc.level, sc.things, sc.camera, sc.cfg, res)
    labels, depths = ray_oracle(sc.level, sc.things, sc.camera, sc.cfg.width, sc.cfg.height, sc.cfg.hfov,
                                res.sprite, sprite_prefix)
    assert (fb.label == labels).all()
    finite = np.isfinite(depths)
    assert (np.isfinite(fb.depth) == finite).all()
    assert np.allclose(fb.depth[finite], depths[finite], rtol=1e-9, atol=1e-6)


@pytest.mark.parametrize("seed", range(6))
def test_invariants(seed):
    sc = random_scene(100 + seed)
    res = demo_resources()
    fb = render_frame(sc.level, sc.things, sc.camera, sc.cfg, res)
    h, w = sc.cfg.height, sc.cfg.width
    assert fb.color.shape == (h, w, 3) and fb.depth.shape == fb.label.shape == (h, w)
    # label partition
    ids = {INSTANCE_BASE + t.instance_id for t in sc.things}
    assert set(np.unique(fb.label)) <= {SKY_LABEL, VERTICAL, HORIZONTAL} | ids
    assert (fb.label == SKY_LABEL).sum() + (fb.label == VERTICAL).sum() + (fb.label == HORIZONTAL).sum() \
        + (fb.label >= INSTANCE_BASE).sum() == h * w
    # sky <=> infinite depth
    assert ((fb.label == SKY_LABEL) == np.isinf(fb.depth)).all()
    # yaw invariance
    turned = sc.camera.__class__(sc.camera.x, sc.camera.y, sc.camera.eye_z, sc.camera.yaw + 360)
    again = render_frame(sc.level, sc.things, turned, sc.cfg, res)
    assert (again.color == fb.color).all() and (again.label == fb.label).all()
    assert np.array_equal(again.depth, fb.depth)


@pytest.mark.parametrize("seed", range(8))
def test_removing_a_thing_keeps_nearer_pixels(seed):
    sc = random_scene(200 + seed, max_sprites=4)
    res = demo_resources()
    fb = render_frame(sc.level, sc.things, sc.camera, sc.cfg, res)
    for t in sc.things:
        depth, _ = sc.camera.to_view(t.x, t.y)
        rest = [u for u in sc.things if u.instance_id != t.instance_id]
        other = render_frame(sc.level, rest, sc.camera, sc.cfg, res)
        nearer = fb.depth < depth
        assert (other.label[nearer] == fb.label[nearer]).all()
        assert (other.depth[nearer] == fb.depth[nearer]).all()
        assert (other.color[nearer] == fb.color[nearer]).all()


def test_deterministic(demo_archive):
    level = load_level(demo_archive, "MAP01")
    res = Resources.from_archive(demo_archive)
    cam = Camera(80.5, 70.25, 41, 33.3)
    a = render_frame(level, level.things, cam, RenderConfig(), res)
    b = render_frame(level, level.things, cam, RenderConfig(), Resources.from_archive(demo_archive))
    assert a.color.tobytes() == b.color.tobytes()
    assert a.depth.tobytes() == b.depth.tobytes()
    assert a.label.tobytes() == b.label.tobytes()


def test_missing_resources_use_checkerboard():
    cells = [[Cell(wall="NOSUCH"), Cell(16, 100)]]
    level = grid_level("MAP01", cells, 128, [(200, 64, 0, 3004)])
    fb = render_frame(level, level.things, Camera(20, 64, 41, 0), RenderConfig(64, 48), Resources.empty())
    magenta = (fb.color == np.array([255, 0, 255], np.uint8)).all(axis=2)
    assert magenta.any()
    assert fb.warnings
    assert (fb.label == INSTANCE_BASE + 0).any()  # placeholder billboard still labels the thing


def test_light_changes_color_but_not_labels(demo_archive):
    level = load_level(demo_archive, "MAP01")
    res = Resources.from_archive(demo_archive)
    cam = Camera(64, 64, 41, 45)
    lit = render_frame(level, level.things, cam, RenderConfig(apply_light=True), res)
    flat = render_frame(level, level.things, cam, RenderConfig(apply_light=False), res)
    assert (lit.label == flat.label).all()
    assert not (lit.color == flat.color).all()
