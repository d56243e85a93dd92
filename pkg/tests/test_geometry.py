import math
import random

import numpy as np
import pytest

from doomsight.level import Node
from doomsight.mapgen import Cell, grid_level, room_level
from doomsight.render import (AtHorizon, Behind, Camera, RenderConfig, Side, classify_point, light_row,
                              light_rows, plane_depth_at_row, shade, subsector_at, world_to_screen)
from doomsight.graphics import default_palette
from oracles import matrix_project, subsectors_containing

X_AXIS = Node(0, 0, 16, 0, (0, 0, 0, 0), (0, 0, 0, 0), 0, 0)


def test_classify_examples():
    assert classify_point(X_AXIS, (0, 5)) is Side.FRONT
    assert classify_point(X_AXIS, (0, -5)) is Side.BACK
    assert classify_point(X_AXIS, (7, 0)) is Side.FRONT
    assert classify_point(X_AXIS, (-30, 0)) is Side.FRONT


def test_classify_matches_cross_product():
    rng = random.Random(5)
    for _ in range(500):
        node = Node(rng.randint(-500, 500), rng.randint(-500, 500), rng.randint(-64, 64) or 1,
                    rng.randint(-64, 64), (0,) * 4, (0,) * 4, 0, 0)
        p = (rng.uniform(-800, 800), rng.uniform(-800, 800))
        cross = node.dx * (p[1] - node.y) - node.dy * (p[0] - node.x)
        if abs(cross) < 1e-3:
            continue
        assert classify_point(node, p) is (Side.FRONT if cross > 0 else Side.BACK)


def test_single_subsector_map():
    level = room_level()
    assert all(subsector_at(level, p) == 0 for p in [(1, 1), (128, 128), (255, 3)])


def test_two_subsector_map_against_polygons():
    level = grid_level("MAP01", [[Cell(), Cell(8, 120)]], 128)
    rng = random.Random(11)
    for _ in range(100):
        p = (rng.uniform(0.5, 255.5), rng.uniform(0.5, 127.5))
        if abs(p[0] - 128) < 1e-6:
            continue
        assert subsectors_containing(level, p) == [subsector_at(level, p)]


def test_point_on_partition_goes_front():
    level = grid_level("MAP01", [[Cell(), Cell(8, 120)]], 128)
    node = level.nodes[level.root]
    assert subsector_at(level, (128, 40)) == node.front & 0x7FFF


def test_grid_maps_against_polygons():
    rng = random.Random(2)
    cells = [[Cell() if rng.random() > 0.2 else None for _ in range(5)] for _ in range(4)]
    cells[0][0] = Cell()
    level = grid_level("MAP01", cells, 64)
    for _ in range(300):
        p = (rng.uniform(0, 320), rng.uniform(0, 256))
        found = subsectors_containing(level, p)
        if len(found) == 1:  # strictly inside an open cell
            assert subsector_at(level, p) == found[0]


# projection ------------------------------------------------------------------------

def test_on_axis():
    cam = Camera(10, 20, 41, 30)
    cfg = RenderConfig()
    d = 100.0
    p = (10 + d * math.cos(math.radians(30)), 20 + d * math.sin(math.radians(30)), 41)
    c, r, depth = world_to_screen(cam, cfg, p)
    assert c == pytest.approx(160) and r == pytest.approx(100) and depth == pytest.approx(d)


def test_45_degrees_hits_the_edges():
    cfg = RenderConfig(320, 200, 90)
    assert cfg.focal == pytest.approx(160)
    cam = Camera(0, 0, 41, 0)
    assert world_to_screen(cam, cfg, (100, -100, 41))[0] == pytest.approx(320)
    assert world_to_screen(cam, cfg, (100, 100, 41))[0] == pytest.approx(0)


def test_behind():
    with pytest.raises(Behind):
        world_to_screen(Camera(0, 0, 41, 0), RenderConfig(), (-5, 0, 0))
    with pytest.raises(Behind):
        world_to_screen(Camera(0, 0, 41, 0), RenderConfig(), (0, 50, 0))


def test_matches_matrix_oracle():
    rng = random.Random(7)
    checked = 0
    while checked < 500:
        cam = Camera(rng.uniform(-1000, 1000), rng.uniform(-1000, 1000), rng.uniform(-50, 200), rng.uniform(0, 360))
        cfg = RenderConfig(rng.randint(16, 640), rng.randint(16, 480), rng.uniform(30, 150))
        p = (cam.x + rng.uniform(-500, 500), cam.y + rng.uniform(-500, 500), rng.uniform(-100, 300))
        try:
            got = world_to_screen(cam, cfg, p)
        except Behind:
            continue
        want = matrix_project(cam, cfg.width, cfg.height, cfg.hfov, p)
        assert np.allclose(got, want, rtol=0, atol=1e-6 * max(1.0, max(map(abs, want))))
        checked += 1


def test_yaw_is_normalized():
    assert Camera(0, 0, 0, 450).yaw == pytest.approx(90)
    assert Camera(0, 0, 0, -90).yaw == pytest.approx(270)


def test_plane_depth_example():
    cfg = RenderConfig(320, 200, 90)
    cam = Camera(0, 0, 41, 0)
    assert plane_depth_at_row(cam, cfg, 0, 140) == pytest.approx(164)
    # inverse check: the floor point at depth 164 straight ahead projects to row 140
    assert world_to_screen(cam, cfg, (164, 0, 0))[1] == pytest.approx(140)


def test_plane_depth_horizon_and_scaling():
    cfg = RenderConfig()
    cam = Camera(0, 0, 41, 0)
    with pytest.raises(AtHorizon):
        plane_depth_at_row(cam, cfg, 0, cfg.horizon)
    with pytest.raises(AtHorizon):
        plane_depth_at_row(cam, cfg, 0, 50)  # floor is never above the horizon
    near = plane_depth_at_row(cam, cfg, 0, cfg.horizon + 40)
    assert plane_depth_at_row(cam, cfg, 0, cfg.horizon + 20) == pytest.approx(2 * near)
    assert plane_depth_at_row(cam, cfg, 128, cfg.horizon - 20) == pytest.approx(160 * 87 / 20)


def test_render_config_validation():
    with pytest.raises(ValueError):
        RenderConfig(width=0)
    with pytest.raises(ValueError):
        RenderConfig(hfov=170)
    with pytest.raises(ValueError):
        RenderConfig(hfov=10)


# lighting --------------------------------------------------------------------------

def test_light_off_is_identity():
    pal = default_palette()
    cfg = RenderConfig(apply_light=False)
    for texel in (0, 17, 200):
        for light, depth in ((0, 5000.0), (255, 0.0), (100, 300.0)):
            assert shade(texel, light, depth, cfg, pal) == tuple(int(v) for v in pal.render_palette[texel])


def test_brightest_case():
    assert light_row(255, 0.0) == 0
    assert light_row(255, 1.0) == 0


def test_monotone_in_depth_and_light():
    depths = np.linspace(0, 3000, 400)
    for light in range(0, 256, 8):
        rows = light_rows(light, depths)
        assert (np.diff(rows) >= 0).all()
    lights = np.arange(256)
    for depth in (0.0, 50.0, 400.0, 2500.0):
        assert (np.diff(light_rows(lights, depth)) <= 0).all()
    assert light_rows(0, 0.0) <= 31 and light_rows(0, 1e9) == 31


def test_shade_brightness_non_increasing():
    pal = default_palette()
    cfg = RenderConfig()
    values = [sum(shade(200, 160, d, cfg, pal)) for d in np.linspace(0, 2000, 100)]
    assert all(a >= b for a, b in zip(values, values[1:]))
