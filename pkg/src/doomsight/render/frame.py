"""Front-to-back BSP column renderer producing color, depth and label planes.

Walls are rasterized per screen column, floors and ceilings by per-row plane
distance inside the open window of each column, and sprites are composited
afterwards, back to front, against the geometry depth buffer.

Pixel ``(r, c)`` samples the ray through its center ``(c + 0.5, r + 0.5)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from ..graphics import Picture, Resources
from ..level import LEAF, LevelMap, Thing, is_leaf
from ..things import sprite_prefix
from .bsp import FRACBITS, sector_at, to_fixed
from .camera import Camera, CameraOutOfWorld, RenderConfig
from .lighting import light_rows

SKY = 0
VERTICAL = 1
HORIZONTAL = 2
INSTANCE_BASE = 3

SKY_FLAT = "F_SKY1"
MIN_SPRITE_DEPTH = 4.0
UPPER_UNPEGGED = 8
LOWER_UNPEGGED = 16

MISSING = -1
MAGENTA = np.array([255, 0, 255], np.uint8)


def instance_label(instance_id: int) -> int:
    return INSTANCE_BASE + instance_id


@dataclass(frozen=True)
class FrameBuffers:
    color: np.ndarray  # (H, W, 3) uint8
    depth: np.ndarray  # (H, W) float64; +inf where label is SKY
    label: np.ndarray  # (H, W) int32 label ids
    warnings: tuple[str, ...] = ()


class _Geometry:
    """Flat per-level arrays; built once per LevelMap and cached."""

    def __init__(self, level: LevelMap):
        self.level = level
        sectors = level.sectors
        self.floor = [s.floor for s in sectors]
        self.ceil = [s.ceiling for s in sectors]
        self.light = [s.light for s in sectors]
        self.sky = [s.ceiling_flat == SKY_FLAT for s in sectors]
        self.segs = []
        for i, seg in enumerate(level.segs):
            v1, v2 = level.vertices[seg.v1], level.vertices[seg.v2]
            line = level.linedefs[seg.linedef]
            side_index = line.front if seg.side == 0 else line.back
            back = level.seg_back_sector(i)
            self.segs.append((
                float(v1.x), float(v1.y), float(v2.x), float(v2.y),
                math.hypot(v2.x - v1.x, v2.y - v1.y),
                level.seg_sector(i), -1 if back is None else back,
                level.sidedefs[side_index], line.flags, float(seg.offset)))
        self.subsector_segs = [range(s.first, s.first + s.count) for s in level.subsectors]
        self.subsector_sector = [level.subsector_sector(i) for i in range(len(level.subsectors))]
        self.bounds = level.bounds()


_GEOMETRY_CACHE: dict[int, _Geometry] = {}


def _geometry(level: LevelMap) -> _Geometry:
    geo = _GEOMETRY_CACHE.get(id(level))
    if geo is None or geo.level is not level:
        if len(_GEOMETRY_CACHE) > 16:
            _GEOMETRY_CACHE.clear()
        geo = _GEOMETRY_CACHE[id(level)] = _Geometry(level)
    return geo


def _spans(r0: np.ndarray, r1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pixel rows and column positions for per-column half-open row ranges."""
    lengths = np.maximum(r1 - r0, 0)
    total = int(lengths.sum())
    if total == 0:
        empty = np.empty(0, np.int64)
        return empty, empty
    ci = np.repeat(np.arange(len(r0)), lengths)
    starts = np.cumsum(lengths) - lengths
    rr = r0[ci] + (np.arange(total) - starts[ci])
    return rr, ci


class _Raster:
    def __init__(self, geo: _Geometry, camera: Camera, cfg: RenderConfig, resources: Resources):
        self.geo = geo
        self.cam = camera
        self.cfg = cfg
        self.res = resources
        w, h = cfg.width, cfg.height
        self.w, self.h = w, h
        self.focal = cfg.focal
        self.cx = cfg.center
        self.hz = cfg.horizon
        self.tan = self.cx / self.focal
        self.cos, self.sin = camera.forward
        self.col_slope = (np.arange(w) + 0.5 - self.cx) / self.focal
        self.row_slope = (self.hz - (np.arange(h) + 0.5)) / self.focal

        self.label = np.full((h, w), SKY, np.int32)
        self.depth = np.full((h, w), np.inf)
        self.tex = np.full((h, w), MISSING, np.int32)  # wall texture or flat id
        self.u = np.zeros((h, w))
        self.anchor = np.zeros((h, w))
        self.light = np.zeros((h, w), np.int16)

        self.clip_top = np.zeros(w, np.int64)
        self.clip_bot = np.full(w, h, np.int64)
        self.solid = np.zeros(w, bool)
        self.remaining = w

        self.textures: list[Picture] = []
        self.texture_ids: dict[str, int] = {}
        self.flats: list[np.ndarray] = []
        self.flat_ids: dict[str, int] = {}
        self.warnings: list[str] = []

    # resources ---------------------------------------------------------
    def _warn(self, msg: str) -> None:
        if msg not in self.warnings:
            self.warnings.append(msg)

    def texture_id(self, name: str) -> int:
        tid = self.texture_ids.get(name)
        if tid is None:
            pic = self.res.texture(name)
            if pic is None:
                self._warn(f"missing texture {name or '-'}")
                tid = MISSING
            else:
                tid = len(self.textures)
                self.textures.append(pic)
            self.texture_ids[name] = tid
        return tid

    def flat_id(self, name: str) -> int:
        fid = self.flat_ids.get(name)
        if fid is None:
            flat = self.res.flat(name)
            if flat is None:
                self._warn(f"missing flat {name}")
                fid = MISSING
            else:
                fid = len(self.flats)
                self.flats.append(flat)
            self.flat_ids[name] = fid
        return fid

    # traversal ---------------------------------------------------------
    def walk(self) -> None:
        level = self.geo.level
        px, py = to_fixed(self.cam.x), to_fixed(self.cam.y)
        stack = [level.root]
        while stack and self.remaining > 0:
            ref = stack.pop()
            if is_leaf(ref):
                ss = ref & ~LEAF
                for s in self.geo.subsector_segs[ss]:
                    self.seg(self.geo.segs[s])
                continue
            node = level.nodes[ref]
            cross = node.dx * (py - (node.y << FRACBITS)) - node.dy * (px - (node.x << FRACBITS))
            if cross >= 0:
                stack.append(node.back)
                stack.append(node.front)
            else:
                stack.append(node.front)
                stack.append(node.back)

    def seg(self, seg) -> None:
        x1, y1, x2, y2, length, front, back, side, flags, offset = seg
        cam = self.cam
        if (x2 - x1) * (cam.y - y1) - (y2 - y1) * (cam.x - x1) >= 0:
            return  # camera behind or on the seg line
        c, s = self.cos, self.sin
        f1 = (x1 - cam.x) * c + (y1 - cam.y) * s
        l1 = (x1 - cam.x) * s - (y1 - cam.y) * c
        f2 = (x2 - cam.x) * c + (y2 - cam.y) * s
        l2 = (x2 - cam.x) * s - (y2 - cam.y) * c

        # clip against the view wedge |l| <= f * tan(hfov / 2)
        t0, t1 = 0.0, 1.0
        t = self.tan
        for ga, gb in ((f1 * t - l1, f2 * t - l2), (f1 * t + l1, f2 * t + l2)):
            if ga < 0 and gb < 0:
                return
            if ga < 0:
                t0 = max(t0, ga / (ga - gb))
            elif gb < 0:
                t1 = min(t1, ga / (ga - gb))
        if t0 > t1:
            return
        xs = []
        for tt in (t0, t1):
            fa = f1 + tt * (f2 - f1)
            la = l1 + tt * (l2 - l1)
            xs.append(self.cx + self.focal * la / max(fa, 1e-12))
        c0 = max(0, int(math.floor(min(xs))) - 1)
        c1 = min(self.w, int(math.ceil(max(xs))) + 1)
        if c0 >= c1:
            return
        cols = np.arange(c0, c1)
        cols = cols[~self.solid[c0:c1]]
        if not len(cols):
            return
        a = self.col_slope[cols]
        denom = (l2 - l1) - a * (f2 - f1)
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = (a * f1 - l1) / denom
        d = f1 + frac * (f2 - f1)
        ok = (denom != 0) & (frac >= 0) & (frac <= 1) & (d > 0)
        if not ok.any():
            return
        cols, frac, d = cols[ok], frac[ok], d[ok]
        self.draw_columns(cols, frac, d, length, front, back, side, flags, offset)

    def draw_columns(self, cols, frac, d, length, front, back, side, flags, offset) -> None:
        geo = self.geo
        eye = self.cam.eye_z
        h = self.h
        scale = self.focal / d

        def row_of(z):
            y = self.hz + (eye - z) * scale - 0.5
            return np.clip(np.ceil(np.clip(y, -1.0, h + 1.0)), 0, h).astype(np.int64)

        fc, ff = geo.ceil[front], geo.floor[front]
        light = geo.light[front]
        front_sky = geo.sky[front]
        ct, cb = self.clip_top[cols], self.clip_bot[cols]
        top, bot = row_of(fc), row_of(ff)
        u = offset + frac * length + side.x_offset

        if back < 0:
            ceil_end = top
        else:
            bc, bf = geo.ceil[back], geo.floor[back]
            sky_hack = front_sky and geo.sky[back] and bc < fc
            ceil_end = row_of(bc) if sky_hack else top

        if front_sky:
            self.sky_span(cols, ct, np.minimum(ceil_end, cb))
        elif fc > eye:
            self.plane_span(cols, ct, np.minimum(ceil_end, cb), fc,
                            geo.level.sectors[front].ceiling_flat, light)
        if ff < eye:
            self.plane_span(cols, np.maximum(bot, ct), cb, ff,
                            geo.level.sectors[front].floor_flat, light)

        if back < 0:
            anchor = fc
            tid = self.texture_id(side.middle)
            if flags & LOWER_UNPEGGED and tid != MISSING:
                anchor = ff + self.textures[tid].height
            self.wall_span(cols, np.maximum(top, ct), np.minimum(bot, cb), d, u,
                           anchor + side.y_offset, tid, light)
            self.solid[cols] = True
            self.remaining -= len(cols)
            return

        if bc < fc and not sky_hack:
            bc_row = row_of(max(bc, ff))  # nothing of the wall shows below the front floor
            tid = self.texture_id(side.upper)
            anchor = fc
            if not flags & UPPER_UNPEGGED and tid != MISSING:
                anchor = bc + self.textures[tid].height
            self.wall_span(cols, np.maximum(top, ct), np.minimum(bc_row, cb), d, u,
                           anchor + side.y_offset, tid, light)
        if bf > ff:
            tid = self.texture_id(side.lower)
            anchor = fc if flags & LOWER_UNPEGGED else bf
            # with the sky hack the sky owns everything above the back ceiling
            r0 = np.maximum(row_of(min(bf, fc)), ct)
            if sky_hack:
                r0 = np.maximum(r0, ceil_end)
            self.wall_span(cols, r0, np.minimum(bot, cb), d, u, anchor + side.y_offset, tid, light)

        new_top = np.maximum(ct, row_of(min(fc, bc)))
        new_bot = np.minimum(cb, row_of(max(ff, bf)))
        self.clip_top[cols] = new_top
        self.clip_bot[cols] = new_bot
        closed = new_top >= new_bot
        if closed.any():
            self.solid[cols[closed]] = True
            self.remaining -= int(closed.sum())

    def sky_span(self, cols, r0, r1) -> None:
        rr, ci = _spans(r0, r1)
        if len(rr):
            cc = cols[ci]
            self.label[rr, cc] = SKY
            self.depth[rr, cc] = np.inf

    def plane_span(self, cols, r0, r1, z, flat, light) -> None:
        rr, ci = _spans(r0, r1)
        if not len(rr):
            return
        cc = cols[ci]
        self.label[rr, cc] = HORIZONTAL
        self.depth[rr, cc] = abs(self.cam.eye_z - z) / np.abs(self.row_slope[rr])
        self.tex[rr, cc] = self.flat_id(flat)
        self.light[rr, cc] = light

    def wall_span(self, cols, r0, r1, d, u, anchor, tid, light) -> None:
        rr, ci = _spans(r0, r1)
        if not len(rr):
            return
        cc = cols[ci]
        self.label[rr, cc] = VERTICAL
        self.depth[rr, cc] = d[ci]
        self.tex[rr, cc] = tid
        self.u[rr, cc] = u[ci]
        self.anchor[rr, cc] = anchor
        self.light[rr, cc] = light

    # shading -----------------------------------------------------------
    def shade_geometry(self):
        h, w = self.h, self.w
        index = np.zeros((h, w), np.uint8)
        placeholder = np.zeros((h, w), bool)
        checker = np.zeros((h, w), bool)
        rows_z = self.cam.eye_z + self.depth * self.row_slope[:, None]

        wall = self.label == VERTICAL
        for tid in np.unique(self.tex[wall]):
            sel = wall & (self.tex == tid)
            u = np.floor(self.u[sel]).astype(np.int64)
            v = np.floor(self.anchor[sel] - rows_z[sel]).astype(np.int64)
            if tid == MISSING:
                placeholder[sel] = True
                checker[sel] = ((u >> 3) + (v >> 3)) & 1 == 0
            else:
                pic = self.textures[tid]
                index[sel] = pic.index[v % pic.height, u % pic.width]

        plane = self.label == HORIZONTAL
        if plane.any():
            rr, cc = np.nonzero(plane)
            dist = self.depth[rr, cc]
            a = self.col_slope[cc]
            wx = self.cam.x + dist * (self.cos + a * self.sin)
            wy = self.cam.y + dist * (self.sin - a * self.cos)
            fx = np.floor(wx).astype(np.int64)
            fy = np.floor(-wy).astype(np.int64)
            fids = self.tex[rr, cc]
            for fid in np.unique(fids):
                k = fids == fid
                if fid == MISSING:
                    placeholder[rr[k], cc[k]] = True
                    checker[rr[k], cc[k]] = ((fx[k] >> 3) + (fy[k] >> 3)) & 1 == 0
                else:
                    index[rr[k], cc[k]] = self.flats[fid][fy[k] & 63, fx[k] & 63]
        return index, placeholder, checker

    def draw_sprites(self, things: Iterable[Thing], sprite_of, index, placeholder, checker) -> None:
        geo_depth = self.depth.copy()
        visible = []
        for thing in things:
            prefix = sprite_of(thing.doomed_type)
            if prefix is None:
                continue
            depth, lateral = self.cam.to_view(thing.x, thing.y)
            if depth < MIN_SPRITE_DEPTH:
                continue
            visible.append((depth, lateral, thing, prefix))
        visible.sort(key=lambda v: (-v[0], -v[2].instance_id))
        for depth, lateral, thing, prefix in visible:
            self.draw_sprite(depth, lateral, thing, prefix, geo_depth, index, placeholder, checker)

    def draw_sprite(self, depth, lateral, thing, prefix, geo_depth, index, placeholder, checker):
        bearing = math.degrees(math.atan2(thing.y - self.cam.y, thing.x - self.cam.x))
        rotation = int(((bearing - thing.angle + 202.5) % 360.0) // 45.0) % 8 + 1
        found = self.res.sprite(prefix, rotation)
        if found is None:
            self._warn(f"missing sprite {prefix}")
            pic, flipped, missing = _PLACEHOLDER_SPRITE, False, True
        else:
            (pic, flipped), missing = found, False
        sector = sector_at(self.geo.level, (thing.x, thing.y))
        top_z = self.geo.floor[sector] + pic.top
        left = lateral - pic.left

        scale = self.focal / depth
        x0 = self.cx + left * scale
        c0 = max(0, int(math.floor(x0 - 0.5)))
        c1 = min(self.w, int(math.ceil(x0 + pic.width * scale + 0.5)))
        y0 = self.hz + (self.cam.eye_z - top_z) * scale
        r0 = max(0, int(math.floor(y0 - 0.5)))
        r1 = min(self.h, int(math.ceil(y0 + pic.height * scale + 0.5)))
        if c0 >= c1 or r0 >= r1:
            return
        tu = np.floor(self.col_slope[c0:c1] * depth - left).astype(np.int64)
        tv = np.floor(top_z - (self.cam.eye_z + depth * self.row_slope[r0:r1])).astype(np.int64)
        cu = (tu >= 0) & (tu < pic.width)
        rv = (tv >= 0) & (tv < pic.height)
        if not cu.any() or not rv.any():
            return
        cols = np.arange(c0, c1)[cu]
        rows = np.arange(r0, r1)[rv]
        tu, tv = tu[cu], tv[rv]
        if flipped:
            tu = pic.width - 1 - tu
        opaque = pic.opaque[np.ix_(tv, tu)]
        hit = opaque & (depth <= geo_depth[np.ix_(rows, cols)])
        if not hit.any():
            return
        ri, ci = np.nonzero(hit)
        rr, cc = rows[ri], cols[ci]
        self.label[rr, cc] = instance_label(thing.instance_id)
        self.depth[rr, cc] = depth
        self.light[rr, cc] = self.geo.light[sector]
        index[rr, cc] = pic.index[tv[ri], tu[ci]]
        placeholder[rr, cc] = missing
        if missing:
            checker[rr, cc] = ((tu[ci] >> 2) + (tv[ri] >> 2)) & 1 == 0

    def compose(self, index, placeholder, checker) -> np.ndarray:
        pal = self.res.palette
        if self.cfg.apply_light:
            rows = light_rows(self.light, self.depth)
        else:
            rows = np.zeros(self.light.shape, np.int64)
        color = pal.render_palette[pal.colormaps[rows, index]]
        color[self.label == SKY] = np.array(self.cfg.sky_color, np.uint8)
        color[placeholder] = 0
        color[placeholder & checker] = MAGENTA
        return color


def _placeholder_sprite() -> Picture:
    w, h = 16, 24
    return Picture(w, h, w // 2, h, np.zeros((h, w), np.uint8), np.ones((h, w), bool))


_PLACEHOLDER_SPRITE = _placeholder_sprite()
_EMPTY_RESOURCES: Optional[Resources] = None


def render_frame(level: LevelMap, things: Iterable[Thing], camera: Camera,
                 cfg: RenderConfig = RenderConfig(), resources: Optional[Resources] = None,
                 sprite_of: Callable[[int], Optional[str]] = sprite_prefix) -> FrameBuffers:
    global _EMPTY_RESOURCES
    if resources is None:
        if _EMPTY_RESOURCES is None:
            _EMPTY_RESOURCES = Resources.empty()
        resources = _EMPTY_RESOURCES
    geo = _geometry(level)
    x0, y0, x1, y1 = geo.bounds
    if not (x0 < camera.x < x1 and y0 < camera.y < y1):
        raise CameraOutOfWorld(f"camera at ({camera.x}, {camera.y}) is outside {level.name}")
    r = _Raster(geo, camera, cfg, resources)
    r.walk()
    index, placeholder, checker = r.shade_geometry()
    r.draw_sprites(things, sprite_of, index, placeholder, checker)
    color = r.compose(index, placeholder, checker)
    return FrameBuffers(color, r.depth, r.label, tuple(r.warnings))
