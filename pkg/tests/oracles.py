"""Independent reference implementations used only by the tests.

Nothing here calls the renderer's traversal or projection code; geometry is
intersected directly in world space.
"""
from __future__ import annotations

import math

import numpy as np

SKY, VERTICAL, HORIZONTAL = 0, 1, 2


def point_in_convex(poly, p) -> bool:
    """Closed containment in a convex polygon given in either winding."""
    sign = 0
    n = len(poly)
    for k in range(n):
        ax, ay = poly[k]
        bx, by = poly[(k + 1) % n]
        cross = (bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax)
        if cross != 0:
            s = 1 if cross > 0 else -1
            if sign and s != sign:
                return False
            sign = s
    return True


def in_subsector(level, ss, p) -> bool:
    """Closed containment: p is right of (or on) every seg of the convex subsector."""
    sub = level.subsectors[ss]
    for i in range(sub.first, sub.first + sub.count):
        a = level.vertices[level.segs[i].v1]
        b = level.vertices[level.segs[i].v2]
        if (b.x - a.x) * (p[1] - a.y) - (b.y - a.y) * (p[0] - a.x) > 0:
            return False
    return True


def subsectors_containing(level, p):
    return [ss for ss in range(len(level.subsectors)) if in_subsector(level, ss, p)]


def sector_by_polygons(level, p):
    found = subsectors_containing(level, p)
    if not found:
        raise ValueError(f"{p} is in no subsector")
    return level.subsector_sector(found[0])


def matrix_project(cam, width, height, hfov, p):
    """4x4 homogeneous view + projection; returns (column, row, depth)."""
    yaw = math.radians(cam.yaw)
    fwd = np.array([math.cos(yaw), math.sin(yaw), 0.0])
    right = np.array([math.sin(yaw), -math.cos(yaw), 0.0])
    up = np.array([0.0, 0.0, 1.0])
    eye = np.array([cam.x, cam.y, cam.eye_z])
    view = np.eye(4)
    view[0, :3], view[1, :3], view[2, :3] = right, -up, fwd
    view[:3, 3] = -view[:3, :3] @ eye
    focal = (width / 2) / math.tan(math.radians(hfov) / 2)
    proj = np.array([[focal, 0, width / 2, 0],
                     [0, focal, height / 2, 0],
                     [0, 0, 0, 1],
                     [0, 0, 1, 0]], float)
    clip = proj @ view @ np.append(np.asarray(p, float), 1.0)
    w = clip[3]
    return clip[0] / w, clip[1] / w, w


def ray_oracle(level, things, cam, width, height, hfov, sprite_lookup, sprite_of,
               sky_flat="F_SKY1", min_sprite_depth=4.0):
    """Nearest-surface labels and depths by marching every pixel ray through sectors.

    Ray parameter ``t`` is view depth: the horizontal direction has unit
    forward component.
    """
    yaw = math.radians(cam.yaw)
    fwd = np.array([math.cos(yaw), math.sin(yaw)])
    right = np.array([math.sin(yaw), -math.cos(yaw)])
    focal = (width / 2) / math.tan(math.radians(hfov) / 2)
    origin = np.array([cam.x, cam.y], float)
    lines = []
    for line in level.linedefs:
        p = np.array(level.vertices[line.v1], float)
        q = np.array(level.vertices[line.v2], float)
        front = level.sectors[level.sidedefs[line.front].sector]
        back = None if line.back < 0 else level.sectors[level.sidedefs[line.back].sector]
        lines.append((p, q, front, back))

    labels = np.zeros((height, width), np.int64)
    depths = np.full((height, width), np.inf)
    for c in range(width):
        a = (c + 0.5 - width / 2) / focal
        direction = fwd + a * right
        hits = []
        for p, q, front, back in lines:
            e = q - p
            m = np.array([[direction[0], -e[0]], [direction[1], -e[1]]])
            det = np.linalg.det(m)
            if abs(det) < 1e-12:
                continue
            t, u = np.linalg.solve(m, p - origin)
            if t > 0 and 0 <= u <= 1:
                cam_right = e[0] * (origin[1] - p[1]) - e[1] * (origin[0] - p[0]) < 0
                near, far = (front, back) if cam_right else (back, front)
                hits.append((t, near, far))
        hits.sort(key=lambda h: h[0])
        start = hits[0][1]
        for r in range(height):
            b = (height / 2 - (r + 0.5)) / focal
            labels[r, c], depths[r, c] = _march(hits, start, cam.eye_z, b, sky_flat)

    # sprites: billboards at constant view depth
    geo = depths.copy()
    cands = []
    for thing in things:
        prefix = sprite_of(thing.doomed_type)
        if prefix is None:
            continue
        rel = np.array([thing.x, thing.y], float) - origin
        f, lat = float(rel @ fwd), float(rel @ right)
        if f < min_sprite_depth:
            continue
        bearing = math.degrees(math.atan2(rel[1], rel[0]))
        rot = int(((bearing - thing.angle + 202.5) % 360) // 45) % 8 + 1
        pic, flipped = sprite_lookup(prefix, rot)
        floor = level.sectors[sector_by_polygons(level, (thing.x, thing.y))].floor
        cands.append((f, thing.instance_id, lat, pic, flipped, floor + pic.top))
    for r in range(height):
        b = (height / 2 - (r + 0.5)) / focal
        for c in range(width):
            a = (c + 0.5 - width / 2) / focal
            best = None
            for f, iid, lat, pic, flipped, top in cands:
                u = math.floor(a * f - (lat - pic.left))
                v = math.floor(top - (cam.eye_z + f * b))
                if not (0 <= u < pic.width and 0 <= v < pic.height):
                    continue
                if flipped:
                    u = pic.width - 1 - u
                if not pic.opaque[v, u] or f > geo[r, c]:
                    continue
                if best is None or (f, iid) < best:
                    best = (f, iid)
            if best is not None:
                labels[r, c] = 3 + best[1]
                depths[r, c] = best[0]
    return labels, depths


def _march(hits, sector, eye, b, sky_flat):
    for t, near, far in hits:
        z = eye + t * b
        if b < 0 and z < sector.floor:
            return HORIZONTAL, (eye - sector.floor) / -b
        if b > 0 and z > sector.ceiling:
            if sector.ceiling_flat == sky_flat:
                return SKY, np.inf
            return HORIZONTAL, (sector.ceiling - eye) / b
        if far is None:
            return VERTICAL, t
        lo, hi = max(sector.floor, far.floor), min(sector.ceiling, far.ceiling)
        if z > far.ceiling and far.ceiling < sector.ceiling \
                and sector.ceiling_flat == sky_flat and far.ceiling_flat == sky_flat:
            return SKY, np.inf
        if not lo <= z <= hi:
            return VERTICAL, t
        sector = far
    raise AssertionError("ray left the map")


def painter_labels(sprites, width, height, background_depth=np.inf):
    """Brute-force painter's algorithm for axis-aligned opaque rectangles.

    ``sprites`` are ``(depth, label, c0, r0, c1, r1)``; nearer paints last.
    """
    labels = np.zeros((height, width), np.int64)
    depth = np.full((height, width), background_depth)
    for d, lab, c0, r0, c1, r1 in sorted(sprites, key=lambda s: (-s[0], -s[1])):
        for r in range(max(r0, 0), min(r1, height)):
            for c in range(max(c0, 0), min(c1, width)):
                if d <= background_depth:
                    labels[r, c] = lab
                    depth[r, c] = d
    return labels, depth


def rasterize_rings(rings, width, height):
    """Pixel-center rasterization of Coco polygon rings (even-odd per ring, OR across rings)."""
    from matplotlib.path import Path

    yy, xx = np.mgrid[0:height, 0:width]
    centers = np.column_stack([xx.ravel() + 0.5, yy.ravel() + 0.5])
    out = np.zeros(height * width, bool)
    for ring in rings:
        pts = np.asarray(ring, float).reshape(-1, 2)
        out |= Path(pts).contains_points(centers)
    return out.reshape(height, width)
