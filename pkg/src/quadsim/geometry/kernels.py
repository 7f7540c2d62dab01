"""Numba kernels: closest-point and ray queries over the flattened BVH.

Scalar per-query traversal with an explicit stack; the render kernel
parallelizes over rays. Ties between primitives at exactly equal distance
are broken toward the lower object id, matching the brute-force reference
ordering regardless of traversal order.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

INF = np.inf
_STACK = 128


@njit(cache=True, inline="always")
def _closest_on_sphere(cx, cy, cz, r, qx, qy, qz):
    dx, dy, dz = qx - cx, qy - cy, qz - cz
    n = np.sqrt(dx * dx + dy * dy + dz * dz)
    if n < 1e-300:
        # query at the center: pick +x deterministically
        return cx + r, cy, cz
    s = r / n
    return cx + dx * s, cy + dy * s, cz + dz * s


@njit(cache=True, inline="always")
def _closest_on_box(data, qx, qy, qz):
    cx, cy, cz = data[0], data[1], data[2]
    hx, hy, hz = data[3], data[4], data[5]
    r00, r01, r02 = data[6], data[7], data[8]
    r10, r11, r12 = data[9], data[10], data[11]
    r20, r21, r22 = data[12], data[13], data[14]
    dx, dy, dz = qx - cx, qy - cy, qz - cz
    # local = R^T d
    lx = r00 * dx + r10 * dy + r20 * dz
    ly = r01 * dx + r11 * dy + r21 * dz
    lz = r02 * dx + r12 * dy + r22 * dz
    px = min(max(lx, -hx), hx)
    py = min(max(ly, -hy), hy)
    pz = min(max(lz, -hz), hz)
    if px == lx and py == ly and pz == lz:
        # interior: project to the nearest face
        gx = hx - abs(lx)
        gy = hy - abs(ly)
        gz = hz - abs(lz)
        if gx <= gy and gx <= gz:
            px = hx if lx >= 0.0 else -hx
        elif gy <= gz:
            py = hy if ly >= 0.0 else -hy
        else:
            pz = hz if lz >= 0.0 else -hz
    wx = r00 * px + r01 * py + r02 * pz + cx
    wy = r10 * px + r11 * py + r12 * pz + cy
    wz = r20 * px + r21 * py + r22 * pz + cz
    return wx, wy, wz


@njit(cache=True, inline="always")
def _closest_on_triangle(data, px, py, pz):
    # Ericson, Real-Time Collision Detection 5.1.5
    ax, ay, az = data[0], data[1], data[2]
    bx, by, bz = data[3], data[4], data[5]
    cx, cy, cz = data[6], data[7], data[8]
    abx, aby, abz = bx - ax, by - ay, bz - az
    acx, acy, acz = cx - ax, cy - ay, cz - az
    apx, apy, apz = px - ax, py - ay, pz - az
    d1 = abx * apx + aby * apy + abz * apz
    d2 = acx * apx + acy * apy + acz * apz
    if d1 <= 0.0 and d2 <= 0.0:
        return ax, ay, az
    bpx, bpy, bpz = px - bx, py - by, pz - bz
    d3 = abx * bpx + aby * bpy + abz * bpz
    d4 = acx * bpx + acy * bpy + acz * bpz
    if d3 >= 0.0 and d4 <= d3:
        return bx, by, bz
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        return ax + v * abx, ay + v * aby, az + v * abz
    cpx, cpy, cpz = px - cx, py - cy, pz - cz
    d5 = abx * cpx + aby * cpy + abz * cpz
    d6 = acx * cpx + acy * cpy + acz * cpz
    if d6 >= 0.0 and d5 <= d6:
        return cx, cy, cz
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        return ax + w * acx, ay + w * acy, az + w * acz
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return bx + w * (cx - bx), by + w * (cy - by), bz + w * (cz - bz)
    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    return ax + abx * v + acx * w, ay + aby * v + acy * w, az + abz * v + acz * w


@njit(cache=True, inline="always")
def closest_on_primitive(ptype, data, qx, qy, qz):
    if ptype == 0:
        return _closest_on_sphere(data[0], data[1], data[2], data[3], qx, qy, qz)
    elif ptype == 1:
        return _closest_on_box(data, qx, qy, qz)
    else:
        return _closest_on_triangle(data, qx, qy, qz)


@njit(cache=True, inline="always")
def _aabb_dist2(lox, loy, loz, hix, hiy, hiz, qx, qy, qz):
    dx = max(max(lox - qx, 0.0), qx - hix)
    dy = max(max(loy - qy, 0.0), qy - hiy)
    dz = max(max(loz - qz, 0.0), qz - hiz)
    return dx * dx + dy * dy + dz * dz


@njit(cache=True)
def nearest_point_query(
    node_lo, node_hi, node_first, node_count, prim_order, prim_type, prim_data, prim_oid, qx, qy, qz
):
    """Returns (point x, y, z, distance^2, object id)."""
    stack = np.empty(_STACK, dtype=np.int64)
    stack[0] = 0
    top = 1
    best_d2 = INF
    best_id = -1
    bx = by = bz = 0.0
    while top > 0:
        top -= 1
        node = stack[top]
        d2 = _aabb_dist2(
            node_lo[node, 0], node_lo[node, 1], node_lo[node, 2],
            node_hi[node, 0], node_hi[node, 1], node_hi[node, 2],
            qx, qy, qz,
        )
        if d2 > best_d2:
            continue
        cnt = node_count[node]
        if cnt > 0:
            first = node_first[node]
            for k in range(first, first + cnt):
                p = prim_order[k]
                px, py, pz = closest_on_primitive(prim_type[p], prim_data[p], qx, qy, qz)
                ddx, ddy, ddz = qx - px, qy - py, qz - pz
                pd2 = ddx * ddx + ddy * ddy + ddz * ddz
                oid = prim_oid[p]
                if pd2 < best_d2 or (pd2 == best_d2 and oid < best_id):
                    best_d2 = pd2
                    best_id = oid
                    bx, by, bz = px, py, pz
        else:
            left = node_first[node]
            right = left + 1
            dl = _aabb_dist2(
                node_lo[left, 0], node_lo[left, 1], node_lo[left, 2],
                node_hi[left, 0], node_hi[left, 1], node_hi[left, 2],
                qx, qy, qz,
            )
            dr = _aabb_dist2(
                node_lo[right, 0], node_lo[right, 1], node_lo[right, 2],
                node_hi[right, 0], node_hi[right, 1], node_hi[right, 2],
                qx, qy, qz,
            )
            # push the farther child first so the nearer one is visited next
            if dl <= dr:
                if dr <= best_d2:
                    stack[top] = right
                    top += 1
                if dl <= best_d2:
                    stack[top] = left
                    top += 1
            else:
                if dl <= best_d2:
                    stack[top] = left
                    top += 1
                if dr <= best_d2:
                    stack[top] = right
                    top += 1
    return bx, by, bz, best_d2, best_id


@njit(cache=True, inline="always")
def _ray_sphere(cx, cy, cz, r, ox, oy, oz, dx, dy, dz, tmin, tmax):
    mx, my, mz = ox - cx, oy - cy, oz - cz
    b = mx * dx + my * dy + mz * dz
    c = mx * mx + my * my + mz * mz - r * r
    disc = b * b - c
    if disc < 0.0:
        return -1.0
    s = np.sqrt(disc)
    t = -b - s
    if t > tmin and t <= tmax:
        return t
    t = -b + s
    if t > tmin and t <= tmax:
        return t
    return -1.0


@njit(cache=True, inline="always")
def _ray_box(data, ox, oy, oz, dx, dy, dz, tmin, tmax):
    cx, cy, cz = data[0], data[1], data[2]
    hx, hy, hz = data[3], data[4], data[5]
    r00, r01, r02 = data[6], data[7], data[8]
    r10, r11, r12 = data[9], data[10], data[11]
    r20, r21, r22 = data[12], data[13], data[14]
    mx, my, mz = ox - cx, oy - cy, oz - cz
    lox = r00 * mx + r10 * my + r20 * mz
    loy = r01 * mx + r11 * my + r21 * mz
    loz = r02 * mx + r12 * my + r22 * mz
    ldx = r00 * dx + r10 * dy + r20 * dz
    ldy = r01 * dx + r11 * dy + r21 * dz
    ldz = r02 * dx + r12 * dy + r22 * dz
    t0 = tmin
    t1 = tmax
    for axis in range(3):
        if axis == 0:
            o, d, h = lox, ldx, hx
        elif axis == 1:
            o, d, h = loy, ldy, hy
        else:
            o, d, h = loz, ldz, hz
        if abs(d) < 1e-300:
            if o < -h or o > h:
                return -1.0
        else:
            inv = 1.0 / d
            ta = (-h - o) * inv
            tb = (h - o) * inv
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
            if t0 > t1:
                return -1.0
    # t0 is the entry time clamped at tmin; accept the exit when inside
    if t0 > tmin and t0 <= tmax:
        return t0
    if t1 > tmin and t1 <= tmax:
        return t1
    return -1.0


@njit(cache=True, inline="always")
def _ray_triangle(data, ox, oy, oz, dx, dy, dz, tmin, tmax):
    # Moller-Trumbore, two-sided
    ax, ay, az = data[0], data[1], data[2]
    e1x, e1y, e1z = data[3] - ax, data[4] - ay, data[5] - az
    e2x, e2y, e2z = data[6] - ax, data[7] - ay, data[8] - az
    px = dy * e2z - dz * e2y
    py = dz * e2x - dx * e2z
    pz = dx * e2y - dy * e2x
    det = e1x * px + e1y * py + e1z * pz
    if abs(det) < 1e-300:
        return -1.0
    inv = 1.0 / det
    tx, ty, tz = ox - ax, oy - ay, oz - az
    u = (tx * px + ty * py + tz * pz) * inv
    if u < 0.0 or u > 1.0:
        return -1.0
    qx = ty * e1z - tz * e1y
    qy = tz * e1x - tx * e1z
    qz = tx * e1y - ty * e1x
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < 0.0 or u + v > 1.0:
        return -1.0
    t = (e2x * qx + e2y * qy + e2z * qz) * inv
    if t > tmin and t <= tmax:
        return t
    return -1.0


@njit(cache=True, inline="always")
def ray_primitive(ptype, data, ox, oy, oz, dx, dy, dz, tmin, tmax):
    if ptype == 0:
        return _ray_sphere(data[0], data[1], data[2], data[3], ox, oy, oz, dx, dy, dz, tmin, tmax)
    elif ptype == 1:
        return _ray_box(data, ox, oy, oz, dx, dy, dz, tmin, tmax)
    else:
        return _ray_triangle(data, ox, oy, oz, dx, dy, dz, tmin, tmax)


@njit(cache=True, inline="always")
def _ray_aabb_enter(lox, loy, loz, hix, hiy, hiz, ox, oy, oz, idx, idy, idz, tmax):
    """Entry time of the ray into the AABB, or -inf..; > tmax means miss."""
    t0 = 0.0
    t1 = tmax
    ta = (lox - ox) * idx
    tb = (hix - ox) * idx
    if ta > tb:
        ta, tb = tb, ta
    if ta > t0:
        t0 = ta
    if tb < t1:
        t1 = tb
    ta = (loy - oy) * idy
    tb = (hiy - oy) * idy
    if ta > tb:
        ta, tb = tb, ta
    if ta > t0:
        t0 = ta
    if tb < t1:
        t1 = tb
    ta = (loz - oz) * idz
    tb = (hiz - oz) * idz
    if ta > tb:
        ta, tb = tb, ta
    if ta > t0:
        t0 = ta
    if tb < t1:
        t1 = tb
    if t0 > t1:
        return INF
    return t0


@njit(cache=True, inline="always")
def _raycast_core(
    node_lo, node_hi, node_first, node_count, prim_order, prim_type, prim_data, prim_oid,
    ox, oy, oz, dx, dy, dz, tmin, tmax, stack,
):
    idx = 1.0 / dx if abs(dx) > 1e-300 else INF if dx >= 0 else -INF
    idy = 1.0 / dy if abs(dy) > 1e-300 else INF if dy >= 0 else -INF
    idz = 1.0 / dz if abs(dz) > 1e-300 else INF if dz >= 0 else -INF
    stack[0] = 0
    top = 1
    best_t = tmax
    best_id = -1
    hit = False
    while top > 0:
        top -= 1
        node = stack[top]
        enter = _ray_aabb_enter(
            node_lo[node, 0], node_lo[node, 1], node_lo[node, 2],
            node_hi[node, 0], node_hi[node, 1], node_hi[node, 2],
            ox, oy, oz, idx, idy, idz, best_t,
        )
        if enter > best_t:
            continue
        cnt = node_count[node]
        if cnt > 0:
            first = node_first[node]
            for k in range(first, first + cnt):
                p = prim_order[k]
                t = ray_primitive(prim_type[p], prim_data[p], ox, oy, oz, dx, dy, dz, tmin, best_t)
                if t > 0.0:
                    oid = prim_oid[p]
                    if t < best_t or not hit or (t == best_t and oid < best_id):
                        best_t = t
                        best_id = oid
                        hit = True
        else:
            left = node_first[node]
            right = left + 1
            el = _ray_aabb_enter(
                node_lo[left, 0], node_lo[left, 1], node_lo[left, 2],
                node_hi[left, 0], node_hi[left, 1], node_hi[left, 2],
                ox, oy, oz, idx, idy, idz, best_t,
            )
            er = _ray_aabb_enter(
                node_lo[right, 0], node_lo[right, 1], node_lo[right, 2],
                node_hi[right, 0], node_hi[right, 1], node_hi[right, 2],
                ox, oy, oz, idx, idy, idz, best_t,
            )
            if el <= er:
                if er <= best_t:
                    stack[top] = right
                    top += 1
                if el <= best_t:
                    stack[top] = left
                    top += 1
            else:
                if el <= best_t:
                    stack[top] = left
                    top += 1
                if er <= best_t:
                    stack[top] = right
                    top += 1
    if hit:
        return best_t, best_id
    return -1.0, np.int64(-1)


@njit(cache=True)
def raycast_query(
    node_lo, node_hi, node_first, node_count, prim_order, prim_type, prim_data, prim_oid,
    ox, oy, oz, dx, dy, dz, tmin, tmax,
):
    """Returns (t, object id); t < 0 means no hit within (tmin, tmax]."""
    stack = np.empty(_STACK, dtype=np.int64)
    return _raycast_core(
        node_lo, node_hi, node_first, node_count, prim_order, prim_type, prim_data, prim_oid,
        ox, oy, oz, dx, dy, dz, tmin, tmax, stack,
    )


@njit(cache=True, parallel=True)
def render_batch(
    node_lo, node_hi, node_first, node_count, prim_order, prim_type, prim_data, prim_oid,
    origins, rotations, width, height, tan_half_h, tan_half_v, max_range,
    extra_spheres, extra_ids,
    out_depth, out_id,
):
    """Pinhole z-depth + object-id render for a batch of camera poses.

    origins: (A, 3); rotations: (A, 3, 3) camera->world (columns: right,
    down, forward). extra_spheres: (A, K, 4) per-view dynamic spheres
    (other agents in swarm mode); K may be 0.
    """
    n_views = origins.shape[0]
    n_extra = extra_spheres.shape[1]
    for job in prange(n_views * height):
        view = job // height
        i = job % height
        stack = np.empty(_STACK, dtype=np.int64)
        ox, oy, oz = origins[view, 0], origins[view, 1], origins[view, 2]
        r = rotations[view]
        y = (2.0 * (i + 0.5) / height - 1.0) * tan_half_v
        for j in range(width):
            x = (2.0 * (j + 0.5) / width - 1.0) * tan_half_h
            norm = np.sqrt(x * x + y * y + 1.0)
            cz = 1.0 / norm  # z-depth per unit ray length
            cx = x * cz
            cy = y * cz
            dx = r[0, 0] * cx + r[0, 1] * cy + r[0, 2] * cz
            dy = r[1, 0] * cx + r[1, 1] * cy + r[1, 2] * cz
            dz = r[2, 0] * cx + r[2, 1] * cy + r[2, 2] * cz
            tmax = max_range / cz
            t, oid = _raycast_core(
                node_lo, node_hi, node_first, node_count, prim_order, prim_type, prim_data, prim_oid,
                ox, oy, oz, dx, dy, dz, 1e-9, tmax, stack,
            )
            for k in range(n_extra):
                ts = _ray_sphere(
                    extra_spheres[view, k, 0], extra_spheres[view, k, 1], extra_spheres[view, k, 2],
                    extra_spheres[view, k, 3], ox, oy, oz, dx, dy, dz, 1e-9, tmax,
                )
                if ts > 0.0 and (t < 0.0 or ts < t):
                    t = ts
                    oid = extra_ids[view, k]
            if t > 0.0:
                out_depth[view, i, j] = t * cz
                out_id[view, i, j] = oid
            else:
                out_depth[view, i, j] = max_range
                out_id[view, i, j] = 0
