"""Procedural scene construction: cluttered rooms and task layouts.

Object id convention: 1..6 are the room shell (floor, ceiling, walls),
obstacles count up from 7. Id 0 is reserved for background in renders.
"""

from __future__ import annotations

import numpy as np

from .. import quatmath as qm
from .shapes import AABB, Box, Scene, SceneObject, Sphere

WALL_THICKNESS = 0.2
FLOOR_ID = 1
PAD_ID = 9
WALL_IDS = (2, 3, 4, 5, 6)
OBSTACLE_ID0 = 7


def room_shell(volume: AABB, thickness: float = WALL_THICKNESS, ceiling: bool = True):
    """Six slabs enclosing `volume`; the slab inner faces touch its faces."""
    lo, hi = volume.lo, volume.hi
    cx, cy = 0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])
    cz = 0.5 * (lo[2] + hi[2])
    sx, sy, sz = hi - lo
    t = thickness
    objs = [
        SceneObject(FLOOR_ID, Box([cx, cy, lo[2] - t / 2], [sx / 2 + t, sy / 2 + t, t / 2])),
        SceneObject(3, Box([lo[0] - t / 2, cy, cz], [t / 2, sy / 2 + t, sz / 2 + t])),
        SceneObject(4, Box([hi[0] + t / 2, cy, cz], [t / 2, sy / 2 + t, sz / 2 + t])),
        SceneObject(5, Box([cx, lo[1] - t / 2, cz], [sx / 2 + t, t / 2, sz / 2 + t])),
        SceneObject(6, Box([cx, hi[1] + t / 2, cz], [sx / 2 + t, t / 2, sz / 2 + t])),
    ]
    if ceiling:
        objs.insert(1, SceneObject(2, Box([cx, cy, hi[2] + t / 2], [sx / 2 + t, sy / 2 + t, t / 2])))
    return objs


def generate_cluttered_scene(
    seed: int,
    volume: AABB,
    density: float,
    size_range=(0.1, 0.3),
    walls: bool = True,
) -> Scene:
    """Random stones in a room: Poisson count, uniform placement.

    Obstacles are random convex primitives (spheres and arbitrarily
    oriented boxes) with characteristic half-size drawn from size_range.
    Deterministic for a given seed.
    """
    if density < 0:
        raise ValueError("density must be >= 0")
    rng = np.random.default_rng(seed)
    count = int(rng.poisson(density * volume.volume))
    objs = room_shell(volume) if walls else []
    lo_s, hi_s = size_range
    for k in range(count):
        center = rng.uniform(volume.lo, volume.hi)
        if rng.random() < 0.5:
            shape = Sphere(center, float(rng.uniform(lo_s, hi_s)))
        else:
            half = rng.uniform(lo_s, hi_s, size=3)
            axis = rng.normal(size=3)
            angle = rng.uniform(0.0, 2.0 * np.pi)
            rot = qm.to_matrix(qm.from_axis_angle(axis, angle))
            shape = Box(center, half, rot)
        objs.append(SceneObject(OBSTACLE_ID0 + k, shape))
    return Scene(objs)


def garage_scene(volume: AABB = None) -> Scene:
    """Empty room used by the landing and gap-crossing tasks."""
    if volume is None:
        volume = AABB([-6.0, -6.0, 0.0], [6.0, 6.0, 4.0])
    return Scene(room_shell(volume))


def landing_scene(pad_center=(0.0, 0.0), pad_size: float = 0.5, volume: AABB = None) -> Scene:
    """Garage with a thin landing pad on the floor (object id 9)."""
    if volume is None:
        volume = AABB([-6.0, -6.0, 0.0], [6.0, 6.0, 4.0])
    objs = room_shell(volume)
    px, py = pad_center
    pad = Box([px, py, 0.01], [pad_size / 2, pad_size / 2, 0.01])
    objs.append(SceneObject(PAD_ID, pad))
    return Scene(objs)


PAD_TOP = 0.02


def gap_scene(gap_width: float = 1.0, wall_x: float = 0.0, volume: AABB = None) -> Scene:
    """Garage split by two walls leaving a vertical gap at y = 0."""
    if volume is None:
        volume = AABB([-6.0, -6.0, 0.0], [6.0, 6.0, 4.0])
    objs = room_shell(volume)
    lo, hi = volume.lo, volume.hi
    cz = 0.5 * (lo[2] + hi[2])
    half_z = 0.5 * (hi[2] - lo[2])
    t = 0.1
    if lo[1] < -gap_width / 2:
        cy = 0.5 * (lo[1] - gap_width / 2)
        half_y = 0.5 * (-gap_width / 2 - lo[1])
        objs.append(SceneObject(OBSTACLE_ID0, Box([wall_x, cy, cz], [t, half_y, half_z])))
    if hi[1] > gap_width / 2:
        cy = 0.5 * (gap_width / 2 + hi[1])
        half_y = 0.5 * (hi[1] - gap_width / 2)
        objs.append(SceneObject(OBSTACLE_ID0 + 1, Box([wall_x, cy, cz], [t, half_y, half_z])))
    return Scene(objs)


def floor_scene(z: float = 0.0, half_size: float = 500.0) -> Scene:
    """A single huge slab whose top face sits at height z."""
    return Scene([SceneObject(FLOOR_ID, Box([0.0, 0.0, z - 0.05], [half_size, half_size, 0.05]))])
