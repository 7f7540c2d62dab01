"""Public spatial queries over a Scene."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import EmptyScene
from . import kernels
from .shapes import Scene


@dataclass(frozen=True)
class ProximityResult:
    point: np.ndarray
    distance: float
    object_id: int


@dataclass(frozen=True)
class RayHit:
    t: float
    object_id: int


def nearest_point(scene: Scene, query) -> ProximityResult:
    """Globally closest point on any obstacle; ties go to the lowest id."""
    arr = scene.arrays  # raises EmptyScene on an empty scene
    q = np.asarray(query, dtype=float).reshape(3)
    px, py, pz, d2, oid = kernels.nearest_point_query(
        arr.node_lo, arr.node_hi, arr.node_first, arr.node_count,
        arr.prim_order, arr.prim_type, arr.prim_data, arr.prim_object_id,
        q[0], q[1], q[2],
    )
    point = np.array([px, py, pz])
    return ProximityResult(point, float(np.sqrt(d2)), int(oid))


def nearest_distances(scene: Scene, positions: np.ndarray) -> np.ndarray:
    """Nearest-obstacle distance for a batch of positions, shape (N,)."""
    arr = scene.arrays
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    out = np.empty(len(positions))
    for i, q in enumerate(positions):
        _, _, _, d2, _ = kernels.nearest_point_query(
            arr.node_lo, arr.node_hi, arr.node_first, arr.node_count,
            arr.prim_order, arr.prim_type, arr.prim_data, arr.prim_object_id,
            q[0], q[1], q[2],
        )
        out[i] = np.sqrt(d2)
    return out


def raycast(scene: Scene, origin, direction, max_range: float) -> Optional[RayHit]:
    """Nearest intersection with t in (0, max_range], or None."""
    arr = scene.arrays
    o = np.asarray(origin, dtype=float).reshape(3)
    d = np.asarray(direction, dtype=float).reshape(3)
    n = np.linalg.norm(d)
    if abs(n - 1.0) > 1e-9:
        raise ValueError(f"direction must be unit length, |d| = {n}")
    t, oid = kernels.raycast_query(
        arr.node_lo, arr.node_hi, arr.node_first, arr.node_count,
        arr.prim_order, arr.prim_type, arr.prim_data, arr.prim_object_id,
        o[0], o[1], o[2], d[0], d[1], d[2], 0.0, float(max_range),
    )
    if t < 0.0:
        return None
    return RayHit(float(t), int(oid))


def collision_check(scene: Scene, position, radius: float) -> bool:
    """Sphere-vs-scene test: nearest surface point closer than `radius`."""
    if radius <= 0:
        raise ValueError("radius must be > 0")
    if scene.num_objects == 0:
        raise EmptyScene("collision check against an empty scene")
    return nearest_point(scene, position).distance < radius
