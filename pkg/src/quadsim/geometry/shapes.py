"""Scene primitives and the immutable Scene container.

A Scene holds identified objects (spheres, oriented boxes, triangle
meshes). For queries every object is flattened into a table of primitives
(each mesh triangle is its own primitive) with a BVH built lazily on first
use; the Scene itself is never mutated afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ..errors import EmptyScene

SPHERE = 0
BOX = 1
TRIANGLE = 2

PRIM_DATA_WIDTH = 16


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        if self.radius <= 0:
            raise ValueError("sphere radius must be > 0")


@dataclass(frozen=True)
class Box:
    center: np.ndarray
    half_extents: np.ndarray
    rotation: np.ndarray = None  # local -> world; identity when omitted

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        object.__setattr__(self, "half_extents", np.asarray(self.half_extents, dtype=float).reshape(3))
        rot = np.eye(3) if self.rotation is None else np.asarray(self.rotation, dtype=float).reshape(3, 3)
        object.__setattr__(self, "rotation", rot)
        if np.any(self.half_extents <= 0):
            raise ValueError("box half extents must be > 0")


@dataclass(frozen=True)
class TriMesh:
    vertices: np.ndarray  # (V, 3)
    triangles: np.ndarray  # (T, 3) int

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float).reshape(-1, 3))
        object.__setattr__(self, "triangles", np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3))
        if len(self.triangles) < 1:
            raise ValueError("mesh needs at least one triangle")
        if not np.isfinite(self.vertices).all():
            raise ValueError("mesh vertices must be finite")
        if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
            raise ValueError("triangle index out of range")


Shape = Union[Sphere, Box, TriMesh]


@dataclass(frozen=True)
class SceneObject:
    id: int
    shape: Shape

    def __post_init__(self):
        if self.id <= 0:
            raise ValueError("object ids must be positive (0 is background)")


@dataclass(frozen=True)
class AABB:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float).reshape(3))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float).reshape(3))
        if np.any(self.lo > self.hi):
            raise ValueError("AABB lo must be <= hi")

    @property
    def size(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def volume(self) -> float:
        return float(np.prod(self.size))

    def inflate(self, margin: float) -> "AABB":
        return AABB(self.lo - margin, self.hi + margin)

    def contains(self, point) -> bool:
        point = np.asarray(point, dtype=float)
        return bool(np.all(point >= self.lo) and np.all(point <= self.hi))


class SceneArrays:
    """Flattened primitive table plus BVH arrays, consumed by the kernels."""

    __slots__ = (
        "prim_type",
        "prim_data",
        "prim_object_id",
        "prim_aabb_lo",
        "prim_aabb_hi",
        "node_lo",
        "node_hi",
        "node_first",
        "node_count",
        "prim_order",
    )

    def __init__(self, prim_type, prim_data, prim_object_id, prim_aabb_lo, prim_aabb_hi):
        from .bvh import build_bvh

        self.prim_type = prim_type
        self.prim_data = prim_data
        self.prim_object_id = prim_object_id
        self.prim_aabb_lo = prim_aabb_lo
        self.prim_aabb_hi = prim_aabb_hi
        node_lo, node_hi, node_first, node_count, order = build_bvh(prim_aabb_lo, prim_aabb_hi)
        self.node_lo = node_lo
        self.node_hi = node_hi
        self.node_first = node_first
        self.node_count = node_count
        self.prim_order = order


def _flatten_object(obj: SceneObject, rows_type, rows_data, rows_id, rows_lo, rows_hi):
    shape = obj.shape
    if isinstance(shape, Sphere):
        row = np.zeros(PRIM_DATA_WIDTH)
        row[0:3] = shape.center
        row[3] = shape.radius
        rows_type.append(SPHERE)
        rows_data.append(row)
        rows_id.append(obj.id)
        rows_lo.append(shape.center - shape.radius)
        rows_hi.append(shape.center + shape.radius)
    elif isinstance(shape, Box):
        row = np.zeros(PRIM_DATA_WIDTH)
        row[0:3] = shape.center
        row[3:6] = shape.half_extents
        row[6:15] = shape.rotation.reshape(9)
        rows_type.append(BOX)
        rows_data.append(row)
        rows_id.append(obj.id)
        reach = np.abs(shape.rotation) @ shape.half_extents
        rows_lo.append(shape.center - reach)
        rows_hi.append(shape.center + reach)
    elif isinstance(shape, TriMesh):
        tris = shape.vertices[shape.triangles]  # (T, 3, 3)
        for tri in tris:
            row = np.zeros(PRIM_DATA_WIDTH)
            row[0:9] = tri.reshape(9)
            rows_type.append(TRIANGLE)
            rows_data.append(row)
            rows_id.append(obj.id)
            rows_lo.append(tri.min(axis=0))
            rows_hi.append(tri.max(axis=0))
    else:
        raise TypeError(f"unsupported shape {type(shape).__name__}")


class Scene:
    """Immutable obstacle set with lazily built acceleration arrays."""

    def __init__(self, objects):
        objects = tuple(objects)
        ids = [o.id for o in objects]
        if len(set(ids)) != len(ids):
            raise ValueError("scene object ids must be unique")
        self._objects = objects
        self._arrays = None

    @property
    def objects(self) -> tuple:
        return self._objects

    @property
    def num_objects(self) -> int:
        return len(self._objects)

    def __repr__(self):
        return f"Scene({len(self._objects)} objects)"

    @property
    def arrays(self) -> SceneArrays:
        if self._arrays is None:
            if not self._objects:
                raise EmptyScene("scene has no objects")
            rows_type, rows_data, rows_id, rows_lo, rows_hi = [], [], [], [], []
            for obj in self._objects:
                _flatten_object(obj, rows_type, rows_data, rows_id, rows_lo, rows_hi)
            self._arrays = SceneArrays(
                np.asarray(rows_type, dtype=np.int64),
                np.ascontiguousarray(np.stack(rows_data)),
                np.asarray(rows_id, dtype=np.int64),
                np.ascontiguousarray(np.stack(rows_lo)),
                np.ascontiguousarray(np.stack(rows_hi)),
            )
        return self._arrays

    @property
    def bounds(self) -> AABB:
        arr = self.arrays
        return AABB(arr.prim_aabb_lo.min(axis=0), arr.prim_aabb_hi.max(axis=0))
