from .generate import floor_scene, gap_scene, garage_scene, generate_cluttered_scene, landing_scene
from .meshio import load_mesh_scene
from .queries import ProximityResult, RayHit, collision_check, nearest_distances, nearest_point, raycast
from .shapes import AABB, Box, Scene, SceneObject, Sphere, TriMesh

__all__ = [
    "AABB",
    "Box",
    "ProximityResult",
    "RayHit",
    "Scene",
    "SceneObject",
    "Sphere",
    "TriMesh",
    "collision_check",
    "floor_scene",
    "gap_scene",
    "garage_scene",
    "generate_cluttered_scene",
    "landing_scene",
    "load_mesh_scene",
    "nearest_distances",
    "nearest_point",
    "raycast",
]
