"""Ray-cast depth / object-id cameras, IMU model, and sensor noise.

Camera frame convention: +x right, +y down, +z forward (optical axis).
`pose_offset` places the camera in the body frame (camera->body rotation
and translation). Depth is z-depth: hit distance projected on the optical
axis, clipped to (0, max_range]; pixels with no hit read exactly
max_range and id 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quatmath as qm
from .dynamics import QuadState, Wrench, drag_force, rotor_thrusts
from .errors import InvalidNoiseForSensor
from .geometry.kernels import render_batch
from .geometry.shapes import Scene

# camera->body rotation for a forward-looking camera on a body with
# x forward / y left / z up: cam right = -y_body, cam down = -z_body
FORWARD = np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])
# downward-looking camera: forward = -z_body, image up = +x_body
DOWNWARD = np.array([[0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])

_NO_EXTRA = np.zeros((0, 0, 4)), np.zeros((0, 0), dtype=np.int64)


@dataclass(frozen=True)
class CameraModel:
    width: int = 64
    height: int = 64
    vertical_fov: float = math.pi / 2
    rotation: np.ndarray = field(default_factory=lambda: FORWARD.copy())  # camera -> body
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))  # camera origin in body
    max_range: float = 10.0
    depth_convention: str = "zdepth"

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(3, 3))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float).reshape(3))
        if self.width < 1 or self.height < 1:
            raise ValueError("camera resolution must be >= 1")
        if not (0.0 < self.vertical_fov < math.pi):
            raise ValueError("vertical_fov must be in (0, pi)")
        if self.depth_convention != "zdepth":
            raise ValueError("only the zdepth convention is implemented")

    @property
    def tan_half_v(self) -> float:
        return math.tan(self.vertical_fov / 2.0)

    @property
    def tan_half_h(self) -> float:
        return self.tan_half_v * self.width / self.height

    @property
    def focal_px(self) -> float:
        """Focal length in pixels (same for both axes with square pixels)."""
        return (self.height / 2.0) / self.tan_half_v


def camera_pose_world(body_position, body_orientation, camera: CameraModel):
    """World-frame camera origin(s) and camera->world rotation(s)."""
    pos = np.atleast_2d(np.asarray(body_position, dtype=float))
    quat = np.atleast_2d(np.asarray(body_orientation, dtype=float))
    n = pos.shape[0]
    origins = pos + qm.rotate(quat, np.broadcast_to(camera.translation, (n, 3)))
    body_rot = qm.to_matrix(quat)  # (n, 3, 3)
    rotations = np.einsum("nij,jk->nik", body_rot, camera.rotation)
    return origins, np.ascontiguousarray(rotations)


def render_frames(scene: Scene, body_position, body_orientation, camera: CameraModel, extra_spheres=None, extra_ids=None):
    """Render depth and id images for a batch of body poses.

    Returns (depth (A, H, W) float64, ids (A, H, W) int64). Both images
    come from the same per-pixel rays, so background pixels are exactly
    the max_range pixels of the depth image.
    """
    arr = scene.arrays
    origins, rotations = camera_pose_world(body_position, body_orientation, camera)
    n = origins.shape[0]
    if extra_spheres is None:
        extra_spheres = np.zeros((n, 0, 4))
        extra_ids = np.zeros((n, 0), dtype=np.int64)
    depth = np.empty((n, camera.height, camera.width))
    ids = np.empty((n, camera.height, camera.width), dtype=np.int64)
    render_batch(
        arr.node_lo, arr.node_hi, arr.node_first, arr.node_count,
        arr.prim_order, arr.prim_type, arr.prim_data, arr.prim_object_id,
        origins, rotations, camera.width, camera.height,
        camera.tan_half_h, camera.tan_half_v, camera.max_range,
        np.ascontiguousarray(extra_spheres), np.ascontiguousarray(extra_ids),
        depth, ids,
    )
    return depth, ids


def render_depth(scene: Scene, body_position, body_orientation, camera: CameraModel) -> np.ndarray:
    """Depth image(s); single pose in, (H, W) out; batch in, (A, H, W) out."""
    single = np.asarray(body_position).ndim == 1
    depth, _ = render_frames(scene, body_position, body_orientation, camera)
    return depth[0] if single else depth


def render_segmentation(scene: Scene, body_position, body_orientation, camera: CameraModel) -> np.ndarray:
    """Object-id image(s); 0 marks background."""
    single = np.asarray(body_position).ndim == 1
    _, ids = render_frames(scene, body_position, body_orientation, camera)
    return ids[0] if single else ids


# ---------------------------------------------------------------------------
# IMU


@dataclass
class ImuReading:
    specific_force_b: np.ndarray  # (N, 3) accelerometer, gravity excluded
    angvel_b: np.ndarray  # (N, 3) gyro


def imu_read(state: QuadState, wrench: Wrench, params) -> ImuReading:
    """Ideal IMU: specific force (f+d)/m in the body frame, gyro = angvel."""
    return ImuReading(wrench.force_b / params.mass, state.angvel_b.copy())


def body_wrench(state: QuadState, params) -> Wrench:
    """Thrust+drag wrench at the current state (used by the IMU model)."""
    thr = rotor_thrusts(state.rotor_speeds, params)
    v_b = qm.rotate_inv(state.orientation, state.velocity_w)
    force = drag_force(v_b, params)
    force = force.copy()
    force[:, 2] += thr[:, 0] + thr[:, 1] + thr[:, 2] + thr[:, 3]
    g = params.torque_arms
    torque = np.stack(
        [
            thr[:, 0] * g[0, a] + thr[:, 1] * g[1, a] + thr[:, 2] * g[2, a] + thr[:, 3] * g[3, a]
            for a in range(3)
        ],
        axis=1,
    )
    return Wrench(force, torque)


# ---------------------------------------------------------------------------
# Noise models

DEPTH_KINDS = {"normal", "poisson", "saltpepper", "speckle", "redwood"}
IMAGE_KINDS = {"normal", "poisson", "saltpepper", "speckle"}  # rgb / segmentation
IMU_KINDS = {"normal"}

_SENSOR_KINDS = {
    "depth": DEPTH_KINDS,
    "rgb": IMAGE_KINDS,
    "segmentation": IMAGE_KINDS,
    "imu": IMU_KINDS,
}


@dataclass(frozen=True)
class NoiseSpec:
    """One noise model attachment.

    kind/parameters:
      normal      sigma: additive iid Gaussian std
      poisson     scaling: values become Poisson(value * scaling) / scaling
      saltpepper  p: per-pixel corruption probability (half low, half high)
      speckle     sigma: multiplicative (1 + sigma * N(0,1))
      redwood     sigma_disparity, quantization: disparity-domain depth
                  distortion (depth images only)
    """

    kind: str
    sigma: float = 0.0
    p: float = 0.0
    scaling: float = 1.0
    sigma_disparity: float = 0.0
    quantization: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", self.kind.lower())
        if self.kind not in {"normal", "poisson", "saltpepper", "speckle", "redwood"}:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if min(self.sigma, self.p, self.scaling, self.sigma_disparity, self.quantization) < 0:
            raise ValueError("noise parameters must be nonnegative")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("saltpepper p must be in [0, 1]")


def apply_noise(data: np.ndarray, spec: NoiseSpec, rng: np.random.Generator, sensor: str = "depth") -> np.ndarray:
    """Apply one noise model; deterministic under the rng state.

    `sensor` selects the validity table: redwood exists only for depth,
    IMU readings accept Gaussian noise only.
    """
    sensor = sensor.lower()
    if sensor not in _SENSOR_KINDS:
        raise InvalidNoiseForSensor(f"unknown sensor type {sensor!r}")
    if spec.kind not in _SENSOR_KINDS[sensor]:
        raise InvalidNoiseForSensor(f"noise {spec.kind!r} is not defined for {sensor!r} data")
    values = np.asarray(data, dtype=float)
    if spec.kind == "normal":
        if spec.sigma == 0.0:
            return values.copy()
        return values + spec.sigma * rng.standard_normal(values.shape)
    if spec.kind == "poisson":
        return rng.poisson(np.maximum(values, 0.0) * spec.scaling).astype(float) / spec.scaling
    if spec.kind == "saltpepper":
        out = values.copy()
        if spec.p == 0.0:
            return out
        corrupt = rng.random(values.shape) < spec.p
        salt = rng.random(values.shape) < 0.5
        lo, hi = values.min(), values.max()
        out[corrupt & salt] = hi
        out[corrupt & ~salt] = lo
        return out
    if spec.kind == "speckle":
        if spec.sigma == 0.0:
            return values.copy()
        return values * (1.0 + spec.sigma * rng.standard_normal(values.shape))
    # redwood: perturb (and optionally quantize) in disparity space
    safe = np.maximum(values, 1e-6)
    disparity = 1.0 / safe
    if spec.sigma_disparity > 0.0:
        disparity = disparity + spec.sigma_disparity * rng.standard_normal(values.shape)
    if spec.quantization > 0.0:
        disparity = np.round(disparity / spec.quantization) * spec.quantization
    disparity = np.maximum(disparity, 1.0 / (values.max() + 1.0) if values.size else 1e-6)
    return 1.0 / disparity


# ---------------------------------------------------------------------------
# 16-bit PGM export (millimeter depth, raw object ids)

PGM_MAXVAL = 65535


def write_pgm16(path, image: np.ndarray):
    """Binary 16-bit PGM (big-endian sample order per the PNM spec)."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError("expected a 2-D image")
    data = np.clip(np.round(image), 0, PGM_MAXVAL).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{image.shape[1]} {image.shape[0]}\n{PGM_MAXVAL}\n".encode())
        fh.write(data.tobytes())


def read_pgm16(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P5":
            raise ValueError(f"not a binary PGM file: {magic!r}")
        dims = fh.readline().split()
        width, height = int(dims[0]), int(dims[1])
        maxval = int(fh.readline())
        dtype = ">u2" if maxval > 255 else "u1"
        data = np.frombuffer(fh.read(), dtype=dtype, count=width * height)
    return data.reshape(height, width).astype(np.int64)


def export_depth_mm(path, depth_m: np.ndarray):
    """Depth frame in millimeters, quantized to 16-bit."""
    write_pgm16(path, np.asarray(depth_m) * 1000.0)


def export_segmentation(path, ids: np.ndarray):
    write_pgm16(path, ids)
