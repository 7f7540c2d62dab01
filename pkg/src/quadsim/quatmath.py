"""Quaternion and rotation helpers, batched over leading axes.

Quaternions are scalar-first [w, x, y, z], mapping body to world. All
functions are written as explicit elementwise arithmetic (no matmul/einsum)
so that stepping a batch of N agents is bitwise identical to stepping each
agent alone.

Rotation uses the unit-style polynomial R(q) = I + 2w[u]x + 2[u]x^2, which
equals the true rotation matrix only for |q| = 1; between renormalizations
it is treated as the definition of the map and differentiated as such.
"""

from __future__ import annotations

import numpy as np


def normalize(q: np.ndarray) -> np.ndarray:
    """Return q / |q| along the last axis."""
    n = np.sqrt(q[..., 0] ** 2 + q[..., 1] ** 2 + q[..., 2] ** 2 + q[..., 3] ** 2)
    return q / n[..., None]


def multiply(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Hamilton product q ⊗ p."""
    qw, qx, qy, qz = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    pw, px, py, pz = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    return np.stack(
        [
            qw * pw - qx * px - qy * py - qz * pz,
            qw * px + qx * pw + qy * pz - qz * py,
            qw * py - qx * pz + qy * pw + qz * px,
            qw * pz + qx * py - qy * px + qz * pw,
        ],
        axis=-1,
    )


def rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply R(q) to v: body -> world for a body-to-world quaternion."""
    w = q[..., 0]
    ux, uy, uz = q[..., 1], q[..., 2], q[..., 3]
    vx, vy, vz = v[..., 0], v[..., 1], v[..., 2]
    # t = u x v
    tx = uy * vz - uz * vy
    ty = uz * vx - ux * vz
    tz = ux * vy - uy * vx
    # u x t
    sx = uy * tz - uz * ty
    sy = uz * tx - ux * tz
    sz = ux * ty - uy * tx
    return np.stack(
        [vx + 2.0 * (w * tx + sx), vy + 2.0 * (w * ty + sy), vz + 2.0 * (w * tz + sz)],
        axis=-1,
    )


def rotate_inv(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply R(q)^T to v: world -> body."""
    w = q[..., 0]
    ux, uy, uz = -q[..., 1], -q[..., 2], -q[..., 3]
    vx, vy, vz = v[..., 0], v[..., 1], v[..., 2]
    tx = uy * vz - uz * vy
    ty = uz * vx - ux * vz
    tz = ux * vy - uy * vx
    sx = uy * tz - uz * ty
    sy = uz * tx - ux * tz
    sz = ux * ty - uy * tx
    return np.stack(
        [vx + 2.0 * (w * tx + sx), vy + 2.0 * (w * ty + sy), vz + 2.0 * (w * tz + sz)],
        axis=-1,
    )


def to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrix R(q), shape (..., 3, 3)."""
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    row0 = np.stack([1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)], axis=-1)
    row1 = np.stack([2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)], axis=-1)
    row2 = np.stack([2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)], axis=-1)
    return np.stack([row0, row1, row2], axis=-2)


def from_matrix(m: np.ndarray) -> np.ndarray:
    """Quaternion from a single 3x3 rotation matrix (Shepperd's method)."""
    m = np.asarray(m, dtype=float)
    t = np.trace(m)
    if t > 0.0:
        s = np.sqrt(t + 1.0) * 2.0
        q = np.array([0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s])
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = np.array([(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s])
    elif m[1, 1] >= m[2, 2]:
        s = np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = np.array([(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = np.array([(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s])
    return normalize(q)


def from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    """Quaternion for a rotation of `angle` about (non-zero) `axis`."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    half = 0.5 * angle
    return np.concatenate([[np.cos(half)], np.sin(half) * axis])


def yaw_of(q: np.ndarray) -> np.ndarray:
    """Heading of the body x-axis projected into the world xy-plane."""
    xb = rotate(q, np.broadcast_to(np.array([1.0, 0.0, 0.0]), q.shape[:-1] + (3,)))
    return np.arctan2(xb[..., 1], xb[..., 0])


def left_matrix(q: np.ndarray) -> np.ndarray:
    """L(q) such that q ⊗ p = L(q) p. Single quaternion, returns (4, 4)."""
    w, x, y, z = q
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, -z, y],
            [y, z, w, -x],
            [z, -y, x, w],
        ]
    )


def right_matrix(p: np.ndarray) -> np.ndarray:
    """R(p) such that q ⊗ p = R(p) q. Single quaternion, returns (4, 4)."""
    w, x, y, z = p
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, z, -y],
            [y, -z, w, x],
            [z, y, -x, w],
        ]
    )


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix [v]x for a single 3-vector."""
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def rotate_jacobian_q(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """d(R(q) v)/dq for fixed v. Single sample, returns (3, 4)."""
    w = q[0]
    u = q[1:4]
    uxv = np.cross(u, v)
    cols = np.empty((3, 4))
    cols[:, 0] = 2.0 * uxv
    cols[:, 1:4] = -2.0 * w * skew(v) - 2.0 * skew(uxv) - 2.0 * skew(u) @ skew(v)
    return cols


def rotate_inv_jacobian_q(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """d(R(q)^T v)/dq for fixed v. Single sample, returns (3, 4)."""
    w = q[0]
    u = q[1:4]
    uxv = np.cross(u, v)
    cols = np.empty((3, 4))
    cols[:, 0] = -2.0 * uxv
    cols[:, 1:4] = 2.0 * w * skew(v) - 2.0 * skew(uxv) - 2.0 * skew(u) @ skew(v)
    return cols
