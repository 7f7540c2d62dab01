"""Continuous-time quadrotor dynamics and fixed-step batched integration.

State layout used throughout (17 numbers per agent):
    position (3, world), velocity (3, world), quaternion (4, body->world,
    scalar first), angular velocity (3, body), rotor speeds (4).

The first 13 entries form the "rigid state" that the public Jacobians are
expressed over.

Implementation constraint: all batch math is explicit elementwise
arithmetic so that a batch of N agents steps bitwise identically to N
separate single-agent calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quatmath as qm
from .errors import NonFiniteState
from .params import Integrator, QuadParams, SimConfig

RIGID_DIM = 13
STATE_DIM = 17


@dataclass
class QuadState:
    """Batched vehicle state; every field has a leading batch axis."""

    position_w: np.ndarray
    velocity_w: np.ndarray
    orientation: np.ndarray
    angvel_b: np.ndarray
    rotor_speeds: np.ndarray

    @classmethod
    def hover(cls, n: int, params: QuadParams, position=None) -> "QuadState":
        """Level hover at rest with rotors at the hover speed."""
        pos = np.zeros((n, 3)) if position is None else np.broadcast_to(np.asarray(position, float), (n, 3)).copy()
        quat = np.zeros((n, 4))
        quat[:, 0] = 1.0
        rotors = np.full((n, 4), params.hover_speed)
        return cls(pos, np.zeros((n, 3)), quat, np.zeros((n, 3)), rotors)

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "QuadState":
        vec = np.atleast_2d(np.asarray(vec, dtype=float))
        return cls(
            vec[:, 0:3].copy(),
            vec[:, 3:6].copy(),
            vec[:, 6:10].copy(),
            vec[:, 10:13].copy(),
            vec[:, 13:17].copy(),
        )

    def as_vector(self) -> np.ndarray:
        """Concatenate to (N, 17) in the documented order."""
        return np.concatenate(
            [self.position_w, self.velocity_w, self.orientation, self.angvel_b, self.rotor_speeds], axis=1
        )

    def copy(self) -> "QuadState":
        return QuadState(
            self.position_w.copy(),
            self.velocity_w.copy(),
            self.orientation.copy(),
            self.angvel_b.copy(),
            self.rotor_speeds.copy(),
        )

    def select(self, idx) -> "QuadState":
        return QuadState(
            self.position_w[idx : idx + 1].copy(),
            self.velocity_w[idx : idx + 1].copy(),
            self.orientation[idx : idx + 1].copy(),
            self.angvel_b[idx : idx + 1].copy(),
            self.rotor_speeds[idx : idx + 1].copy(),
        )

    def set_agent(self, idx: int, other: "QuadState", other_idx: int = 0):
        self.position_w[idx] = other.position_w[other_idx]
        self.velocity_w[idx] = other.velocity_w[other_idx]
        self.orientation[idx] = other.orientation[other_idx]
        self.angvel_b[idx] = other.angvel_b[other_idx]
        self.rotor_speeds[idx] = other.rotor_speeds[other_idx]

    @property
    def batch_size(self) -> int:
        return self.position_w.shape[0]


@dataclass
class Wrench:
    """Force and torque in the body frame, batched."""

    force_b: np.ndarray
    torque_b: np.ndarray


def rotor_thrusts(rotor_speeds: np.ndarray, params: QuadParams) -> np.ndarray:
    """Per-rotor thrust along body +z from the quadratic speed curve."""
    k2, k1, k0 = params.thrust_coeffs
    return k2 * rotor_speeds**2 + k1 * rotor_speeds + k0


def rotor_lag(current: np.ndarray, desired: np.ndarray, dt: float, params: QuadParams) -> np.ndarray:
    """First-order exponential motor response over dt, clamped to limits."""
    alpha = np.exp(-params.motor_decay * dt)
    out = desired + (current - desired) * alpha
    lo, hi = params.rotor_speed_limits
    return np.clip(out, lo, hi)


def drag_force(velocity_b: np.ndarray, params: QuadParams) -> np.ndarray:
    """Quadratic aerodynamic drag opposing body-frame velocity, componentwise."""
    c = 0.5 * params.air_density * params.drag_coeffs * params.cross_area
    return -c * velocity_b * np.abs(velocity_b)


def aggregate_wrench(thrusts: np.ndarray, params: QuadParams) -> Wrench:
    """Collective force and torque from per-rotor thrusts (excludes drag)."""
    thrusts = np.atleast_2d(thrusts)
    n = thrusts.shape[0]
    g = params.torque_arms  # (4, 3)
    force = np.zeros((n, 3))
    force[:, 2] = thrusts[:, 0] + thrusts[:, 1] + thrusts[:, 2] + thrusts[:, 3]
    torque = np.empty((n, 3))
    for axis in range(3):
        torque[:, axis] = (
            thrusts[:, 0] * g[0, axis]
            + thrusts[:, 1] * g[1, axis]
            + thrusts[:, 2] * g[2, axis]
            + thrusts[:, 3] * g[3, axis]
        )
    return Wrench(force, torque)


def state_derivative(state: QuadState, wrench: Wrench, params: QuadParams) -> QuadState:
    """Time derivative of the rigid state under a given body wrench.

    The wrench must already include drag. Rotor speeds are not part of the
    differential state (their update is the exact exponential in step()),
    so the derivative's rotor field is zero.
    """
    d_pos, d_vel, d_quat, d_ang = _rigid_derivative(
        state.velocity_w, state.orientation, state.angvel_b, wrench.force_b, wrench.torque_b, params
    )
    return QuadState(d_pos, d_vel, d_quat, d_ang, np.zeros_like(state.rotor_speeds))


def _rigid_derivative(vel, quat, angvel, force_b, torque_b, params):
    """Core derivative shared by the integrators; all inputs batched."""
    d_pos = vel
    acc = qm.rotate(quat, force_b) / params.mass + params.gravity
    # quaternion kinematics: 0.5 * q ⊗ (0, Ω)
    w, x, y, z = quat[:, 0], quat[:, 1], quat[:, 2], quat[:, 3]
    ox, oy, oz = angvel[:, 0], angvel[:, 1], angvel[:, 2]
    d_quat = 0.5 * np.stack(
        [
            -x * ox - y * oy - z * oz,
            w * ox + y * oz - z * oy,
            w * oy - x * oz + z * ox,
            w * oz + x * oy - y * ox,
        ],
        axis=1,
    )
    jx, jy, jz = params.inertia_diag
    # J^-1 (tau - Ω x JΩ) with diagonal J
    cx = oy * (jz * oz) - oz * (jy * oy)
    cy = oz * (jx * ox) - ox * (jz * oz)
    cz = ox * (jy * oy) - oy * (jx * ox)
    d_ang = np.stack(
        [(torque_b[:, 0] - cx) / jx, (torque_b[:, 1] - cy) / jy, (torque_b[:, 2] - cz) / jz],
        axis=1,
    )
    return d_pos, acc, d_quat, d_ang


def _forces(vel, quat, rotor_speeds, params):
    """Total body-frame force (thrust + drag) and torque at given state."""
    f = rotor_thrusts(rotor_speeds, params)
    g = params.torque_arms
    n = vel.shape[0]
    v_b = qm.rotate_inv(quat, vel)
    force = drag_force(v_b, params)
    force = np.stack(
        [force[:, 0], force[:, 1], force[:, 2] + f[:, 0] + f[:, 1] + f[:, 2] + f[:, 3]], axis=1
    )
    torque = np.empty((n, 3))
    for axis in range(3):
        torque[:, axis] = f[:, 0] * g[0, axis] + f[:, 1] * g[1, axis] + f[:, 2] * g[2, axis] + f[:, 3] * g[3, axis]
    return force, torque


def _ode_rhs(pos, vel, quat, angvel, rotor_speeds, params):
    force, torque = _forces(vel, quat, rotor_speeds, params)
    return _rigid_derivative(vel, quat, angvel, force, torque, params)


def integrate_substep(state: QuadState, rotor_speeds: np.ndarray, h: float, integrator: Integrator, params: QuadParams) -> QuadState:
    """Advance the rigid state by h with rotor speeds held constant.

    Returns the raw (pre-renormalization) state; step() renormalizes.
    """
    p, v, q, o = state.position_w, state.velocity_w, state.orientation, state.angvel_b
    if integrator is Integrator.EULER:
        dp, dv, dq, do = _ode_rhs(p, v, q, o, rotor_speeds, params)
        return QuadState(p + h * dp, v + h * dv, q + h * dq, o + h * do, rotor_speeds)
    # RK4
    k1 = _ode_rhs(p, v, q, o, rotor_speeds, params)
    k2 = _ode_rhs(
        p + 0.5 * h * k1[0], v + 0.5 * h * k1[1], q + 0.5 * h * k1[2], o + 0.5 * h * k1[3], rotor_speeds, params
    )
    k3 = _ode_rhs(
        p + 0.5 * h * k2[0], v + 0.5 * h * k2[1], q + 0.5 * h * k2[2], o + 0.5 * h * k2[3], rotor_speeds, params
    )
    k4 = _ode_rhs(p + h * k3[0], v + h * k3[1], q + h * k3[2], o + h * k3[3], rotor_speeds, params)
    s = h / 6.0
    return QuadState(
        p + s * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        v + s * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        q + s * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        o + s * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
        rotor_speeds,
    )


def step(state: QuadState, rotor_speed_commands: np.ndarray, config: SimConfig, params: QuadParams) -> QuadState:
    """Advance every agent by one control step.

    Each of the `substeps` physics sub-steps first applies the exact
    exponential rotor lag toward the (clamped) commanded speeds, then
    integrates the rigid state with the new rotor speeds held constant,
    then renormalizes the quaternion.

    Raises NonFiniteState if any agent's state leaves the finite range.
    """
    lo, hi = params.rotor_speed_limits
    cmds = np.clip(np.atleast_2d(rotor_speed_commands), lo, hi)
    h = config.physics_dt
    cur = state
    for _ in range(config.substeps):
        rotors = rotor_lag(cur.rotor_speeds, cmds, h, params)
        cur = integrate_substep(cur, rotors, h, config.integrator, params)
        cur.orientation = qm.normalize(cur.orientation)
    vec = cur.as_vector()
    finite = np.isfinite(vec).all(axis=1)
    if not finite.all():
        raise NonFiniteState(cur, ~finite)
    return cur
