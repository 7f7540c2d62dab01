"""Command types and the cascaded flight controller.

Four command modes map to desired rotor speeds:

    SRT  per-rotor thrusts        -> speeds (thrust curve inverse)
    CTBR collective + body rates  -> rate P loop -> mixer -> speeds
    PS   position + yaw           -> velocity setpoint -> CTBR
    LV   linear velocity + yaw    -> acceleration -> attitude -> CTBR

All controllers are pure functions batched over agents, using explicit
elementwise arithmetic (bitwise batch-equivalent with single-agent calls).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quatmath as qm
from .params import ControllerGains, QuadParams

_ATTITUDE_EPS = 1e-8


@dataclass
class SRT:
    """Single-rotor thrust command, N per rotor. thrusts: (N, 4)."""

    thrusts: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.atleast_2d(np.asarray(self.thrusts, dtype=float))


@dataclass
class CTBR:
    """Mass-normalized collective thrust (m/s^2) and body rates (rad/s)."""

    collective: np.ndarray  # (N,)
    body_rates: np.ndarray  # (N, 3)

    def as_array(self) -> np.ndarray:
        c = np.atleast_1d(np.asarray(self.collective, dtype=float))
        r = np.atleast_2d(np.asarray(self.body_rates, dtype=float))
        return np.concatenate([c[:, None], r], axis=1)


@dataclass
class PS:
    """Position setpoint (m, world) plus yaw (rad)."""

    position: np.ndarray  # (N, 3)
    yaw: np.ndarray  # (N,)

    def as_array(self) -> np.ndarray:
        p = np.atleast_2d(np.asarray(self.position, dtype=float))
        y = np.atleast_1d(np.asarray(self.yaw, dtype=float))
        return np.concatenate([p, y[:, None]], axis=1)


@dataclass
class LV:
    """Linear velocity setpoint (m/s, world) plus yaw (rad)."""

    velocity: np.ndarray  # (N, 3)
    yaw: np.ndarray  # (N,)

    def as_array(self) -> np.ndarray:
        v = np.atleast_2d(np.asarray(self.velocity, dtype=float))
        y = np.atleast_1d(np.asarray(self.yaw, dtype=float))
        return np.concatenate([v, y[:, None]], axis=1)


Command = SRT | CTBR | PS | LV

COMMAND_TYPES = {"srt": SRT, "ctbr": CTBR, "ps": PS, "lv": LV}


def command_from_array(kind: str, arr: np.ndarray) -> Command:
    """Build a command batch from its flat array layout (inverse of as_array)."""
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    kind = kind.lower()
    if kind == "srt":
        return SRT(arr[:, 0:4])
    if kind == "ctbr":
        return CTBR(arr[:, 0], arr[:, 1:4])
    if kind == "ps":
        return PS(arr[:, 0:3], arr[:, 3])
    if kind == "lv":
        return LV(arr[:, 0:3], arr[:, 3])
    raise ValueError(f"unknown command kind {kind!r}")


@dataclass
class MixerResult:
    thrusts: np.ndarray  # (N, 4)
    saturated: np.ndarray  # (N,) bool


def mixer(collective_force: np.ndarray, torque_b: np.ndarray, params: QuadParams) -> MixerResult:
    """Allocate (collective force, body torque) to per-rotor thrusts.

    When the request is infeasible the collective is preserved (after
    clamping to the total-thrust range) and the torque vector is scaled
    down uniformly until every rotor fits its thrust limits.
    """
    force = np.atleast_1d(np.asarray(collective_force, dtype=float))
    torque = np.atleast_2d(np.asarray(torque_b, dtype=float))
    n = force.shape[0]
    f_lo, f_hi = params.thrust_limits
    minv = params.allocation_inverse  # (4, 4)

    force_cl = np.clip(force, 4.0 * f_lo, 4.0 * f_hi)
    # f = Minv @ [F, tau]; split into collective part and torque part
    base = np.empty((n, 4))
    tpart = np.empty((n, 4))
    for i in range(4):
        base[:, i] = minv[i, 0] * force_cl
        tpart[:, i] = minv[i, 1] * torque[:, 0] + minv[i, 2] * torque[:, 1] + minv[i, 3] * torque[:, 2]

    # max torque scale per rotor keeping f_lo <= base + s*tpart <= f_hi
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(tpart > 0.0, (f_hi - base) / tpart, np.inf)
        dn = np.where(tpart < 0.0, (f_lo - base) / tpart, np.inf)
    scale = np.minimum(np.minimum(up.min(axis=1), dn.min(axis=1)), 1.0)
    scale = np.maximum(scale, 0.0)
    thrusts = np.clip(base + scale[:, None] * tpart, f_lo, f_hi)
    saturated = (scale < 1.0) | (force != force_cl)
    return MixerResult(thrusts, saturated)


def srt_to_rotor_speeds(cmd: SRT, params: QuadParams) -> np.ndarray:
    thrusts = np.clip(cmd.as_array(), params.thrust_limits[0], params.thrust_limits[1])
    return params.speed_of_thrust(thrusts)


def ctbr_to_rotor_speeds(cmd: CTBR, state, gains: ControllerGains, params: QuadParams) -> np.ndarray:
    """Body-rate P controller with gyroscopic feedforward, then the mixer."""
    rates_des = np.atleast_2d(np.asarray(cmd.body_rates, dtype=float))
    collective = np.clip(np.atleast_1d(np.asarray(cmd.collective, dtype=float)), 0.0, None)
    omega = state.angvel_b
    j = params.inertia_diag
    err = rates_des - omega
    jo = j[None, :] * omega
    # Ω x JΩ feedforward, explicit cross product
    feed = np.stack(
        [
            omega[:, 1] * jo[:, 2] - omega[:, 2] * jo[:, 1],
            omega[:, 2] * jo[:, 0] - omega[:, 0] * jo[:, 2],
            omega[:, 0] * jo[:, 1] - omega[:, 1] * jo[:, 0],
        ],
        axis=1,
    )
    torque = j[None, :] * (gains.rate_p[None, :] * err) + feed
    force = params.mass * collective
    mixed = mixer(force, torque, params)
    return params.speed_of_thrust(mixed.thrusts)


def _accel_to_ctbr(a_des: np.ndarray, yaw: np.ndarray, state, gains: ControllerGains, params: QuadParams) -> CTBR:
    """Desired acceleration + yaw -> collective and body rates.

    The desired body z-axis is the unit specific-force direction
    (a_des - g); attitude error maps to body rates through attitude_p.
    Near free-fall commands the attitude is held (zero rates, zero
    collective).
    """
    n_agents = a_des.shape[0]
    spec = a_des - params.gravity[None, :]
    norm = np.sqrt(spec[:, 0] ** 2 + spec[:, 1] ** 2 + spec[:, 2] ** 2)
    degenerate = norm < _ATTITUDE_EPS
    safe = np.where(degenerate, 1.0, norm)
    z_des = spec / safe[:, None]

    cy, sy = np.cos(yaw), np.sin(yaw)
    # y_des = z_des x heading, guarded against gimbal-lock at +-90 deg pitch
    yx = z_des[:, 1] * 0.0 - z_des[:, 2] * sy
    yy = z_des[:, 2] * cy - z_des[:, 0] * 0.0
    yz = z_des[:, 0] * sy - z_des[:, 1] * cy
    ynorm = np.sqrt(yx**2 + yy**2 + yz**2)
    lock = ynorm < _ATTITUDE_EPS
    ysafe = np.where(lock, 1.0, ynorm)
    yx, yy, yz = yx / ysafe, yy / ysafe, yz / ysafe
    # x_des = y_des x z_des
    xx = yy * z_des[:, 2] - yz * z_des[:, 1]
    xy = yz * z_des[:, 0] - yx * z_des[:, 2]
    xz = yx * z_des[:, 1] - yy * z_des[:, 0]

    rot = qm.to_matrix(state.orientation)  # (N, 3, 3)
    r_des = np.empty((n_agents, 3, 3))
    r_des[:, :, 0] = np.stack([xx, xy, xz], axis=1)
    r_des[:, :, 1] = np.stack([yx, yy, yz], axis=1)
    r_des[:, :, 2] = z_des

    # e_R = 0.5 * vee(R_des^T R - R^T R_des), written out per component
    m = np.empty((n_agents, 3, 3))
    for a in range(3):
        for b in range(3):
            m[:, a, b] = (
                r_des[:, 0, a] * rot[:, 0, b]
                + r_des[:, 1, a] * rot[:, 1, b]
                + r_des[:, 2, a] * rot[:, 2, b]
            )
    e_r = 0.5 * np.stack([m[:, 2, 1] - m[:, 1, 2], m[:, 0, 2] - m[:, 2, 0], m[:, 1, 0] - m[:, 0, 1]], axis=1)
    rates = -gains.attitude_p[None, :] * e_r
    # collective: specific force projected onto the current body z-axis
    zb = rot[:, :, 2]
    coll = spec[:, 0] * zb[:, 0] + spec[:, 1] * zb[:, 1] + spec[:, 2] * zb[:, 2]
    coll = np.maximum(coll, 0.0)
    rates = np.where(degenerate[:, None], 0.0, rates)
    coll = np.where(degenerate, 0.0, coll)
    return CTBR(coll, rates)


def lv_to_ctbr(cmd: LV, state, gains: ControllerGains, params: QuadParams) -> CTBR:
    """Velocity P loop to desired acceleration, then attitude construction."""
    v_des = np.atleast_2d(np.asarray(cmd.velocity, dtype=float))
    yaw = np.atleast_1d(np.asarray(cmd.yaw, dtype=float))
    kp, _ = gains.velocity_pd
    a_des = kp[None, :] * (v_des - state.velocity_w)
    a_des = _clip_norm(a_des, gains.max_tilt_accel)
    return _accel_to_ctbr(a_des, yaw, state, gains, params)


def ps_to_ctbr(cmd: PS, state, gains: ControllerGains, params: QuadParams) -> CTBR:
    """Position PD to a speed-capped velocity setpoint, then the LV loop."""
    p_des = np.atleast_2d(np.asarray(cmd.position, dtype=float))
    yaw = np.atleast_1d(np.asarray(cmd.yaw, dtype=float))
    kp, kd = gains.position_pd
    v_des = kp[None, :] * (p_des - state.position_w) - kd[None, :] * state.velocity_w
    v_des = _clip_norm(v_des, gains.max_speed)
    return lv_to_ctbr(LV(v_des, yaw), state, gains, params)


def _clip_norm(vec: np.ndarray, cap: float) -> np.ndarray:
    n = np.sqrt(vec[:, 0] ** 2 + vec[:, 1] ** 2 + vec[:, 2] ** 2)
    scale = np.where(n > cap, cap / np.where(n == 0.0, 1.0, n), 1.0)
    return vec * scale[:, None]


def command_to_rotor_speeds(cmd: Command, state, gains: ControllerGains, params: QuadParams) -> np.ndarray:
    """Dispatch any command type to desired rotor speeds."""
    if isinstance(cmd, SRT):
        return srt_to_rotor_speeds(cmd, params)
    if isinstance(cmd, CTBR):
        return ctbr_to_rotor_speeds(cmd, state, gains, params)
    if isinstance(cmd, PS):
        return ctbr_to_rotor_speeds(ps_to_ctbr(cmd, state, gains, params), state, gains, params)
    if isinstance(cmd, LV):
        return ctbr_to_rotor_speeds(lv_to_ctbr(cmd, state, gains, params), state, gains, params)
    raise TypeError(f"unsupported command type {type(cmd).__name__}")
