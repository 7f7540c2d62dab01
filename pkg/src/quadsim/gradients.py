"""Analytic Jacobians of the discrete control step and rollout gradients.

The Jacobians differentiate exactly the map computed by dynamics.step():
per sub-step, the exponential rotor lag (clamps treated as identity strictly
inside the speed limits, zero outside, flagged on the boundary), the chosen
integrator's stage composition, and the quaternion renormalization.

Public matrices use the 13-dim rigid state ordering (position, velocity,
quaternion, angular velocity). Internally a 17-dim state (rigid + rotor
speeds) is carried so that rotor-lag memory across steps is differentiated;
rollout gradients would be wrong without it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quatmath as qm
from .dynamics import QuadState, _ode_rhs, integrate_substep, rotor_lag
from .params import Integrator, QuadParams, SimConfig

_I13 = np.eye(13)


@dataclass
class StepJacobian:
    """Derivatives of one control step at a given (state, action)."""

    d_next_d_state: np.ndarray  # (13, 13)
    d_next_d_action: np.ndarray  # (13, 4)
    saturation_boundary: bool
    full_state_jacobian: np.ndarray  # (17, 17), includes rotor-speed memory
    full_action_jacobian: np.ndarray  # (17, 4)
    next_state: QuadState


@dataclass
class RolloutTape:
    """Saved forward pass of a rollout: states and per-step Jacobians."""

    states: np.ndarray  # (T+1, 17)
    state_jacobians: list = field(default_factory=list)  # T x (17, 17)
    action_jacobians: list = field(default_factory=list)  # T x (17, 4)
    saturation_boundary: bool = False

    def __len__(self):
        return len(self.state_jacobians)


def _dynamics_jacobian(vel, quat, angvel, rotor_speeds, params):
    """Jacobian of the continuous rigid dynamics at one sample.

    Returns (A, B): A = d(rigid rate)/d(rigid state) (13x13),
    B = d(rigid rate)/d(rotor speeds) (13x4).
    """
    m = params.mass
    k2, k1, _ = params.thrust_coeffs
    rot = qm.to_matrix(quat)
    f = params.thrust_of_speed(rotor_speeds)
    v_b = qm.rotate_inv(quat[None, :], vel[None, :])[0]
    c = 0.5 * params.air_density * params.drag_coeffs * params.cross_area
    drag = -c * v_b * np.abs(v_b)
    force_b = drag.copy()
    force_b[2] += f.sum()
    dd = np.diag(-2.0 * c * np.abs(v_b))

    A = np.zeros((13, 13))
    A[0:3, 3:6] = np.eye(3)
    # velocity row: (1/m) R (f_th + d(R^T v)) + g
    A[3:6, 3:6] = (rot @ dd @ rot.T) / m
    A[3:6, 6:10] = (qm.rotate_jacobian_q(quat, force_b) + rot @ dd @ qm.rotate_inv_jacobian_q(quat, vel)) / m
    # quaternion row: 0.5 q ⊗ (0, Ω)
    A[6:10, 6:10] = 0.5 * qm.right_matrix(np.concatenate([[0.0], angvel]))
    A[6:10, 10:13] = 0.5 * qm.left_matrix(quat)[:, 1:4]
    # body-rate row: J^-1 (tau - Ω x JΩ)
    j = params.inertia_diag
    jw = j * angvel
    A[10:13, 10:13] = (qm.skew(jw) - qm.skew(angvel) @ np.diag(j)) / j[:, None]

    B = np.zeros((13, 4))
    df = 2.0 * k2 * rotor_speeds + k1  # d thrust / d speed per rotor
    B[3:6, :] = rot[:, 2][:, None] * df[None, :] / m
    B[10:13, :] = (params.torque_arms.T / j[:, None]) * df[None, :]
    return A, B


def _pack(state: QuadState):
    v = state.as_vector()[0]
    return v[0:3], v[3:6], v[6:10], v[10:13]


def _rhs13(y, rotors, params):
    dp, dv, dq, do = _ode_rhs(y[None, 0:3], y[None, 3:6], y[None, 6:10], y[None, 10:13], rotors[None, :], params)
    return np.concatenate([dp[0], dv[0], dq[0], do[0]])


def _jac_at(y, rotors, params):
    return _dynamics_jacobian(y[3:6], y[6:10], y[10:13], rotors, params)


def _integrator_jacobian(y, rotors, h, integrator, params):
    """(Dy, Dw) of the raw sub-step map for one sample (no renormalization)."""
    if integrator is Integrator.EULER:
        A, B = _jac_at(y, rotors, params)
        return _I13 + h * A, h * B
    k1 = _rhs13(y, rotors, params)
    y2 = y + 0.5 * h * k1
    k2 = _rhs13(y2, rotors, params)
    y3 = y + 0.5 * h * k2
    k3 = _rhs13(y3, rotors, params)
    y4 = y + h * k3
    A1, B1 = _jac_at(y, rotors, params)
    A2, B2 = _jac_at(y2, rotors, params)
    A3, B3 = _jac_at(y3, rotors, params)
    A4, B4 = _jac_at(y4, rotors, params)
    K1, L1 = A1, B1
    K2 = A2 @ (_I13 + 0.5 * h * K1)
    L2 = A2 @ (0.5 * h * L1) + B2
    K3 = A3 @ (_I13 + 0.5 * h * K2)
    L3 = A3 @ (0.5 * h * L2) + B3
    K4 = A4 @ (_I13 + h * K3)
    L4 = A4 @ (h * L3) + B4
    Dy = _I13 + (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)
    Dw = (h / 6.0) * (L1 + 2.0 * L2 + 2.0 * L3 + L4)
    return Dy, Dw


def _renorm_jacobian(q_raw):
    n = np.linalg.norm(q_raw)
    unit = q_raw / n
    return (np.eye(4) - np.outer(unit, unit)) / n


def _clip_mask(values, lo, hi):
    """Derivative mask of clip(): 1 strictly inside, 0 outside, boundary flagged."""
    inside = (values > lo) & (values < hi)
    boundary = (values == lo) | (values == hi)
    mask = inside.astype(float)
    mask[boundary] = 1.0
    return mask, bool(boundary.any())


def step_jacobian(state: QuadState, action: np.ndarray, config: SimConfig, params: QuadParams) -> StepJacobian:
    """Exact Jacobians of dynamics.step() for a single agent.

    `action` holds the four desired rotor speeds. The forward trajectory is
    recomputed with the very same arithmetic as step(), so next_state is
    bitwise identical to the plain step() result.
    """
    if state.batch_size != 1:
        raise ValueError("step_jacobian operates on a single-agent state")
    action = np.asarray(action, dtype=float).reshape(4)
    lo, hi = params.rotor_speed_limits
    cmd_mask, flagged = _clip_mask(action, lo, hi)
    cmds = np.clip(action, lo, hi)

    h = config.physics_dt
    alpha = np.exp(-params.motor_decay * h)
    J = np.eye(17)
    Ja = np.zeros((17, 4))
    cur = state.copy()
    for _ in range(config.substeps):
        raw = cmds + (cur.rotor_speeds[0] - cmds) * alpha
        lag_mask, f2 = _clip_mask(raw, lo, hi)
        flagged = flagged or f2
        rotors = np.clip(raw, lo, hi)

        y = np.concatenate(_pack(cur))
        Dy, Dw = _integrator_jacobian(y, rotors, h, config.integrator, params)
        nxt = integrate_substep(cur, rotors[None, :], h, config.integrator, params)
        P = _renorm_jacobian(nxt.orientation[0])
        Dy[6:10, :] = P @ Dy[6:10, :]
        Dw[6:10, :] = P @ Dw[6:10, :]

        A = np.zeros((17, 17))
        A[0:13, 0:13] = Dy
        A[0:13, 13:17] = Dw * (alpha * lag_mask)[None, :]
        A[13:17, 13:17] = np.diag(alpha * lag_mask)
        B = np.zeros((17, 4))
        B[0:13, :] = Dw * ((1.0 - alpha) * lag_mask)[None, :]
        B[13:17, :] = np.diag((1.0 - alpha) * lag_mask)

        J = A @ J
        Ja = A @ Ja + B
        nxt.orientation = qm.normalize(nxt.orientation)
        cur = nxt
    Ja = Ja * cmd_mask[None, :]
    return StepJacobian(
        d_next_d_state=J[0:13, 0:13],
        d_next_d_action=Ja[0:13, :],
        saturation_boundary=flagged,
        full_state_jacobian=J,
        full_action_jacobian=Ja,
        next_state=cur,
    )


def rollout(initial_state: QuadState, actions: np.ndarray, config: SimConfig, params: QuadParams) -> RolloutTape:
    """Run a single-agent rollout, saving per-step Jacobians for reverse mode."""
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    t_steps = actions.shape[0]
    states = np.empty((t_steps + 1, 17))
    states[0] = initial_state.as_vector()[0]
    tape = RolloutTape(states=states)
    cur = initial_state
    for t in range(t_steps):
        sj = step_jacobian(cur, actions[t], config, params)
        tape.state_jacobians.append(sj.full_state_jacobian)
        tape.action_jacobians.append(sj.full_action_jacobian)
        tape.saturation_boundary = tape.saturation_boundary or sj.saturation_boundary
        cur = sj.next_state
        states[t + 1] = cur.as_vector()[0]
    return tape


def rollout_grad(initial_state: QuadState, actions: np.ndarray, loss, config: SimConfig, params: QuadParams):
    """Reverse-accumulated gradients of a scalar rollout loss.

    `loss` is called with the (T+1, 17) trajectory and must return
    (value, d value / d trajectory) with the gradient of the same shape.
    Returns (grad_actions (T, 4), grad_initial_state (17,), tape).
    """
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    tape = rollout(initial_state, actions, config, params)
    _, g_traj = loss(tape.states)
    g_traj = np.asarray(g_traj, dtype=float)
    if g_traj.shape != tape.states.shape:
        raise ValueError(f"loss gradient shape {g_traj.shape} != trajectory shape {tape.states.shape}")
    t_steps = len(tape)
    grad_actions = np.zeros((t_steps, 4))
    lam = g_traj[t_steps].copy()
    for t in range(t_steps - 1, -1, -1):
        grad_actions[t] = tape.action_jacobians[t].T @ lam
        lam = tape.state_jacobians[t].T @ lam + g_traj[t]
    return grad_actions, lam, tape
