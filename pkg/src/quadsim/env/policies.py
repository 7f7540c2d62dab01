"""Scripted baseline policies for the shipped tasks.

These are deliberately simple hand-written controllers used to exercise
the environments end to end and as the reference success baselines. The
navigation and gap policies read the simulator's nearest-obstacle vector
(privileged information); the landing policy works from the pad centroid
observation alone.
"""

from __future__ import annotations

import numpy as np

from .. import control as ctl
from ..geometry import nearest_point
from ..geometry.generate import PAD_TOP
from ..params import GRAVITY
from ..sensing import camera_pose_world
from .base import QuadEnvBase


class HoverPolicy:
    """Hold the spawn pose using the configured command type."""

    def __init__(self, env: QuadEnvBase):
        self.env = env
        self.anchor = None
        self.yaw = None

    def reset(self, observations):
        self.anchor = self.env.state.position_w.copy()
        self.yaw = np.zeros(self.env.num_agents)

    def __call__(self, observations, t: int) -> ctl.Command:
        n = self.env.num_agents
        kind = self.env.config.command_type
        if kind == "ctbr":
            return ctl.CTBR(np.full(n, GRAVITY), np.zeros((n, 3)))
        if kind == "srt":
            thrust = self.env.params.hover_thrust
            return ctl.SRT(np.full((n, 4), thrust))
        if kind == "ps":
            return ctl.PS(self.anchor.copy(), self.yaw.copy())
        return ctl.LV(np.zeros((n, 3)), self.yaw.copy())


class PotentialFieldPolicy:
    """Attractive target + repulsive nearest obstacle, with a tangential
    slide term to skirt around stones instead of stalling on them.

    The tangent side is sticky per agent: once a side is chosen it is kept
    until it clearly opposes goal progress, which avoids the flip-flop
    trap between symmetric obstacle pairs.
    """

    def __init__(self, env: QuadEnvBase, v_cruise=1.6, v_max=2.2, k_rep=1.6,
                 d_influence=1.2, k_tan=1.2, slow_radius=1.5):
        if env.config.command_type != "lv":
            raise ValueError("potential_field drives LV commands")
        self.env = env
        self.v_cruise = v_cruise
        self.v_max = v_max
        self.k_rep = k_rep
        self.d_influence = d_influence
        self.k_tan = k_tan
        self.slow_radius = slow_radius
        self._side = None

    def reset(self, observations):
        self._side = np.ones(self.env.num_agents)

    def __call__(self, observations, t: int) -> ctl.Command:
        env = self.env
        n = env.num_agents
        if self._side is None:
            self._side = np.ones(n)
        vel = np.zeros((n, 3))
        yaw = np.zeros(n)
        for i in range(n):
            p = env.state.position_w[i]
            target = observations[i]["target"]
            to_t = target - p
            dist = np.linalg.norm(to_t)
            dir_t = to_t / max(dist, 1e-9)
            v = self.v_cruise * min(1.0, dist / self.slow_radius) * dir_t

            away = p - env.nearest_pt[i]
            d = max(float(np.linalg.norm(away)), 1e-6)
            if d < self.d_influence:
                away_dir = away / d
                # near the goal the field must not stalemate against a
                # stone parked beside the target, so repulsion fades there
                fade = min(1.0, max(0.35, dist / 1.5))
                gain = self.k_rep * fade * (1.0 / d - 1.0 / self.d_influence)
                v = v + gain * away_dir
                # slide around the obstacle, keeping some goal progress
                tangent = np.cross(away_dir, np.array([0.0, 0.0, 1.0]))
                tn = np.linalg.norm(tangent)
                if tn > 1e-6:
                    tangent /= tn
                    align = np.dot(tangent, dir_t)
                    if align * self._side[i] < -0.15:
                        self._side[i] = -self._side[i]
                    v = v + self.k_tan * fade * (1.0 - d / self.d_influence) * self._side[i] * tangent
            speed = np.linalg.norm(v)
            cap = self.v_max
            if d < 0.9:
                cap = max(0.6, self.v_max * (d - 0.18) / 0.72)
            if speed > cap:
                v *= cap / speed
            vel[i] = v
            yaw[i] = np.arctan2(dir_t[1], dir_t[0])
        return ctl.LV(vel, yaw)


class DescendAndCenterPolicy:
    """Landing: center above the pad using its pixel centroid, descend
    with a speed profile that reaches touchdown below the success speed."""

    def __init__(self, env: QuadEnvBase, k_center=1.2, v_down_max=0.8, v_xy_max=1.0):
        if env.config.command_type != "lv":
            raise ValueError("land policy drives LV commands")
        self.env = env
        self.k_center = k_center
        self.v_down_max = v_down_max
        self.v_xy_max = v_xy_max
        spec = None
        for s, cam in env.sensor_cameras:
            if s.kind == "segmentation":
                spec, self.camera = s, cam
        if spec is None:
            raise ValueError("land policy needs the segmentation sensor")

    def reset(self, observations):
        pass

    def _pad_world(self, i: int, centroid) -> np.ndarray:
        """Project the pad centroid pixel to the pad plane."""
        cam = self.camera
        u, v = centroid
        x = (2.0 * (u + 0.5) / cam.width - 1.0) * cam.tan_half_h
        y = (2.0 * (v + 0.5) / cam.height - 1.0) * cam.tan_half_v
        d_cam = np.array([x, y, 1.0])
        d_cam /= np.linalg.norm(d_cam)
        origin, rot = camera_pose_world(
            self.env.state.position_w[i], self.env.state.orientation[i], cam
        )
        d_world = rot[0] @ d_cam
        if d_world[2] > -1e-6:
            return self.env.state.position_w[i][:2]
        t = (PAD_TOP - origin[0, 2]) / d_world[2]
        return (origin[0] + t * d_world)[:2]

    def __call__(self, observations, t: int) -> ctl.Command:
        env = self.env
        n = env.num_agents
        vel = np.zeros((n, 3))
        for i in range(n):
            p = env.state.position_w[i]
            centroid = observations[i]["target"]
            height = max(p[2] - PAD_TOP - env.config.collision_radius, 0.0)
            if centroid[0] < 0:
                vel[i] = np.array([0.0, 0.0, 0.6])  # pad lost: climb to widen the view
                continue
            pad_xy = self._pad_world(i, centroid)
            offset = pad_xy - p[:2]
            v_xy = self.k_center * offset
            s = np.linalg.norm(v_xy)
            if s > self.v_xy_max:
                v_xy *= self.v_xy_max / s
            centered = np.linalg.norm(offset) < max(0.08, 0.15 * height)
            if centered:
                v_down = min(self.v_down_max, 0.55 * height + 0.02)
            else:
                v_down = 0.0 if height < 1.0 else 0.2
            vel[i, 0:2] = v_xy
            vel[i, 2] = -v_down
        return ctl.LV(vel, np.zeros(n))


class TimeSlottedGapPolicy:
    """Cooperative gap crossing: agents pass the slot one at a time.

    Lanes are assigned by sorted spawn y so staging paths never cross, and
    staging sits behind the launch line, clear of the gate approach. An
    agent launches once every earlier agent in the passage order has
    cleared the far side (with a generous time fallback so one stuck agent
    cannot deadlock the others).
    """

    def __init__(self, env: QuadEnvBase, slot_steps=240, v_go=2.0, gate_x=1.2, stage_x=-4.2, clear_x=0.4):
        if env.config.command_type != "lv":
            raise ValueError("gap policy drives LV commands")
        self.env = env
        self.slot_steps = slot_steps
        self.v_go = v_go
        self.gate_x = gate_x
        self.stage_x = stage_x
        self.clear_x = clear_x
        self.order = None
        self.stage = None

    def reset(self, observations):
        env = self.env
        n = env.num_agents
        spawn_y = env.state.position_w[:, 1]
        # passage order: lowest lane first; lanes sorted so nobody crosses
        self.order = np.argsort(spawn_y, kind="stable")
        lanes = np.linspace(-2.4, 2.4, n) if n > 1 else np.zeros(1)
        self.stage = np.zeros((n, 3))
        for rank, agent in enumerate(self.order):
            self.stage[agent] = [self.stage_x, lanes[rank], 1.5]
        self.rank_of = np.empty(n, dtype=int)
        self.rank_of[self.order] = np.arange(n)
        self.launched = np.zeros(n, dtype=bool)

    def _cleared(self, i: int) -> bool:
        # leader just past the wall plane and receding: by the time the
        # follower reaches the gate the slot is free again
        return self.env.state.position_w[i, 0] > self.clear_x

    def __call__(self, observations, t: int) -> ctl.Command:
        env = self.env
        n = env.num_agents
        vel = np.zeros((n, 3))
        for i in range(n):
            p = env.state.position_w[i]
            target = observations[i]["target"]
            rank = self.rank_of[i]
            earlier = [int(a) for a in self.order[:rank]]
            clear = all(self._cleared(a) for a in earlier)
            may_launch = self.launched[i] or clear or t >= (rank + 1) * self.slot_steps
            if may_launch:
                self.launched[i] = True
            if not may_launch:
                goal, gain = self.stage[i], 1.2
            elif p[0] < -self.gate_x:
                goal, gain = np.array([-self.gate_x, 0.0, 1.5]), 1.2
            elif p[0] < self.gate_x:
                goal, gain = np.array([self.gate_x, 0.0, 1.5]), 1.2
            else:
                goal, gain = target, 1.2
            to_goal = goal - p
            dist = np.linalg.norm(to_goal)
            v = gain * to_goal
            s = np.linalg.norm(v)
            cap = self.v_go if dist > 0.8 else max(0.6, self.v_go * dist)
            if s > cap:
                v *= cap / s
            vel[i] = v
        return ctl.LV(vel, np.zeros(n))


class StraightLinePolicy:
    """Fly directly at the target (degenerate-geometry baseline)."""

    def __init__(self, env: QuadEnvBase, v_go=1.5):
        self.env = env
        self.v_go = v_go

    def reset(self, observations):
        pass

    def __call__(self, observations, t: int) -> ctl.Command:
        env = self.env
        n = env.num_agents
        vel = np.zeros((n, 3))
        for i in range(n):
            to_t = observations[i]["target"] - env.state.position_w[i]
            d = np.linalg.norm(to_t)
            vel[i] = to_t / max(d, 1e-9) * min(self.v_go, 1.5 * d)
        return ctl.LV(vel, np.zeros(n))


POLICIES = {
    "hover": HoverPolicy,
    "potential_field": PotentialFieldPolicy,
    "land": DescendAndCenterPolicy,
    "gap_slotted": TimeSlottedGapPolicy,
    "straight": StraightLinePolicy,
}


def make_policy(name: str, env: QuadEnvBase):
    try:
        cls = POLICIES[name]
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; choose from {sorted(POLICIES)}") from None
    return cls(env)
