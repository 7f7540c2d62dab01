"""Gym-shaped batched environment base.

Tasks subclass QuadEnvBase and override three hooks, evaluated for every
live agent at every step:

    get_reward()      -> (N,) float
    get_observation() -> list of per-agent observation dicts
    get_success()     -> (N,) bool

Parallel mode steps agents independently (no inter-agent collisions, no
other drones in renders); swarm mode binds all agents to one scene, adds
sphere-sphere inter-agent collision and exposes other agents' states.

Determinism: agent i draws every sample (spawn, sensor noise, respawn)
from its own generator seeded with reset_seed + i, so a single-agent run
with that seed reproduces agent i's trajectory bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import control as ctl
from .. import dynamics as dyn
from .. import quatmath as qm
from ..errors import ActionShapeMismatch, NonFiniteState, NotReset, SpawnFailure
from ..geometry import nearest_point
from ..params import ControllerGains, QuadParams, SimConfig
from ..sensing import apply_noise, body_wrench, imu_read, render_frames
from .config import EnvConfig

DRONE_ID0 = 60000  # segmentation ids of rendered swarm agents


@dataclass
class StepResult:
    observations: list
    reward: np.ndarray
    terminated: np.ndarray
    truncated: np.ndarray
    info: list


class QuadEnvBase:
    """Batched quadrotor environment; see module docstring."""

    def __init__(
        self,
        config: EnvConfig,
        params: QuadParams = None,
        sim: SimConfig = None,
        gains: ControllerGains = None,
    ):
        self.config = config
        self.params = params if params is not None else QuadParams()
        self.sim = sim if sim is not None else SimConfig()
        self.gains = gains if gains is not None else ControllerGains()
        self.num_agents = config.num_agents
        self.scenes = [spec.materialize() for spec in config.scenes]
        self.sensor_cameras = [(s, s.camera() if s.kind != "imu" else None) for s in config.sensors]
        self.state: dyn.QuadState = None
        self.prev_state: dyn.QuadState = None
        self._rngs = None
        self._scene_perm = None
        self._reset_counts = None
        self.agent_scene = np.zeros(self.num_agents, dtype=int)
        self.step_counts = np.zeros(self.num_agents, dtype=int)
        self._needs_respawn = np.zeros(self.num_agents, dtype=bool)
        self.nearest_dist = np.full(self.num_agents, np.inf)
        self.nearest_pt = np.zeros((self.num_agents, 3))
        self.collision = np.zeros(self.num_agents, dtype=bool)
        self.out_of_bounds = np.zeros(self.num_agents, dtype=bool)
        self.nonfinite = np.zeros(self.num_agents, dtype=bool)
        self._scene_bounds = [sc.bounds.inflate(config.bounds_margin) for sc in self.scenes]
        self._seg_cache = {}  # (agent, sensor name) -> last clean id image

    # ------------------------------------------------------------------
    # hooks (Lst-1 style); the base env is the task-free default

    def get_reward(self) -> np.ndarray:
        return np.zeros(self.num_agents)

    def get_success(self) -> np.ndarray:
        return np.zeros(self.num_agents, dtype=bool)

    # get_observation (below) is the third hook; the base implementation
    # already assembles state + sensors + swarm, tasks extend its dicts.

    # ------------------------------------------------------------------

    def reset(self, seed: int = 0) -> list:
        """Sample fresh initial states for every agent; deterministic per seed."""
        self._rngs = [np.random.default_rng(int(seed) + i) for i in range(self.num_agents)]
        n_scenes = len(self.scenes)
        if self.config.scene_sampling == "shuffled":
            self._scene_perm = np.random.default_rng(int(seed)).permutation(n_scenes)
        else:
            self._scene_perm = np.arange(n_scenes)
        self._reset_counts = np.zeros(self.num_agents, dtype=int)
        self.state = dyn.QuadState.hover(self.num_agents, self.params)
        for i in range(self.num_agents):
            self._spawn_agent(i)
        self.prev_state = self.state.copy()
        self.step_counts[:] = 0
        self._needs_respawn[:] = False
        self.collision[:] = False
        self.out_of_bounds[:] = False
        self.nonfinite[:] = False
        self._refresh_proximity()
        return self.get_observation()

    def _spawn_agent(self, i: int):
        """Rejection-sample a clear spawn for agent i and install it."""
        if self.config.mode == "swarm":
            self.agent_scene[i] = 0
        else:
            self.agent_scene[i] = self._scene_perm[(i + self._reset_counts[i]) % len(self.scenes)]
        self._reset_counts[i] += 1
        rng = self._rngs[i]
        rand = self.config.randomization
        scene = self.scenes[self.agent_scene[i]]
        clearance = self.config.min_spawn_clearance
        position = None
        for _ in range(1000):
            candidate = rand.position.sample(rng)
            if nearest_point(scene, candidate).distance < clearance:
                continue
            if self.config.mode == "swarm" and not self._swarm_spawn_clear(i, candidate):
                continue
            position = candidate
            break
        if position is None:
            raise SpawnFailure(
                f"agent {i}: no spawn with clearance >= {clearance} in 1000 attempts"
            )
        velocity = rand.velocity.sample(rng)
        rpy = rand.orientation.sample(rng)
        quat = _quat_from_rpy(rpy)
        angvel = rand.angvel.sample(rng)
        self.state.position_w[i] = position
        self.state.velocity_w[i] = velocity
        self.state.orientation[i] = quat
        self.state.angvel_b[i] = angvel
        self.state.rotor_speeds[i] = self.params.hover_speed
        self.step_counts[i] = 0

    def _swarm_spawn_clear(self, i: int, candidate) -> bool:
        min_sep = 2.0 * self.config.collision_radius + 0.1
        for j in range(i):
            if np.linalg.norm(self.state.position_w[j] - candidate) < min_sep:
                return False
        return True

    def step(self, action: ctl.Command) -> StepResult:
        """Advance one control step; see the base-class docstring for modes."""
        if self.state is None or self._rngs is None:
            raise NotReset("call reset() before step()")
        expected = ctl.COMMAND_TYPES[self.config.command_type]
        if not isinstance(action, expected):
            raise ActionShapeMismatch(
                f"expected {expected.__name__} commands (config command_type="
                f"{self.config.command_type!r}), got {type(action).__name__}"
            )
        batch = action.as_array().shape[0]
        if batch != self.num_agents:
            raise ActionShapeMismatch(f"action batch {batch} != num_agents {self.num_agents}")

        if self.config.auto_reset and self._needs_respawn.any():
            for i in np.nonzero(self._needs_respawn)[0]:
                self._spawn_agent(int(i))
            self._needs_respawn[:] = False

        self.prev_state = self.state.copy()
        rotor_cmds = ctl.command_to_rotor_speeds(action, self.state, self.gains, self.params)
        self.nonfinite[:] = False
        try:
            self.state = dyn.step(self.state, rotor_cmds, self.sim, self.params)
        except NonFiniteState as exc:
            self.state = exc.state
            self.nonfinite = exc.mask.copy()
            # freeze blown-up agents at their previous state so hooks stay finite
            for i in np.nonzero(self.nonfinite)[0]:
                self.state.set_agent(int(i), self.prev_state, int(i))
        self.step_counts += 1

        self._refresh_proximity()
        success = np.asarray(self.get_success(), dtype=bool)
        reward = np.asarray(self.get_reward(), dtype=float)
        observations = self.get_observation()

        terminated = success | self.collision | self.out_of_bounds | self.nonfinite
        truncated = ~terminated & (self.step_counts >= self.config.episode_max_steps)
        info = []
        for i in range(self.num_agents):
            info.append(
                {
                    "success": bool(success[i]),
                    "collision": bool(self.collision[i]),
                    "out_of_bounds": bool(self.out_of_bounds[i]),
                    "nonfinite": bool(self.nonfinite[i]),
                    "nearest_distance": float(self.nearest_dist[i]),
                    "scene": int(self.agent_scene[i]),
                    "step": int(self.step_counts[i]),
                }
            )
        done = terminated | truncated
        self._needs_respawn = done.copy()
        return StepResult(observations, reward, terminated, truncated, info)

    # ------------------------------------------------------------------

    def _refresh_proximity(self):
        """Nearest-obstacle distance, collision and bounds flags per agent."""
        radius = self.config.collision_radius
        for i in range(self.num_agents):
            res = nearest_point(self.scenes[self.agent_scene[i]], self.state.position_w[i])
            self.nearest_dist[i] = res.distance
            self.nearest_pt[i] = res.point
            self.collision[i] = res.distance < radius
            self.out_of_bounds[i] = not self._scene_bounds[self.agent_scene[i]].contains(
                self.state.position_w[i]
            )
        if self.config.mode == "swarm" and self.num_agents > 1:
            pos = self.state.position_w
            for i in range(self.num_agents):
                for j in range(i + 1, self.num_agents):
                    d = np.linalg.norm(pos[i] - pos[j])
                    if d < 2.0 * radius:
                        self.collision[i] = True
                        self.collision[j] = True

    def state_vector(self, i: int) -> np.ndarray:
        """13-component rigid state of agent i."""
        return np.concatenate(
            [
                self.state.position_w[i],
                self.state.velocity_w[i],
                self.state.orientation[i],
                self.state.angvel_b[i],
            ]
        )

    def _swarm_spheres(self, for_agent: int):
        """Other agents as render spheres (swarm mode only)."""
        others = [j for j in range(self.num_agents) if j != for_agent]
        spheres = np.empty((len(others), 4))
        ids = np.empty(len(others), dtype=np.int64)
        for k, j in enumerate(others):
            spheres[k, 0:3] = self.state.position_w[j]
            spheres[k, 3] = self.config.collision_radius
            ids[k] = DRONE_ID0 + j
        return spheres, ids

    def _render_all(self, spec, camera) -> tuple:
        """Render one camera for every agent in as few kernel calls as
        possible (one per scene group)."""
        n = self.num_agents
        depth = np.empty((n, camera.height, camera.width))
        seg = np.empty((n, camera.height, camera.width), dtype=np.int64)
        for scene_idx in np.unique(self.agent_scene[:n]):
            members = np.nonzero(self.agent_scene == scene_idx)[0]
            scene = self.scenes[scene_idx]
            pos = self.state.position_w[members]
            quat = self.state.orientation[members]
            if self.config.mode == "swarm" and n > 1:
                spheres = np.empty((len(members), n - 1, 4))
                ids = np.empty((len(members), n - 1), dtype=np.int64)
                for k, agent in enumerate(members):
                    spheres[k], ids[k] = self._swarm_spheres(int(agent))
                d, s = render_frames(scene, pos, quat, camera, spheres, ids)
            else:
                d, s = render_frames(scene, pos, quat, camera)
            depth[members] = d
            seg[members] = s
        return depth, seg

    def render_sensor(self, spec, camera, agent: int):
        """Render one camera for one agent and apply its noise chain."""
        depth, seg = self._render_all(spec, camera)
        img = depth[agent] if spec.kind == "depth" else seg[agent].astype(float)
        for noise in spec.noise:
            img = apply_noise(img, noise, self._rngs[agent], sensor=spec.kind)
        return img, seg[agent]

    def get_observation(self) -> list:
        obs = [{"state": self.state_vector(i)} for i in range(self.num_agents)]
        for spec, camera in self.sensor_cameras:
            if spec.kind == "imu":
                wrench = body_wrench(self.state, self.params)
                reading = imu_read(self.state, wrench, self.params)
                for i in range(self.num_agents):
                    sample = np.concatenate([reading.specific_force_b[i], reading.angvel_b[i]])
                    for noise in spec.noise:
                        sample = apply_noise(sample, noise, self._rngs[i], sensor="imu")
                    obs[i][spec.name] = sample
            else:
                depth, seg = self._render_all(spec, camera)
                for i in range(self.num_agents):
                    img = depth[i] if spec.kind == "depth" else seg[i].astype(float)
                    for noise in spec.noise:
                        img = apply_noise(img, noise, self._rngs[i], sensor=spec.kind)
                    self._seg_cache[(i, spec.name)] = seg[i]
                    obs[i][spec.name] = img
        if self.config.mode == "swarm" and self.num_agents > 1:
            for i in range(self.num_agents):
                others = [j for j in range(self.num_agents) if j != i]
                obs[i]["swarm"] = np.stack([self.state_vector(j) for j in others])
        return obs


def _quat_from_rpy(rpy) -> np.ndarray:
    """Intrinsic roll-pitch-yaw to quaternion."""
    roll, pitch, yaw = rpy
    qx = qm.from_axis_angle([1.0, 0.0, 0.0], roll)
    qy = qm.from_axis_angle([0.0, 1.0, 0.0], pitch)
    qz = qm.from_axis_angle([0.0, 0.0, 1.0], yaw)
    return qm.multiply(qz, qm.multiply(qy, qx))
