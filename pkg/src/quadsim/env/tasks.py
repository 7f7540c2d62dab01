"""Task environments: navigation, landing, cooperative gap crossing.

Reward shapes follow the task definitions; weight magnitudes are
documented defaults living in task_params (the scripted-policy suites in
the tests freeze them).
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..geometry.generate import PAD_ID, PAD_TOP
from ..params import check_unknown
from .base import QuadEnvBase
from .config import EnvConfig, SceneSpec, SensorSpec


class FreeFlightEnv(QuadEnvBase):
    """Task-free environment: zero reward, no success condition."""

    ALLOWED_TASK_KEYS = set()

    def __init__(self, config, params=None, sim=None, gains=None):
        check_unknown(config.task_params, self.ALLOWED_TASK_KEYS, "env.task_params")
        super().__init__(config, params, sim, gains)


class NavigationEnv(QuadEnvBase):
    """Reach a target position through clutter without collisions."""

    ALLOWED_TASK_KEYS = {"target", "success_radius", "w_progress", "w_speed", "w_obstacle", "safe_distance"}

    def __init__(self, config, params=None, sim=None, gains=None):
        tp = config.task_params
        check_unknown(tp, self.ALLOWED_TASK_KEYS, "env.task_params")
        super().__init__(config, params, sim, gains)
        self.target = np.asarray(tp.get("target", [4.2, 0.0, 2.0]), dtype=float).reshape(3)
        self.success_radius = float(tp.get("success_radius", 0.5))
        self.w_progress = float(tp.get("w_progress", 10.0))
        self.w_speed = float(tp.get("w_speed", 0.02))
        self.w_obstacle = float(tp.get("w_obstacle", 0.5))
        self.safe_distance = float(tp.get("safe_distance", 1.0))

    def _dist(self, state) -> np.ndarray:
        d = state.position_w - self.target[None, :]
        return np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2 + d[:, 2] ** 2)

    def get_success(self):
        return self._dist(self.state) < self.success_radius

    def get_reward(self):
        progress = self._dist(self.prev_state) - self._dist(self.state)
        speed2 = (self.state.velocity_w**2).sum(axis=1)
        proximity = np.clip(1.0 - self.nearest_dist / self.safe_distance, 0.0, 1.0)
        return self.w_progress * progress - self.w_speed * speed2 - self.w_obstacle * proximity

    def get_observation(self):
        obs = super().get_observation()
        for entry in obs:
            entry["target"] = self.target.copy()
        return obs


class LandingEnv(QuadEnvBase):
    """Descend onto the pad: slow, low, and centered.

    The pad is located through its segmentation id in the down-looking
    camera; its pixel centroid is the `target` observation, with (-1, -1)
    when the pad is out of view. Height is the gap between the bottom of
    the collision sphere and the pad top, so a gentle touchdown reaches
    success strictly before it would count as a collision.
    """

    ALLOWED_TASK_KEYS = {"pad_center", "success_height", "success_speed", "w_height", "w_speed", "w_collision"}
    SENTINEL = np.array([-1.0, -1.0])

    def __init__(self, config, params=None, sim=None, gains=None):
        tp = config.task_params
        check_unknown(tp, self.ALLOWED_TASK_KEYS, "env.task_params")
        super().__init__(config, params, sim, gains)
        spec = config.scenes[0]
        self.pad_center = np.asarray(tp.get("pad_center", spec.pad_center), dtype=float).reshape(2)
        self.pad_half = float(spec.pad_size) / 2.0
        self.success_height = float(tp.get("success_height", 0.1))
        self.success_speed = float(tp.get("success_speed", 0.1))
        self.w_height = float(tp.get("w_height", 0.1))
        self.w_speed = float(tp.get("w_speed", 0.5))
        self.w_collision = float(tp.get("w_collision", 1.0))
        self._seg_sensor = None
        for spec_s, _cam in self.sensor_cameras:
            if spec_s.kind == "segmentation":
                self._seg_sensor = spec_s.name
        if self._seg_sensor is None:
            raise ConfigError("landing task needs a segmentation sensor")

    def height_above_pad(self) -> np.ndarray:
        h = self.state.position_w[:, 2] - PAD_TOP - self.config.collision_radius
        return np.maximum(h, 0.0)

    def get_success(self):
        height = self.height_above_pad()
        speed = np.linalg.norm(self.state.velocity_w, axis=1)
        off = np.abs(self.state.position_w[:, 0:2] - self.pad_center[None, :])
        centered = (off[:, 0] <= self.pad_half) & (off[:, 1] <= self.pad_half)
        return (height < self.success_height) & (speed < self.success_speed) & centered

    def get_reward(self):
        height = self.height_above_pad()
        speed2 = (self.state.velocity_w**2).sum(axis=1)
        return -self.w_height * height + self.w_speed * np.exp(-speed2) - self.w_collision * self.collision

    def get_observation(self):
        obs = super().get_observation()
        for i, entry in enumerate(obs):
            seg = self._seg_cache.get((i, self._seg_sensor))
            entry["target"] = _id_centroid(seg, PAD_ID)
        return obs


def _id_centroid(seg: np.ndarray, oid: int) -> np.ndarray:
    """Pixel centroid (col, row) of an object id, or the (-1, -1) sentinel."""
    if seg is None:
        return LandingEnv.SENTINEL.copy()
    rows, cols = np.nonzero(seg == oid)
    if len(rows) == 0:
        return LandingEnv.SENTINEL.copy()
    return np.array([cols.mean(), rows.mean()])


class GapCrossingEnv(QuadEnvBase):
    """Swarm task: fly through a shared narrow gap to per-agent targets."""

    ALLOWED_TASK_KEYS = {"targets", "success_radius", "w_progress", "w_obstacle", "safe_distance", "w_agent"}

    def __init__(self, config, params=None, sim=None, gains=None):
        tp = config.task_params
        check_unknown(tp, self.ALLOWED_TASK_KEYS, "env.task_params")
        if config.mode != "swarm":
            raise ConfigError("gap_crossing runs in swarm mode")
        super().__init__(config, params, sim, gains)
        default_targets = [[3.5, -1.5 + 1.5 * i, 1.5] for i in range(config.num_agents)]
        self.targets = np.asarray(tp.get("targets", default_targets), dtype=float).reshape(config.num_agents, 3)
        self.success_radius = float(tp.get("success_radius", 0.5))
        self.w_progress = float(tp.get("w_progress", 10.0))
        self.w_obstacle = float(tp.get("w_obstacle", 0.5))
        self.w_agent = float(tp.get("w_agent", 0.5))
        self.safe_distance = float(tp.get("safe_distance", 0.8))

    def _dist(self, state) -> np.ndarray:
        d = state.position_w - self.targets
        return np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2 + d[:, 2] ** 2)

    def get_success(self):
        return self._dist(self.state) < self.success_radius

    def get_reward(self):
        progress = self._dist(self.prev_state) - self._dist(self.state)
        proximity = np.clip(1.0 - self.nearest_dist / self.safe_distance, 0.0, 1.0)
        reward = self.w_progress * progress - self.w_obstacle * proximity
        if self.num_agents > 1:
            pos = self.state.position_w
            for i in range(self.num_agents):
                dmin = min(
                    np.linalg.norm(pos[i] - pos[j]) for j in range(self.num_agents) if j != i
                )
                reward[i] -= self.w_agent * max(0.0, 1.0 - dmin / self.safe_distance)
        return reward

    def get_observation(self):
        obs = super().get_observation()
        for i, entry in enumerate(obs):
            entry["target"] = self.targets[i].copy()
        return obs


TASKS = {
    "free": FreeFlightEnv,
    "navigation": NavigationEnv,
    "landing": LandingEnv,
    "gap_crossing": GapCrossingEnv,
}


def make_env(config: EnvConfig, params=None, sim=None, gains=None) -> QuadEnvBase:
    """Instantiate the task environment selected by config.task."""
    return TASKS[config.task](config, params, sim, gains)


def navigation_config(scene_seed: int = 0, num_agents: int = 1, density: float = 0.15, with_vision: bool = True) -> EnvConfig:
    """Canonical navigation setup: cluttered 10x10x4 room, west-to-east."""
    from .config import DistSpec, InitRandomization

    sensors = (SensorSpec(kind="depth", name="depth", width=64, height=64),) if with_vision else ()
    return EnvConfig(
        num_agents=num_agents,
        task="navigation",
        command_type="lv",
        episode_max_steps=768,
        scenes=(SceneSpec(kind="cluttered", seed=scene_seed, density=density,
                          volume_lo=[-5, -5, 0], volume_hi=[5, 5, 4]),),
        randomization=InitRandomization(
            position=DistSpec("uniform", low=[-4.4, -2.5, 1.2], high=[-3.8, 2.5, 2.8]),
        ),
        min_spawn_clearance=0.4,
        sensors=sensors,
        task_params={"target": [4.2, 0.0, 2.0]},
    )


def landing_config(num_agents: int = 1) -> EnvConfig:
    from .config import DistSpec, InitRandomization

    return EnvConfig(
        num_agents=num_agents,
        task="landing",
        command_type="lv",
        episode_max_steps=512,
        scenes=(SceneSpec(kind="landing"),),
        randomization=InitRandomization(
            position=DistSpec("uniform", low=[-0.8, -0.8, 2.0], high=[0.8, 0.8, 3.0]),
        ),
        min_spawn_clearance=0.3,
        sensors=(SensorSpec(kind="segmentation", name="vision", width=64, height=64, orientation="down"),),
    )


def gap_crossing_config(gap_width: float = 1.0, num_agents: int = 3) -> EnvConfig:
    from .config import DistSpec, InitRandomization

    return EnvConfig(
        num_agents=num_agents,
        mode="swarm",
        task="gap_crossing",
        command_type="lv",
        episode_max_steps=1024,
        scenes=(SceneSpec(kind="gap", gap_width=gap_width),),
        randomization=InitRandomization(
            position=DistSpec("uniform", low=[-4.0, -2.2, 1.2], high=[-3.0, 2.2, 1.8]),
        ),
        min_spawn_clearance=0.3,
        sensors=(SensorSpec(kind="depth", name="depth", width=64, height=64),),
    )
