"""Environment configuration: dataclasses plus strict TOML loading.

One TOML file can carry [quad], [sim], [gains] (vehicle parameters, see
params.py) and [env] (this module). Unknown keys anywhere are a hard
error; cmd_validate surfaces them with their full path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..geometry import AABB, Scene, gap_scene, garage_scene, generate_cluttered_scene, landing_scene, load_mesh_scene
from ..params import check_unknown, read_toml
from ..sensing import DOWNWARD, FORWARD, CameraModel, NoiseSpec


@dataclass(frozen=True)
class DistSpec:
    """Per-quantity initial-condition distribution (componentwise)."""

    kind: str = "fixed"  # fixed | uniform | normal
    value: np.ndarray = field(default_factory=lambda: np.zeros(3))
    low: np.ndarray = field(default_factory=lambda: np.zeros(3))
    high: np.ndarray = field(default_factory=lambda: np.zeros(3))
    mean: np.ndarray = field(default_factory=lambda: np.zeros(3))
    sigma: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("value", "low", "high", "mean", "sigma"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(3))
        if self.kind not in ("fixed", "uniform", "normal"):
            raise ConfigError(f"distribution kind must be fixed|uniform|normal, got {self.kind!r}")
        if self.kind == "uniform" and np.any(self.low > self.high):
            raise ConfigError("uniform distribution needs low <= high")
        if np.any(self.sigma < 0):
            raise ConfigError("sigma must be nonnegative")

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "fixed":
            return self.value.copy()
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high)
        return self.mean + self.sigma * rng.standard_normal(3)


_DIST_KEYS = {"kind", "value", "low", "high", "mean", "sigma"}


def _dist_from_table(table: dict, where: str) -> DistSpec:
    check_unknown(table, _DIST_KEYS, where)
    return DistSpec(**table)


@dataclass(frozen=True)
class InitRandomization:
    position: DistSpec = field(default_factory=lambda: DistSpec("fixed", value=[0.0, 0.0, 1.5]))
    velocity: DistSpec = field(default_factory=DistSpec)
    orientation: DistSpec = field(default_factory=DistSpec)  # roll/pitch/yaw radians
    angvel: DistSpec = field(default_factory=DistSpec)


_RAND_KEYS = {"position", "velocity", "orientation", "angvel"}


def _randomization_from_table(table: dict) -> InitRandomization:
    check_unknown(table, _RAND_KEYS, "env.randomization")
    kwargs = {}
    for key in _RAND_KEYS:
        if key in table:
            kwargs[key] = _dist_from_table(table[key], f"env.randomization.{key}")
    return InitRandomization(**kwargs)


@dataclass(frozen=True)
class SceneSpec:
    """Declarative scene source; materialize() builds the Scene."""

    kind: str = "garage"  # garage | cluttered | landing | gap | mesh
    seed: int = 0
    density: float = 0.15
    size_range: tuple = (0.1, 0.3)
    volume_lo: np.ndarray = field(default_factory=lambda: np.array([-5.0, -5.0, 0.0]))
    volume_hi: np.ndarray = field(default_factory=lambda: np.array([5.0, 5.0, 4.0]))
    path: str = ""
    gap_width: float = 1.0
    pad_center: tuple = (0.0, 0.0)
    pad_size: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "volume_lo", np.asarray(self.volume_lo, dtype=float).reshape(3))
        object.__setattr__(self, "volume_hi", np.asarray(self.volume_hi, dtype=float).reshape(3))
        if self.kind not in ("garage", "cluttered", "landing", "gap", "mesh"):
            raise ConfigError(f"unknown scene kind {self.kind!r}")
        if self.kind == "mesh" and not self.path:
            raise ConfigError("mesh scene needs a path")

    @property
    def volume(self) -> AABB:
        return AABB(self.volume_lo, self.volume_hi)

    def materialize(self) -> Scene:
        if self.kind == "garage":
            return garage_scene(self.volume)
        if self.kind == "cluttered":
            return generate_cluttered_scene(self.seed, self.volume, self.density, self.size_range)
        if self.kind == "landing":
            return landing_scene(self.pad_center, self.pad_size, self.volume)
        if self.kind == "gap":
            return gap_scene(self.gap_width, 0.0, self.volume)
        return load_mesh_scene(self.path)


_SCENE_KEYS = {
    "kind", "seed", "density", "size_range", "volume_lo", "volume_hi",
    "path", "gap_width", "pad_center", "pad_size",
}


def _scene_from_table(table: dict, idx: int) -> SceneSpec:
    check_unknown(table, _SCENE_KEYS, f"env.scenes[{idx}]")
    kwargs = dict(table)
    if "size_range" in kwargs:
        kwargs["size_range"] = tuple(kwargs["size_range"])
    if "pad_center" in kwargs:
        kwargs["pad_center"] = tuple(kwargs["pad_center"])
    return SceneSpec(**kwargs)


@dataclass(frozen=True)
class SensorSpec:
    """A camera (depth/segmentation) or IMU attachment with optional noise."""

    kind: str = "depth"  # depth | segmentation | imu
    name: str = ""  # observation key; defaults to kind
    width: int = 64
    height: int = 64
    vertical_fov: float = np.pi / 2
    orientation: str = "forward"  # forward | down
    translation: tuple = (0.0, 0.0, 0.0)
    max_range: float = 10.0
    noise: tuple = ()  # NoiseSpec instances applied in order

    def __post_init__(self):
        if self.kind not in ("depth", "segmentation", "imu"):
            raise ConfigError(f"unknown sensor kind {self.kind!r}")
        if self.orientation not in ("forward", "down"):
            raise ConfigError("sensor orientation must be forward|down")
        if not self.name:
            object.__setattr__(self, "name", self.kind)
        object.__setattr__(self, "noise", tuple(self.noise))

    def camera(self) -> CameraModel:
        rot = FORWARD if self.orientation == "forward" else DOWNWARD
        return CameraModel(
            width=self.width, height=self.height, vertical_fov=self.vertical_fov,
            rotation=rot, translation=np.asarray(self.translation, dtype=float),
            max_range=self.max_range,
        )


_SENSOR_KEYS = {"kind", "name", "width", "height", "vertical_fov", "orientation", "translation", "max_range", "noise"}
_NOISE_KEYS = {"kind", "sigma", "p", "scaling", "sigma_disparity", "quantization"}


def _sensor_from_table(table: dict, idx: int) -> SensorSpec:
    check_unknown(table, _SENSOR_KEYS, f"env.sensors[{idx}]")
    kwargs = dict(table)
    noise_tables = kwargs.pop("noise", [])
    specs = []
    for j, nt in enumerate(noise_tables):
        check_unknown(nt, _NOISE_KEYS, f"env.sensors[{idx}].noise[{j}]")
        specs.append(NoiseSpec(**nt))
    if "translation" in kwargs:
        kwargs["translation"] = tuple(kwargs["translation"])
    return SensorSpec(noise=tuple(specs), **kwargs)


@dataclass(frozen=True)
class EnvConfig:
    num_agents: int = 1
    mode: str = "parallel"  # parallel | swarm
    task: str = "free"  # free | navigation | landing | gap_crossing
    command_type: str = "ctbr"  # srt | ctbr | ps | lv
    episode_max_steps: int = 256
    auto_reset: bool = True
    min_spawn_clearance: float = 0.3
    bounds_margin: float = 1.0
    collision_radius: float = 0.15
    scene_sampling: str = "sequential"  # sequential | shuffled
    scenes: tuple = field(default_factory=lambda: (SceneSpec(),))
    randomization: InitRandomization = field(default_factory=InitRandomization)
    sensors: tuple = ()
    task_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.num_agents < 1:
            raise ConfigError("env.num_agents must be >= 1")
        if self.mode not in ("parallel", "swarm"):
            raise ConfigError("env.mode must be parallel|swarm")
        if self.task not in ("free", "navigation", "landing", "gap_crossing"):
            raise ConfigError(f"unknown task {self.task!r}")
        if self.command_type not in ("srt", "ctbr", "ps", "lv"):
            raise ConfigError("env.command_type must be srt|ctbr|ps|lv")
        if self.scene_sampling not in ("sequential", "shuffled"):
            raise ConfigError("env.scene_sampling must be sequential|shuffled")
        if self.mode == "swarm" and len(self.scenes) != 1:
            raise ConfigError("swarm mode binds all agents to one scene: configure exactly one scene")
        if not self.scenes:
            raise ConfigError("env.scenes must not be empty")
        object.__setattr__(self, "scenes", tuple(self.scenes))
        object.__setattr__(self, "sensors", tuple(self.sensors))


_ENV_KEYS = {
    "num_agents", "mode", "task", "command_type", "episode_max_steps", "auto_reset",
    "min_spawn_clearance", "bounds_margin", "collision_radius", "scene_sampling",
    "scenes", "randomization", "sensors", "task",
}


def env_config_from_table(table: dict) -> EnvConfig:
    check_unknown(table, _ENV_KEYS | {"task_params"}, "env")
    kwargs = dict(table)
    scenes = kwargs.pop("scenes", None)
    if scenes is not None:
        kwargs["scenes"] = tuple(_scene_from_table(t, i) for i, t in enumerate(scenes))
    rand = kwargs.pop("randomization", None)
    if rand is not None:
        kwargs["randomization"] = _randomization_from_table(rand)
    sensors = kwargs.pop("sensors", None)
    if sensors is not None:
        kwargs["sensors"] = tuple(_sensor_from_table(t, i) for i, t in enumerate(sensors))
    return EnvConfig(**kwargs)


def load_env_file(path):
    """Parse a full simulation file: (EnvConfig, QuadParams, SimConfig, gains)."""
    from ..params import gains_from_table, quad_params_from_table, sim_config_from_table

    data = read_toml(path)
    check_unknown(data, {"env", "quad", "sim", "gains"}, "top level")
    env = env_config_from_table(data.get("env", {}))
    quad = quad_params_from_table(data.get("quad", {}))
    sim = sim_config_from_table(data.get("sim", {}))
    gains = gains_from_table(data.get("gains", {}))
    return env, quad, sim, gains
