from .base import QuadEnvBase, StepResult
from .config import DistSpec, EnvConfig, InitRandomization, SceneSpec, SensorSpec, env_config_from_table, load_env_file
from .logs import EpisodeLogWriter, format_record, read_episode_log
from .policies import POLICIES, make_policy
from .tasks import (
    FreeFlightEnv,
    GapCrossingEnv,
    LandingEnv,
    NavigationEnv,
    gap_crossing_config,
    landing_config,
    make_env,
    navigation_config,
)

__all__ = [
    "DistSpec",
    "EnvConfig",
    "EpisodeLogWriter",
    "FreeFlightEnv",
    "GapCrossingEnv",
    "InitRandomization",
    "LandingEnv",
    "NavigationEnv",
    "POLICIES",
    "QuadEnvBase",
    "SceneSpec",
    "SensorSpec",
    "StepResult",
    "env_config_from_table",
    "format_record",
    "gap_crossing_config",
    "landing_config",
    "load_env_file",
    "make_env",
    "make_policy",
    "navigation_config",
    "read_episode_log",
]
