"""Physical parameters, integrator settings, controller gains, file loading.

All defaults describe a ~0.75 kg X-frame quadrotor with 0.125 m arms and a
quadratic thrust curve chosen so hover sits at 60% of the rotor speed limit.
Everything can be overridden from a TOML parameter file; unknown keys are a
hard error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .errors import ConfigError

GRAVITY = 9.81


class Integrator(Enum):
    EULER = "euler"
    RK4 = "rk4"


def _default_arms() -> np.ndarray:
    # X-frame, rotors numbered counterclockwise from front-right quadrant
    a = 0.125 / math.sqrt(2.0)
    return np.array(
        [
            [a, -a, 0.0],
            [a, a, 0.0],
            [-a, a, 0.0],
            [-a, -a, 0.0],
        ]
    )


@dataclass(frozen=True)
class QuadParams:
    """Physical constants of one vehicle (shared across a batch)."""

    mass: float = 0.75
    inertia_diag: np.ndarray = field(default_factory=lambda: np.array([2.5e-3, 2.5e-3, 4.3e-3]))
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -GRAVITY]))
    arm_positions: np.ndarray = field(default_factory=_default_arms)
    spin_directions: np.ndarray = field(default_factory=lambda: np.array([-1.0, 1.0, -1.0, 1.0]))
    thrust_coeffs: tuple = (2.2708333333333333e-06, 0.0, 0.0)  # (k2, k1, k0)
    yaw_torque_coeff: float = 0.012
    motor_decay: float = 30.0
    air_density: float = 1.204
    drag_coeffs: np.ndarray = field(default_factory=lambda: np.array([0.6, 0.6, 0.9]))
    cross_area: np.ndarray = field(default_factory=lambda: np.array([0.015, 0.015, 0.03]))
    rotor_speed_limits: tuple = (0.0, 1500.0)

    def __post_init__(self):
        object.__setattr__(self, "inertia_diag", np.asarray(self.inertia_diag, dtype=float))
        object.__setattr__(self, "gravity", np.asarray(self.gravity, dtype=float))
        object.__setattr__(self, "arm_positions", np.asarray(self.arm_positions, dtype=float).reshape(4, 3))
        object.__setattr__(self, "spin_directions", np.asarray(self.spin_directions, dtype=float))
        object.__setattr__(self, "drag_coeffs", np.asarray(self.drag_coeffs, dtype=float))
        object.__setattr__(self, "cross_area", np.asarray(self.cross_area, dtype=float))
        if self.mass <= 0:
            raise ConfigError("quad.mass must be > 0")
        if np.any(self.inertia_diag <= 0):
            raise ConfigError("quad.inertia_diag must be > 0 componentwise")
        k2 = self.thrust_coeffs[0]
        if k2 <= 0:
            raise ConfigError("quad.thrust_coeffs k2 must be > 0")
        lo, hi = self.rotor_speed_limits
        if not (0 <= lo < hi):
            raise ConfigError("quad.rotor_speed_limits must satisfy 0 <= min < max")
        if set(np.sign(self.spin_directions)) - {1.0, -1.0}:
            raise ConfigError("quad.spin_directions entries must be +1 or -1")

    @property
    def torque_arms(self) -> np.ndarray:
        """Per-rotor torque per unit thrust: T_i x z + spin_i * c_tau * z. Shape (4, 3)."""
        z = np.array([0.0, 0.0, 1.0])
        g = np.cross(self.arm_positions, z)
        g = g + self.spin_directions[:, None] * self.yaw_torque_coeff * z
        return g

    @property
    def allocation_matrix(self) -> np.ndarray:
        """Maps per-rotor thrusts to (collective force, body torque). Shape (4, 4)."""
        a = np.empty((4, 4))
        a[0, :] = 1.0
        a[1:4, :] = self.torque_arms.T
        return a

    @property
    def allocation_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.allocation_matrix)

    def thrust_of_speed(self, omega):
        k2, k1, k0 = self.thrust_coeffs
        return k2 * omega**2 + k1 * omega + k0

    def speed_of_thrust(self, f):
        """Positive root of the thrust polynomial, clamped to the speed limits."""
        k2, k1, k0 = self.thrust_coeffs
        arg = np.maximum(k1 * k1 + 4.0 * k2 * (f - k0), 0.0)
        omega = (-k1 + np.sqrt(arg)) / (2.0 * k2)
        return np.clip(omega, self.rotor_speed_limits[0], self.rotor_speed_limits[1])

    @property
    def thrust_limits(self) -> tuple:
        lo, hi = self.rotor_speed_limits
        return (float(self.thrust_of_speed(lo)), float(self.thrust_of_speed(hi)))

    @property
    def hover_thrust(self) -> float:
        return self.mass * GRAVITY / 4.0

    @property
    def hover_speed(self) -> float:
        return float(self.speed_of_thrust(self.hover_thrust))


@dataclass(frozen=True)
class SimConfig:
    """Fixed-step integration settings for one control step."""

    control_dt: float = 0.02
    substeps: int = 2
    integrator: Integrator = Integrator.RK4

    def __post_init__(self):
        if self.control_dt <= 0:
            raise ConfigError("sim.control_dt must be > 0")
        if int(self.substeps) < 1:
            raise ConfigError("sim.substeps must be >= 1")
        object.__setattr__(self, "substeps", int(self.substeps))
        if isinstance(self.integrator, str):
            try:
                object.__setattr__(self, "integrator", Integrator(self.integrator.lower()))
            except ValueError:
                raise ConfigError(f"sim.integrator must be one of {[i.value for i in Integrator]}") from None

    @property
    def physics_dt(self) -> float:
        return self.control_dt / self.substeps


@dataclass(frozen=True)
class ControllerGains:
    """Gains of the cascaded controller; frozen by the closed-loop tests."""

    rate_p: np.ndarray = field(default_factory=lambda: np.array([20.0, 20.0, 8.0]))
    attitude_p: np.ndarray = field(default_factory=lambda: np.array([9.0, 9.0, 3.0]))
    velocity_pd: tuple = ((3.2, 3.2, 3.6), (0.0, 0.0, 0.0))
    position_pd: tuple = ((1.4, 1.4, 1.6), (0.25, 0.25, 0.25))
    max_speed: float = 4.0
    max_tilt_accel: float = 25.0

    def __post_init__(self):
        object.__setattr__(self, "rate_p", np.asarray(self.rate_p, dtype=float))
        object.__setattr__(self, "attitude_p", np.asarray(self.attitude_p, dtype=float))
        object.__setattr__(
            self, "velocity_pd", (np.asarray(self.velocity_pd[0], dtype=float), np.asarray(self.velocity_pd[1], dtype=float))
        )
        object.__setattr__(
            self, "position_pd", (np.asarray(self.position_pd[0], dtype=float), np.asarray(self.position_pd[1], dtype=float))
        )
        for name in ("rate_p", "attitude_p"):
            if np.any(getattr(self, name) < 0):
                raise ConfigError(f"gains.{name} must be nonnegative")
        for name in ("velocity_pd", "position_pd"):
            for g in getattr(self, name):
                if np.any(g < 0):
                    raise ConfigError(f"gains.{name} must be nonnegative")


# ---------------------------------------------------------------------------
# Parameter file loading


_QUAD_KEYS = {
    "mass": "mass",
    "inertia_diag": "inertia_diag",
    "gravity": "gravity",
    "arm_positions": "arm_positions",
    "spin_directions": "spin_directions",
    "thrust_coeffs": "thrust_coeffs",
    "yaw_torque_coeff": "yaw_torque_coeff",
    "motor_decay": "motor_decay",
    "air_density": "air_density",
    "drag_coeffs": "drag_coeffs",
    "cross_area": "cross_area",
    "rotor_speed_limits": "rotor_speed_limits",
}

_SIM_KEYS = {"control_dt", "substeps", "integrator"}

_GAINS_KEYS = {"rate_p", "attitude_p", "velocity_p", "velocity_d", "position_p", "position_d", "max_speed", "max_tilt_accel"}


def read_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def check_unknown(table: dict, allowed, where: str):
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")


def quad_params_from_table(table: dict) -> QuadParams:
    check_unknown(table, _QUAD_KEYS, "quad")
    kwargs = {}
    for key, attr in _QUAD_KEYS.items():
        if key in table:
            val = table[key]
            if key in ("thrust_coeffs", "rotor_speed_limits"):
                val = tuple(float(v) for v in val)
            kwargs[attr] = val
    return QuadParams(**kwargs)


def sim_config_from_table(table: dict) -> SimConfig:
    check_unknown(table, _SIM_KEYS, "sim")
    return SimConfig(**table)


def gains_from_table(table: dict) -> ControllerGains:
    check_unknown(table, _GAINS_KEYS, "gains")
    kwargs = {}
    for key in ("rate_p", "attitude_p", "max_speed", "max_tilt_accel"):
        if key in table:
            kwargs[key] = table[key]
    defaults = ControllerGains()
    vp = table.get("velocity_p", defaults.velocity_pd[0])
    vd = table.get("velocity_d", defaults.velocity_pd[1])
    pp = table.get("position_p", defaults.position_pd[0])
    pd = table.get("position_d", defaults.position_pd[1])
    return ControllerGains(velocity_pd=(vp, vd), position_pd=(pp, pd), **kwargs)


def load_params(path) -> tuple:
    """Load (QuadParams, SimConfig, ControllerGains) from one TOML file.

    Sections [quad], [sim], [gains] are all optional; missing sections use
    defaults. Any section or key outside those three is rejected.
    """
    data = read_toml(path)
    check_unknown(data, {"quad", "sim", "gains"}, "top level")
    quad = quad_params_from_table(data.get("quad", {}))
    sim = sim_config_from_table(data.get("sim", {}))
    gains = gains_from_table(data.get("gains", {}))
    return quad, sim, gains
