"""quadsim: batched differentiable quadrotor simulation.

Subsystems:
    dynamics    rigid-body model, rotor/drag forces, Euler/RK4 stepping
    gradients   analytic step Jacobians and rollout backpropagation
    control     SRT/CTBR/PS/LV command pipeline and thrust mixer
    geometry    scenes, BVH nearest-point / ray queries, scene generator
    sensing     depth & segmentation cameras, IMU, sensor noise models
    env         batched gym-style task environments and scripted policies
    bench       throughput measurement
    cli         `quadsim bench|rollout|validate`
"""

from .control import CTBR, LV, PS, SRT, Command, mixer
from .dynamics import QuadState, Wrench, step
from .gradients import RolloutTape, StepJacobian, rollout, rollout_grad, step_jacobian
from .params import ControllerGains, Integrator, QuadParams, SimConfig, load_params

__version__ = "0.1.0"

__all__ = [
    "CTBR",
    "Command",
    "ControllerGains",
    "Integrator",
    "LV",
    "PS",
    "QuadParams",
    "QuadState",
    "RolloutTape",
    "SRT",
    "SimConfig",
    "StepJacobian",
    "Wrench",
    "load_params",
    "mixer",
    "rollout",
    "rollout_grad",
    "step",
    "step_jacobian",
]
