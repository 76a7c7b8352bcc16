"""Discrete-time magnetic detumbling simulator and stability checks."""

from .control import (
    Algorithm,
    ControllerConfig,
    avanzini_gain,
    bdot_moment,
    magnetic_torque,
    omega_cross_b_moment,
    projection_torque,
)
from .dynamics import AttitudeState, SpacecraftBody, rk4_step, rotate_to_body
from .geomag import OrbitConfig, PlanarRotating, StaticInertial, TiltedDipole, field_inertial
from .simharness import SimConfig, Telemetry, run_detumble, sweep_1d, sweep_2d
from .stability import StabilityReport, entry_check

__version__ = "0.1.0"
