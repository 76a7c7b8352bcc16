"""Magnetic detumbling control laws.

Both laws command a magnetic dipole moment that is held constant in the
body frame for one control interval. Torque follows from m x b.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import cross3
from .geomag import OrbitConfig


class Algorithm(str, enum.Enum):
    OMEGA_CROSS_B = "omega_cross_b"
    BDOT = "bdot"


@dataclass(frozen=True)
class ControllerConfig:
    """Controller selection and tuning.

    Attributes:
        algorithm: which control law to run.
        k_c: scalar gain [N m s]; with it the continuous-time torque is
            exactly ``-k_c * omega_perp``.
        dt: control interval [s]; also the B-dot differencing period.
        moment_cap: optional bound on |m| [A m^2]. Off by default.
        hold_torque: freeze the torque computed at the start of each
            interval instead of re-evaluating m x b(t) as the field turns.
    """

    algorithm: Algorithm = Algorithm.OMEGA_CROSS_B
    k_c: float = 1.0
    dt: float = 1.0
    moment_cap: Optional[float] = None
    hold_torque: bool = False

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.k_c >= 0:
            raise ValueError(f"k_c must be non-negative, got {self.k_c}")
        if self.moment_cap is not None and not self.moment_cap > 0:
            raise ValueError(f"moment_cap must be positive when set, got {self.moment_cap}")


def _norm_sq(b: np.ndarray) -> float:
    n2 = float(b @ b)
    if not n2 > 0:
        raise ZeroDivisionError("magnetic field vector is zero")
    return n2


def omega_cross_b_moment(omega, b_body, k_c: float) -> np.ndarray:
    """m = k_c / |b|^2 (omega x b)."""
    b = np.asarray(b_body, dtype=float)
    return (k_c / _norm_sq(b)) * cross3(np.asarray(omega, dtype=float), b)


def bdot_moment(b_k, b_prev, dt: float, k_c: float) -> np.ndarray:
    """m = -k_c / |b_k|^2 (b_k - b_prev) / dt.

    The normalization uses the current sample.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    b_k = np.asarray(b_k, dtype=float)
    b_dot = (b_k - np.asarray(b_prev, dtype=float)) / dt
    return -(k_c / _norm_sq(b_k)) * b_dot


def avanzini_gain(orbit: OrbitConfig, j_min: float) -> float:
    """k_c = (4 pi / T_orb)(1 + sin xi) J_min."""
    if not j_min > 0:
        raise ValueError("j_min must be positive")
    return 4.0 * np.pi / orbit.t_orb * (1.0 + np.sin(orbit.xi)) * j_min


def magnetic_torque(moment, b_body) -> np.ndarray:
    return cross3(np.asarray(moment, dtype=float), np.asarray(b_body, dtype=float))


def projection_torque(omega, b_body, k_c: float) -> np.ndarray:
    """-k_c (1 - b_hat b_hat^T) omega, the idealized continuous-time torque."""
    b = np.asarray(b_body, dtype=float)
    omega = np.asarray(omega, dtype=float)
    b_hat = b / np.sqrt(_norm_sq(b))
    return -k_c * (omega - b_hat * (b_hat @ omega))


def cap_moment(moment: np.ndarray, cap: Optional[float]) -> np.ndarray:
    """Scale ``moment`` down, keeping its direction, so |m| <= cap."""
    if cap is None:
        return moment
    n = np.linalg.norm(moment)
    if n > cap:
        return moment * (cap / n)
    return moment
