"""Rigid-body rotational dynamics and attitude kinematics.

Quaternion convention (used everywhere in the package):

    q = [w, x, y, z]   scalar first, Hamilton product

``q`` is the attitude of the body with respect to the inertial frame. Its
rotation matrix ``R(q)`` carries body components into inertial components,
so the inertial-to-body direction cosine matrix is ``A_BI = R(q).T``. The
kinematics are

    q_dot = 0.5 * q (x) [0, omega]

with ``omega`` the body-frame angular velocity. A body spinning at ``w``
about its z axis therefore sees a fixed inertial vector rotate by ``-w t``:

    A_BI = [[ cos(wt), sin(wt), 0],
            [-sin(wt), cos(wt), 0],
            [       0,       0, 1]]
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

QUAT_IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])

_SYMMETRY_RTOL = 1e-12
_INVERSE_ATOL = 1e-10
_QUAT_NORM_TOL = 1e-9


class NonFiniteStateError(FloatingPointError):
    """Raised when the integrator is handed or produces a non-finite state."""


@dataclass(frozen=True, eq=False)
class SpacecraftBody:
    """Rigid body described by its inertia tensor.

    Args:
        inertia: 3x3 symmetric positive-definite tensor [kg m^2], or a
            3-vector of principal moments.
    """

    inertia: np.ndarray
    inertia_inverse: np.ndarray = field(init=False, repr=False)
    principal_moments: np.ndarray = field(init=False)

    def __post_init__(self):
        inertia = np.asarray(self.inertia, dtype=float)
        if inertia.shape == (3,):
            inertia = np.diag(inertia)
        if inertia.shape != (3, 3):
            raise ValueError(f"inertia must be 3x3 or a 3-vector, got shape {inertia.shape}")
        if not np.all(np.isfinite(inertia)):
            raise ValueError("inertia must be finite")
        scale = np.max(np.abs(inertia))
        if np.max(np.abs(inertia - inertia.T)) > _SYMMETRY_RTOL * scale:
            raise ValueError("inertia must be symmetric")
        inertia = 0.5 * (inertia + inertia.T)

        moments = np.linalg.eigvalsh(inertia)
        if moments[0] <= 0.0:
            raise ValueError(f"inertia must be positive definite, principal moments {moments}")
        # rigid-body triangle inequality, with a little slack for roundoff
        if moments[2] > moments[0] + moments[1] + 1e-12 * moments[2]:
            raise ValueError(f"principal moments {moments} violate the triangle inequality")

        inverse = np.linalg.inv(inertia)
        if np.max(np.abs(inertia @ inverse - np.eye(3))) > _INVERSE_ATOL:
            raise ValueError("inertia is too ill-conditioned to invert")

        inertia.setflags(write=False)
        inverse.setflags(write=False)
        moments.setflags(write=False)
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "inertia_inverse", inverse)
        object.__setattr__(self, "principal_moments", moments)

    @classmethod
    def spherical(cls, moment: float = 1.0) -> "SpacecraftBody":
        return cls(np.eye(3) * moment)

    @property
    def j_min(self) -> float:
        """Smallest principal moment of inertia."""
        return float(self.principal_moments[0])


@dataclass(frozen=True, eq=False)
class AttitudeState:
    """Attitude quaternion, body angular velocity [rad/s] and time [s]."""

    q: np.ndarray
    omega: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float).reshape(4))
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float).reshape(3))
        object.__setattr__(self, "t", float(self.t))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.omega)) and np.isfinite(self.t))


def cross3(a, b) -> np.ndarray:
    """Cross product of two 3-vectors; np.cross is slow for single vectors."""
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def quat_multiply(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product p (x) q, scalar first."""
    pw, px, py, pz = p
    qw, qx, qy, qz = q
    return np.array([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ])


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return np.concatenate(([np.cos(0.5 * angle)], np.sin(0.5 * angle) * axis))


def quat_to_dcm(q: np.ndarray) -> np.ndarray:
    """Inertial-to-body direction cosine matrix A_BI for attitude ``q``."""
    w, x, y, z = q
    # R(q) maps body -> inertial; A_BI is its transpose
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y + w * z), 2 * (x * z - w * y)],
        [2 * (x * y - w * z), 1 - 2 * (x * x + z * z), 2 * (y * z + w * x)],
        [2 * (x * z + w * y), 2 * (y * z - w * x), 1 - 2 * (x * x + y * y)],
    ])


def random_quaternion(rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed unit quaternion with non-negative scalar part."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    return q if q[0] >= 0 else -q


def gyroscopic_term(omega, body: SpacecraftBody) -> np.ndarray:
    """omega x (I omega)."""
    omega = np.asarray(omega, dtype=float)
    return cross3(omega, body.inertia @ omega)


def euler_rhs(state: AttitudeState, torque, body: SpacecraftBody) -> np.ndarray:
    """Angular acceleration I^-1 [torque - omega x (I omega)]."""
    torque = np.asarray(torque, dtype=float)
    return body.inertia_inverse @ (torque - gyroscopic_term(state.omega, body))


def quaternion_rate(q, omega) -> np.ndarray:
    """Time derivative of the attitude quaternion for body rate ``omega``."""
    w, x, y, z = q
    ox, oy, oz = omega
    return 0.5 * np.array([
        -x * ox - y * oy - z * oz,
        w * ox + y * oz - z * oy,
        w * oy - x * oz + z * ox,
        w * oz + x * oy - y * ox,
    ])


def rotate_to_body(q, v_inertial) -> np.ndarray:
    """Express an inertial vector in the body frame, A_BI v."""
    return quat_to_dcm(np.asarray(q, dtype=float)) @ np.asarray(v_inertial, dtype=float)


def rotate_to_inertial(q, v_body) -> np.ndarray:
    return quat_to_dcm(np.asarray(q, dtype=float)).T @ np.asarray(v_body, dtype=float)


def kinetic_energy(omega, body: SpacecraftBody) -> float:
    """Rotational kinetic energy 0.5 omega^T I omega [J]."""
    omega = np.asarray(omega, dtype=float)
    return 0.5 * float(omega @ body.inertia @ omega)


def inertial_angular_momentum(state: AttitudeState, body: SpacecraftBody) -> np.ndarray:
    return rotate_to_inertial(state.q, body.inertia @ state.omega)


TorqueFn = Callable[[AttitudeState], np.ndarray]


def rk4_step(state: AttitudeState, torque_fn: TorqueFn, h: float, body: SpacecraftBody) -> AttitudeState:
    """Advance (q, omega) by ``h`` seconds with classical RK4.

    ``torque_fn`` is evaluated at each RK4 stage on the stage state. The
    quaternion is renormalized on exit.
    """
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    if not state.is_finite():
        raise NonFiniteStateError(f"non-finite state at t={state.t}: q={state.q}, omega={state.omega}")

    def deriv(s: AttitudeState):
        return quaternion_rate(s.q, s.omega), euler_rhs(s, torque_fn(s), body)

    def stage(dq, dw, a):
        return AttitudeState(state.q + a * dq, state.omega + a * dw, state.t + a)

    k1q, k1w = deriv(state)
    k2q, k2w = deriv(stage(k1q, k1w, 0.5 * h))
    k3q, k3w = deriv(stage(k2q, k2w, 0.5 * h))
    k4q, k4w = deriv(stage(k3q, k3w, h))

    q = state.q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    omega = state.omega + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    out = AttitudeState(q, omega, state.t + h)
    if not out.is_finite():
        raise NonFiniteStateError(f"integration produced a non-finite state at t={out.t}")
    q_norm = np.linalg.norm(q)
    if not (np.isfinite(q_norm) and q_norm > 0):
        raise NonFiniteStateError(f"quaternion norm {q_norm} at t={out.t}")
    q = q / q_norm
    if not abs(np.linalg.norm(q) - 1.0) < _QUAT_NORM_TOL:
        raise NonFiniteStateError(f"quaternion lost unit norm at t={out.t}")
    return replace(out, q=q)
