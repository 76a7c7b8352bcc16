"""Lyapunov monitoring and discrete-time instability criteria.

Three mechanisms make a sampled magnetic detumbling loop misbehave:

* Type I: the per-step control impulse overshoots and flips omega_perp
  (unstable when k_c dt / I > 2).
* Type II: B-dot's finite difference aliases once the field turns more
  than pi between samples, creating false equilibria at 2 n pi / dt.
* Type III: the field turns past the held moment within one interval so
  the net impulse spins the body up; predicted change -k_c sin(omega dt) / I.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .control import Algorithm, ControllerConfig
from .dynamics import SpacecraftBody, kinetic_energy

__all__ = [
    "EquilibriumSet",
    "StabilityReport",
    "Type1Result",
    "bdot_phase_acceleration",
    "classify_equilibria",
    "discrete_lyapunov_delta",
    "entry_check",
    "kinetic_energy",
    "lyapunov_rate",
    "type1_componentwise",
    "type1_criterion",
    "type2_max_dt",
    "type3_delta_omega",
]

TYPE1_LIMIT = 2.0


def lyapunov_rate(omega, torque) -> float:
    """dV/dt = omega . torque for V the rotational kinetic energy."""
    return float(np.dot(np.asarray(omega, dtype=float), np.asarray(torque, dtype=float)))


def discrete_lyapunov_delta(omega_k, omega_k1, body: SpacecraftBody) -> float:
    """V(omega_{k+1}) - V(omega_k); positive means the step added energy."""
    return kinetic_energy(omega_k1, body) - kinetic_energy(omega_k, body)


class Type1Result(NamedTuple):
    unstable: bool
    margin: float  # k_c dt / I_min - 2; positive means unstable


def type1_criterion(k_c: float, dt: float, body: SpacecraftBody | float) -> Type1Result:
    """Overshoot check k_c dt / I > 2 using the smallest principal moment.

    ``body`` may also be a bare moment of inertia.
    """
    inertia = body.j_min if isinstance(body, SpacecraftBody) else float(body)
    ratio = k_c * dt / inertia
    return Type1Result(bool(ratio > TYPE1_LIMIT), float(ratio - TYPE1_LIMIT))


def type1_componentwise(torque_component: float, inertia_axis: float, dt: float,
                        omega_perp_component: float) -> bool:
    """True when one step of the held torque flips this component and grows it.

    The component goes from w to w + (torque / I) dt; it is unstable when
    that lands on the far side of zero with a larger magnitude, i.e. when
    (torque / I) dt overshoots -2 w.
    """
    kick = torque_component / inertia_axis * dt
    w = omega_perp_component
    return bool(kick * np.sign(w) < -2.0 * abs(w))


def bdot_phase_acceleration(omega_z, dt: float, k_c: float, inertia: float, b) -> np.ndarray:
    """Start-of-interval z acceleration under sampled B-dot for a body spinning about z.

    -C sin(omega_z dt) with C = k_c (b_x^2 + b_y^2) / (dt I |b|^2). This is
    what composing the per-sample field rotation, the finite difference,
    the B-dot law and m x b gives; vectorized over ``omega_z``.
    """
    b = np.asarray(b, dtype=float)
    b2 = float(b @ b)
    if not b2 > 0:
        raise ZeroDivisionError("magnetic field vector is zero")
    c = k_c * (b[0] ** 2 + b[1] ** 2) / (dt * inertia * b2)
    return -c * np.sin(np.asarray(omega_z, dtype=float) * dt)


def type2_max_dt(omega) -> float:
    """Largest sampling interval that resolves the field rotation, pi / |omega|.

    Returns ``inf`` for zero rate.
    """
    w = float(np.linalg.norm(np.atleast_1d(np.asarray(omega, dtype=float))))
    if w == 0.0:
        return math.inf
    return math.pi / w


@dataclass(frozen=True)
class EquilibriumSet:
    stable_points: list
    unstable_points: list
    omega_max: float


def classify_equilibria(dt: float, omega_max: float) -> EquilibriumSet:
    """Sampled B-dot equilibria in [0, omega_max]: stable at 2n pi/dt, unstable at odd multiples."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    step = math.pi / dt
    n_max = int(math.floor(omega_max / step + 1e-12)) if omega_max >= 0 else -1
    stable = [n * step for n in range(0, n_max + 1) if n % 2 == 0]
    unstable = [n * step for n in range(0, n_max + 1) if n % 2 == 1]
    return EquilibriumSet(stable, unstable, float(omega_max))


def type3_delta_omega(omega_i, dt: float, k_c: float, inertia: float = 1.0):
    """Predicted one-interval change of |omega| with the moment held and the field turning.

    -(k_c / I) sin(omega_i dt), from integrating the torque with the field
    angle taken as omega_i t.
    """
    return -(k_c / inertia) * np.sin(np.asarray(omega_i, dtype=float) * dt)


@dataclass(frozen=True)
class StabilityReport:
    omega_norm: float
    type1_unstable: bool
    type1_margin: float
    type2_applies: bool
    type2_max_dt: float
    type2_violated: bool
    type3_delta_omega_pred: float
    type3_angle: float  # |omega| dt, field rotation per interval [rad]
    type3_violated: bool
    reasons: list = field(default_factory=list)

    @property
    def recommended_entry(self) -> bool:
        return not (self.type1_unstable or self.type2_violated or self.type3_violated)

    def as_dict(self) -> dict:
        return {
            "omega_norm": self.omega_norm,
            "type1_unstable": self.type1_unstable,
            "type1_margin": self.type1_margin,
            "type2_applies": self.type2_applies,
            "type2_max_dt": self.type2_max_dt,
            "type2_violated": self.type2_violated,
            "type3_delta_omega_pred": self.type3_delta_omega_pred,
            "type3_angle": self.type3_angle,
            "type3_violated": self.type3_violated,
            "recommended_entry": self.recommended_entry,
            "reasons": list(self.reasons),
        }


def entry_check(omega, config: ControllerConfig, body: SpacecraftBody) -> StabilityReport:
    """Pre-flight gate: evaluate all three criteria for the current rate and controller.

    Type II only applies to B-dot. Type III is judged on the first lobe of
    the predicted change: entry requires |omega| dt < pi, where
    -k_c sin(|omega| dt) is still a deceleration.
    """
    w = float(np.linalg.norm(np.asarray(omega, dtype=float)))
    dt = config.dt
    reasons = []

    t1 = type1_criterion(config.k_c, dt, body)
    if t1.unstable:
        reasons.append(f"Type I: k_c*dt/I_min = {t1.margin + TYPE1_LIMIT:.6g} > 2")

    max_dt = type2_max_dt(w)
    t2_applies = config.algorithm is Algorithm.BDOT
    t2_violated = bool(t2_applies and dt >= max_dt)
    if t2_violated:
        reasons.append(f"Type II: dt = {dt:.6g} s >= pi/|omega| = {max_dt:.6g} s")

    angle = w * dt
    pred = float(type3_delta_omega(w, dt, config.k_c, body.j_min))
    t3_violated = bool(angle >= math.pi)
    if t3_violated:
        reasons.append(f"Type III: |omega|*dt = {angle:.6g} rad >= pi, predicted change {pred:+.6g} rad/s")

    return StabilityReport(w, t1.unstable, t1.margin, t2_applies, max_dt, t2_violated,
                           pred, angle, t3_violated, reasons)
