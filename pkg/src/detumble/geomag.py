"""Inertial-frame magnetic field models.

Three variants, all evaluated as ``field_inertial(model, t)``:

* ``StaticInertial``: a constant vector.
* ``PlanarRotating``: a vector rotating about a fixed axis at a fixed rate.
* ``TiltedDipole``: a centered dipole, fixed in inertial space, sampled
  along a circular orbit.

The dipole defaults are generic LEO numbers, not mission data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .dynamics import cross3

MU_EARTH = 3.986004418e14  # m^3/s^2
R_EARTH = 6.371e6  # m
B0_EQUATOR = 3.12e-5  # T, dipole field magnitude at the surface on the magnetic equator
DIPOLE_STRENGTH = B0_EQUATOR * R_EARTH**3  # T m^3


@dataclass(frozen=True, eq=False)
class StaticInertial:
    b0: np.ndarray

    def __post_init__(self):
        b0 = np.asarray(self.b0, dtype=float).reshape(3)
        if not np.linalg.norm(b0) > 0:
            raise ValueError("static field must be nonzero")
        object.__setattr__(self, "b0", b0)


@dataclass(frozen=True, eq=False)
class PlanarRotating:
    """Field ``b0`` rotating about ``axis`` at ``rate`` rad/s (right-handed)."""

    b0: np.ndarray
    axis: np.ndarray
    rate: float

    def __post_init__(self):
        b0 = np.asarray(self.b0, dtype=float).reshape(3)
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        if not np.linalg.norm(b0) > 0:
            raise ValueError("rotating field must be nonzero")
        if not np.linalg.norm(axis) > 0:
            raise ValueError("rotation axis must be nonzero")
        object.__setattr__(self, "b0", b0)
        object.__setattr__(self, "axis", axis / np.linalg.norm(axis))
        object.__setattr__(self, "rate", float(self.rate))


@dataclass(frozen=True, eq=False)
class TiltedDipole:
    """Centered dipole sampled on a circular orbit.

    The orbit has its ascending node on the inertial x axis. The dipole
    moment points along -z (south, as for the Earth) tilted by
    ``dipole_tilt`` about the x axis.
    """

    orbit_radius: float = R_EARTH + 500e3
    inclination: float = np.pi / 2
    orbit_phase0: float = 0.0
    dipole_tilt: float = 0.0
    dipole_strength: float = DIPOLE_STRENGTH

    def __post_init__(self):
        if not self.orbit_radius > 0:
            raise ValueError("orbit_radius must be positive")
        if not self.dipole_strength > 0:
            raise ValueError("dipole_strength must be positive")

    @property
    def mean_motion(self) -> float:
        return float(np.sqrt(MU_EARTH / self.orbit_radius**3))

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.mean_motion

    @property
    def dipole_axis(self) -> np.ndarray:
        c, s = np.cos(self.dipole_tilt), np.sin(self.dipole_tilt)
        return np.array([0.0, s, -c])

    def position(self, t: float) -> np.ndarray:
        u = self.orbit_phase0 + self.mean_motion * t
        ci, si = np.cos(self.inclination), np.sin(self.inclination)
        return self.orbit_radius * np.array([np.cos(u), np.sin(u) * ci, np.sin(u) * si])

    @classmethod
    def from_orbit(cls, orbit: "OrbitConfig", **kwargs) -> "TiltedDipole":
        """Untilted dipole on the circular orbit with the given period and inclination."""
        radius = (MU_EARTH * (orbit.t_orb / (2.0 * np.pi)) ** 2) ** (1.0 / 3.0)
        kwargs.setdefault("dipole_tilt", 0.0)
        return cls(orbit_radius=radius, inclination=orbit.xi, **kwargs)


FieldModel = Union[StaticInertial, PlanarRotating, TiltedDipole]


@dataclass(frozen=True)
class OrbitConfig:
    """Orbital period [s] and inclination to the geomagnetic equator [rad]."""

    t_orb: float
    xi: float

    def __post_init__(self):
        if not self.t_orb > 0:
            raise ValueError("t_orb must be positive")
        if not 0.0 <= self.xi <= np.pi / 2:
            raise ValueError("xi must lie in [0, pi/2]")


def dipole_field(position, moment_axis, strength: float) -> np.ndarray:
    """Field of a centered point dipole, strength/r^3 * (3 (m.r) r - m) with unit m, r."""
    r = np.asarray(position, dtype=float)
    rn = np.linalg.norm(r)
    r_hat = r / rn
    m = np.asarray(moment_axis, dtype=float)
    return strength / rn**3 * (3.0 * np.dot(m, r_hat) * r_hat - m)


def field_inertial(model: FieldModel, t: float) -> np.ndarray:
    """Inertial-frame magnetic field [T] at time ``t``."""
    if isinstance(model, StaticInertial):
        return model.b0.copy()
    if isinstance(model, PlanarRotating):
        angle = model.rate * t
        k, v = model.axis, model.b0
        c, s = np.cos(angle), np.sin(angle)
        # Rodrigues
        return v * c + cross3(k, v) * s + k * np.dot(k, v) * (1.0 - c)
    if isinstance(model, TiltedDipole):
        return dipole_field(model.position(t), model.dipole_axis, model.dipole_strength)
    raise TypeError(f"unknown field model {type(model).__name__}")


def effective_field_rotation_rate(model: FieldModel, orbit: OrbitConfig | None = None,
                                  samples: int = 2000) -> float:
    """Characteristic angular rate [rad/s] of the inertial field direction.

    For the dipole this is the mean of |d b_hat / dt| over one orbit,
    obtained by differencing the unit field direction. When ``orbit`` is
    given, the dipole is re-evaluated on that orbit (see
    ``TiltedDipole.from_orbit``).
    """
    if isinstance(model, StaticInertial):
        return 0.0
    if isinstance(model, PlanarRotating):
        # only the component of b0 off the axis actually turns
        if np.linalg.norm(np.cross(model.axis, model.b0)) == 0.0:
            return 0.0
        return abs(model.rate)
    if isinstance(model, TiltedDipole):
        if orbit is not None:
            model = TiltedDipole.from_orbit(orbit, orbit_phase0=model.orbit_phase0,
                                            dipole_strength=model.dipole_strength)
        ts = np.linspace(0.0, model.period, samples + 1)
        b = np.array([field_inertial(model, t) for t in ts])
        b_hat = b / np.linalg.norm(b, axis=1, keepdims=True)
        dots = np.clip(np.sum(b_hat[1:] * b_hat[:-1], axis=1), -1.0, 1.0)
        return float(np.sum(np.arccos(dots)) / model.period)
    raise TypeError(f"unknown field model {type(model).__name__}")
