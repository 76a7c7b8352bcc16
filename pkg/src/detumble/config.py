"""Run configuration files.

Configs are TOML. Keys may be written with dotted names
(``controller.dt = 1.0``) or grouped under ``[controller]`` tables; both
parse to the same flat key set. Every key is listed in ``SCHEMA`` and
anything else is rejected so typos fail loudly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .control import Algorithm, ControllerConfig, avanzini_gain
from .dynamics import QUAT_IDENTITY, SpacecraftBody
from .geomag import OrbitConfig, PlanarRotating, StaticInertial, TiltedDipole
from .simharness import Horizon, SimConfig, SweepAxis

# key -> short description; the README documents the same table
SCHEMA = {
    "body.inertia": "3x3 inertia matrix or 3 principal moments [kg m^2]",
    "controller.algorithm": '"omega_cross_b" or "bdot"',
    "controller.k_c": 'gain [N m s], or "avanzini" to derive it from orbit.* and the body',
    "controller.dt": "control interval [s]",
    "controller.moment_cap": "optional |m| limit [A m^2]",
    "controller.hold_torque": "freeze torque at its start-of-interval value (default false)",
    "orbit.t_orb": "orbital period [s]",
    "orbit.xi": "inclination to the geomagnetic equator [rad]",
    "field.model": '"static", "planar_rotating" or "tilted_dipole"',
    "field.b0": "field vector [T] (static, planar_rotating)",
    "field.axis": "rotation axis (planar_rotating)",
    "field.rate": "rotation rate [rad/s] (planar_rotating)",
    "field.orbit_radius": "[m] (tilted_dipole)",
    "field.inclination": "[rad] (tilted_dipole)",
    "field.orbit_phase0": "[rad] (tilted_dipole)",
    "field.dipole_tilt": "[rad] (tilted_dipole)",
    "field.dipole_strength": "[T m^3] (tilted_dipole)",
    "initial.omega": "body angular velocity, 3-vector",
    "initial.omega_unit": '"rad/s" (default) or "deg/s"',
    "initial.q": "attitude quaternion [w, x, y, z] (default identity)",
    "initial.randomize_attitude": "draw the initial attitude from sim.seed (default false)",
    "sim.duration": "simulated time [s]",
    "sim.substeps": "RK4 substeps per control interval (default 20)",
    "sim.seed": "integer seed (default 0)",
    "sweep.axis1": '"initial_omega_mag", "dt" or "k_c"',
    "sweep.values1": "list of values for axis1",
    "sweep.range1": "[start, stop, count] evenly spaced values for axis1",
    "sweep.axis2": "optional second axis",
    "sweep.values2": "list of values for axis2",
    "sweep.range2": "[start, stop, count] for axis2",
    "sweep.horizon": '"one_interval" or "full_run" (default)',
    "portrait.omega_min": "[rad/s] (default 0)",
    "portrait.omega_max": "[rad/s] (default 4 pi / dt)",
    "portrait.points": "number of samples (default 401)",
    "portrait.b": "field vector used for the portrait (default field.b0 or [1, 0, 0])",
    "portrait.inertia": "moment of inertia (default smallest principal moment)",
}


class ConfigError(ValueError):
    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


def _flatten(table: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in table.items():
        name = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, name + "."))
        else:
            out[name] = v
    return out


def _line_of(text: str, key: str) -> Optional[int]:
    leaf = re.escape(key.rsplit(".", 1)[-1])
    full = re.escape(key)
    for pattern in (rf"^\s*{full}\s*=", rf"^\s*{leaf}\s*="):
        for i, line in enumerate(text.splitlines(), 1):
            if re.search(pattern, line):
                return i
    return None


@dataclass
class RunSpec:
    """Validated flat configuration plus the source text for diagnostics."""

    values: dict
    text: str = ""
    source: str = "<string>"

    @classmethod
    def from_text(cls, text: str, source: str = "<string>") -> "RunSpec":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{source}: {exc}") from exc
        values = _flatten(data)
        spec = cls(values, text, source)
        for key in values:
            if key not in SCHEMA:
                spec.fail(key, "unknown key")
        return spec

    @classmethod
    def from_file(cls, path) -> "RunSpec":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        return cls.from_text(text, str(path))

    def fail(self, key: str, message: str):
        raise ConfigError(message, key=key, line=_line_of(self.text, key))

    def has(self, key: str) -> bool:
        return key in self.values

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    def require(self, key: str) -> Any:
        if key not in self.values:
            self.fail(key, "missing required key")
        return self.values[key]

    # typed accessors ---------------------------------------------------

    def number(self, key: str, default=None, *, positive=False, nonneg=False) -> float:
        raw = self.require(key) if default is None else self.get(key, default)
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            self.fail(key, f"expected a number, got {raw!r}")
        x = float(raw)
        if not math.isfinite(x):
            self.fail(key, "must be finite")
        if positive and not x > 0:
            self.fail(key, f"must be positive, got {x}")
        if nonneg and not x >= 0:
            self.fail(key, f"must be non-negative, got {x}")
        return x

    def integer(self, key: str, default=None, *, minimum=None) -> int:
        raw = self.require(key) if default is None else self.get(key, default)
        if isinstance(raw, bool) or not isinstance(raw, int):
            self.fail(key, f"expected an integer, got {raw!r}")
        if minimum is not None and raw < minimum:
            self.fail(key, f"must be >= {minimum}, got {raw}")
        return raw

    def boolean(self, key: str, default: bool) -> bool:
        raw = self.get(key, default)
        if not isinstance(raw, bool):
            self.fail(key, f"expected true or false, got {raw!r}")
        return raw

    def vector(self, key: str, n: int = 3, default=None) -> np.ndarray:
        raw = self.require(key) if default is None else self.get(key, default)
        try:
            arr = np.asarray(raw, dtype=float)
        except (TypeError, ValueError):
            self.fail(key, f"expected a list of {n} numbers")
        if arr.shape != (n,) or not np.all(np.isfinite(arr)):
            self.fail(key, f"expected a list of {n} finite numbers, got {raw!r}")
        return arr

    def choice(self, key: str, options, default=None) -> str:
        raw = self.require(key) if default is None else self.get(key, default)
        if raw not in options:
            self.fail(key, f"expected one of {sorted(options)}, got {raw!r}")
        return raw

    # domain objects ----------------------------------------------------

    def body(self) -> SpacecraftBody:
        raw = self.require("body.inertia")
        try:
            return SpacecraftBody(np.asarray(raw, dtype=float))
        except (TypeError, ValueError) as exc:
            self.fail("body.inertia", str(exc))

    def orbit(self) -> OrbitConfig:
        t_orb = self.number("orbit.t_orb", positive=True)
        xi = self.number("orbit.xi", nonneg=True)
        try:
            return OrbitConfig(t_orb, xi)
        except ValueError as exc:
            self.fail("orbit.xi", str(exc))

    def controller(self, body: Optional[SpacecraftBody] = None) -> ControllerConfig:
        algorithm = self.choice("controller.algorithm", {a.value for a in Algorithm})
        dt = self.number("controller.dt", positive=True)
        raw_k = self.require("controller.k_c")
        if raw_k == "avanzini":
            body = body or self.body()
            k_c = avanzini_gain(self.orbit(), body.j_min)
        else:
            k_c = self.number("controller.k_c", nonneg=True)
        cap = None
        if self.has("controller.moment_cap"):
            cap = self.number("controller.moment_cap", positive=True)
        hold = self.boolean("controller.hold_torque", False)
        return ControllerConfig(Algorithm(algorithm), k_c, dt, cap, hold)

    def field_model(self):
        kind = self.choice("field.model", {"static", "planar_rotating", "tilted_dipole"})
        allowed = {
            "static": {"field.model", "field.b0"},
            "planar_rotating": {"field.model", "field.b0", "field.axis", "field.rate"},
            "tilted_dipole": {"field.model", "field.orbit_radius", "field.inclination",
                              "field.orbit_phase0", "field.dipole_tilt", "field.dipole_strength"},
        }[kind]
        for key in self.values:
            if key.startswith("field.") and key not in allowed:
                self.fail(key, f"not used by field.model = {kind!r}")
        try:
            if kind == "static":
                return StaticInertial(self.vector("field.b0"))
            if kind == "planar_rotating":
                return PlanarRotating(self.vector("field.b0"), self.vector("field.axis"),
                                      self.number("field.rate"))
            defaults = TiltedDipole()
            return TiltedDipole(
                orbit_radius=self.number("field.orbit_radius", defaults.orbit_radius, positive=True),
                inclination=self.number("field.inclination", defaults.inclination),
                orbit_phase0=self.number("field.orbit_phase0", defaults.orbit_phase0),
                dipole_tilt=self.number("field.dipole_tilt", defaults.dipole_tilt),
                dipole_strength=self.number("field.dipole_strength", defaults.dipole_strength,
                                            positive=True),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            self.fail("field.model", str(exc))

    def initial_omega(self) -> np.ndarray:
        omega = self.vector("initial.omega")
        unit = self.choice("initial.omega_unit", {"rad/s", "deg/s"}, "rad/s")
        return np.deg2rad(omega) if unit == "deg/s" else omega

    def sim_config(self, seed: Optional[int] = None) -> SimConfig:
        body = self.body()
        controller = self.controller(body)
        fld = self.field_model()
        omega = self.initial_omega()
        q = self.vector("initial.q", 4, QUAT_IDENTITY)
        if abs(np.linalg.norm(q) - 1.0) > 1e-9:
            self.fail("initial.q", "must be a unit quaternion")
        duration = self.number("sim.duration", positive=True)
        if duration < controller.dt:
            raise ConfigError(
                f"sim.duration ({duration}) must be >= controller.dt ({controller.dt})",
                key="sim.duration", line=_line_of(self.text, "sim.duration"))
        substeps = self.integer("sim.substeps", 20, minimum=1)
        if seed is None:
            seed = self.integer("sim.seed", 0)
        randomize = self.boolean("initial.randomize_attitude", False)
        return SimConfig(body, controller, fld, omega, duration, q, substeps, seed, randomize)

    def sweep_axis(self, index: int):
        """(axis, values) for sweep axis 1 or 2; None when axis 2 is absent."""
        akey, vkey, rkey = f"sweep.axis{index}", f"sweep.values{index}", f"sweep.range{index}"
        if index == 2 and not self.has(akey):
            for key in (vkey, rkey):
                if self.has(key):
                    self.fail(key, f"given without {akey}")
            return None
        axis = SweepAxis(self.choice(akey, {a.value for a in SweepAxis}))
        if self.has(vkey) == self.has(rkey):
            self.fail(vkey, f"give exactly one of {vkey} or {rkey}")
        if self.has(vkey):
            raw = self.get(vkey)
            if not isinstance(raw, list) or not raw or any(
                    isinstance(v, bool) or not isinstance(v, (int, float)) for v in raw):
                self.fail(vkey, "expected a nonempty list of numbers")
            values = [float(v) for v in raw]
        else:
            raw = self.get(rkey)
            if (not isinstance(raw, list) or len(raw) != 3
                    or isinstance(raw[2], bool) or not isinstance(raw[2], int) or raw[2] < 1):
                self.fail(rkey, "expected [start, stop, count] with integer count >= 1")
            values = [float(v) for v in np.linspace(float(raw[0]), float(raw[1]), raw[2])]
        return axis, values

    def horizon(self) -> Horizon:
        return Horizon(self.choice("sweep.horizon", {h.value for h in Horizon}, "full_run"))
