"""Closed-loop discrete-time detumbling simulation and parameter sweeps.

At every control instant the harness samples the body-frame field, computes
a dipole moment, and holds that moment fixed in the body frame while the
rigid-body equations are integrated across the interval with RK4. By
default the torque inside the interval is re-evaluated as m x b(t), so the
field turning past the held moment is captured. ``hold_torque`` freezes the
torque at its start-of-interval value instead.
"""

from __future__ import annotations

import enum
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .control import (
    Algorithm,
    ControllerConfig,
    bdot_moment,
    cap_moment,
    magnetic_torque,
    omega_cross_b_moment,
)
from .dynamics import (
    QUAT_IDENTITY,
    AttitudeState,
    NonFiniteStateError,
    SpacecraftBody,
    kinetic_energy,
    random_quaternion,
    rk4_step,
    rotate_to_body,
)
from .geomag import FieldModel, field_inertial

# Stand-in 3U CubeSat inertia [kg m^2]; not mission data.
CUBESAT_3U_INERTIA = np.diag([0.02, 0.09, 0.09])

ENERGY_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class SimConfig:
    body: SpacecraftBody
    controller: ControllerConfig
    field: FieldModel
    initial_omega: np.ndarray
    duration: float
    initial_q: np.ndarray = field(default_factory=lambda: QUAT_IDENTITY.copy())
    substeps: int = 20
    seed: int = 0
    randomize_attitude: bool = False

    def __post_init__(self):
        object.__setattr__(self, "initial_omega", np.asarray(self.initial_omega, dtype=float).reshape(3))
        q = np.asarray(self.initial_q, dtype=float).reshape(4)
        if abs(np.linalg.norm(q) - 1.0) > 1e-9:
            raise ValueError(f"initial_q must be a unit quaternion, |q| = {np.linalg.norm(q)}")
        object.__setattr__(self, "initial_q", q)
        if not self.duration >= self.controller.dt:
            raise ValueError(
                f"duration ({self.duration}) must be at least controller.dt ({self.controller.dt})")
        if int(self.substeps) != self.substeps or self.substeps < 1:
            raise ValueError(f"substeps must be a positive integer, got {self.substeps}")
        if not np.all(np.isfinite(self.initial_omega)):
            raise ValueError("initial_omega must be finite")

    @property
    def n_steps(self) -> int:
        return int(np.floor(self.duration / self.controller.dt + 1e-9))

    def start_attitude(self) -> np.ndarray:
        if self.randomize_attitude:
            return random_quaternion(np.random.default_rng(self.seed))
        return self.initial_q


@dataclass(eq=False)
class Telemetry:
    """One row per control step (values at the start of the step) plus the final state."""

    t: np.ndarray
    omega: np.ndarray
    b_body: np.ndarray
    moment: np.ndarray
    torque: np.ndarray
    energy: np.ndarray
    final_t: float
    final_omega: np.ndarray
    final_q: np.ndarray
    final_energy: float

    def __len__(self):
        return len(self.t)

    @property
    def omega_norm(self) -> np.ndarray:
        return np.linalg.norm(self.omega, axis=1)

    def energy_series(self) -> np.ndarray:
        """Energy at every control instant, including the final one."""
        return np.append(self.energy, self.final_energy)

    def energy_violations(self, rtol: float = ENERGY_RTOL) -> int:
        """Number of control steps over which kinetic energy rose beyond roundoff."""
        e = self.energy_series()
        return int(np.sum(np.diff(e) > rtol * e[:-1]))

    def energy_monotone(self, rtol: float = ENERGY_RTOL) -> bool:
        return self.energy_violations(rtol) == 0

    def average_angular_acceleration(self) -> float:
        return average_angular_acceleration(self)


class SimulationAborted(RuntimeError):
    """The integrator hit a non-finite state. Carries the telemetry recorded so far."""

    def __init__(self, step: int, t: float, telemetry: Telemetry, reason: str):
        super().__init__(f"simulation aborted at step {step} (t={t:g} s): {reason}")
        self.step = step
        self.t = t
        self.telemetry = telemetry


def _command(ctrl: ControllerConfig, omega, b_body, b_prev) -> np.ndarray:
    if ctrl.algorithm is Algorithm.OMEGA_CROSS_B:
        m = omega_cross_b_moment(omega, b_body, ctrl.k_c)
    elif b_prev is None:
        # no previous sample yet
        m = np.zeros(3)
    else:
        m = bdot_moment(b_body, b_prev, ctrl.dt, ctrl.k_c)
    return cap_moment(m, ctrl.moment_cap)


def run_detumble(config: SimConfig) -> Telemetry:
    """Simulate the closed loop for ``config.duration`` seconds."""
    ctrl, body, fld = config.controller, config.body, config.field
    n = config.n_steps
    h = ctrl.dt / config.substeps

    ts = np.empty(n)
    omegas, bs, ms, torques = (np.empty((n, 3)) for _ in range(4))
    energy = np.empty(n)

    state = AttitudeState(config.start_attitude(), config.initial_omega, 0.0)
    b_prev = None

    def partial(k: int) -> Telemetry:
        return Telemetry(ts[:k].copy(), omegas[:k].copy(), bs[:k].copy(), ms[:k].copy(),
                         torques[:k].copy(), energy[:k].copy(), state.t, state.omega.copy(),
                         state.q.copy(), kinetic_energy(state.omega, body))

    for k in range(n):
        b_body = rotate_to_body(state.q, field_inertial(fld, state.t))
        m = _command(ctrl, state.omega, b_body, b_prev)
        m.setflags(write=False)
        torque0 = magnetic_torque(m, b_body)

        ts[k] = state.t
        omegas[k] = state.omega
        bs[k] = b_body
        ms[k] = m
        torques[k] = torque0
        energy[k] = kinetic_energy(state.omega, body)

        if ctrl.hold_torque:
            def torque_fn(s, _tau=torque0):
                return _tau
        else:
            def torque_fn(s, _m=m):
                return magnetic_torque(_m, rotate_to_body(s.q, field_inertial(fld, s.t)))

        try:
            for _ in range(config.substeps):
                state = rk4_step(state, torque_fn, h, body)
        except NonFiniteStateError as exc:
            raise SimulationAborted(k, float(ts[k]), partial(k + 1), str(exc)) from exc
        # pin the clock to the control grid so rows stay exact multiples of dt
        state = replace(state, t=(k + 1) * ctrl.dt)
        b_prev = b_body

    return partial(n)


def average_angular_acceleration(telemetry: Telemetry) -> float:
    """(|omega_final| - |omega_initial|) / elapsed time [rad/s^2]; negative means detumbling."""
    if len(telemetry) < 1:
        raise ValueError("telemetry has no rows")
    elapsed = telemetry.final_t - telemetry.t[0]
    if not elapsed > 0:
        raise ValueError("telemetry spans no time")
    return float((np.linalg.norm(telemetry.final_omega) - np.linalg.norm(telemetry.omega[0])) / elapsed)


class SweepAxis(str, enum.Enum):
    INITIAL_OMEGA_MAG = "initial_omega_mag"
    DT = "dt"
    K_C = "k_c"


class Horizon(str, enum.Enum):
    ONE_INTERVAL = "one_interval"
    FULL_RUN = "full_run"


@dataclass(frozen=True)
class SweepRow:
    values: tuple
    measured: float
    error: Optional[str] = None


def apply_axis(config: SimConfig, axis: SweepAxis, value: float) -> SimConfig:
    """Return ``config`` with one swept parameter replaced."""
    axis = SweepAxis(axis)
    value = float(value)
    if not value > 0 and not (axis is SweepAxis.K_C and value == 0):
        raise ValueError(f"{axis.value} must be positive, got {value}")
    if axis is SweepAxis.INITIAL_OMEGA_MAG:
        w = config.initial_omega
        n = np.linalg.norm(w)
        if n == 0:
            raise ValueError("cannot scale a zero initial_omega; give it a direction")
        return replace(config, initial_omega=w * (value / n))
    if axis is SweepAxis.DT:
        ctrl = replace(config.controller, dt=value)
        return replace(config, controller=ctrl, duration=max(config.duration, value))
    return replace(config, controller=replace(config.controller, k_c=value))


def measure(config: SimConfig, horizon: Horizon) -> float:
    """One-interval change of |omega|, or average angular acceleration over the run."""
    if Horizon(horizon) is Horizon.ONE_INTERVAL:
        tel = run_detumble(replace(config, duration=config.controller.dt))
        return float(np.linalg.norm(tel.final_omega) - np.linalg.norm(tel.omega[0]))
    return average_angular_acceleration(run_detumble(config))


def _evaluate(job) -> SweepRow:
    base, axes, values, horizon, seed = job
    try:
        cfg = base
        for axis, value in zip(axes, values):
            cfg = apply_axis(cfg, axis, value)
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        return SweepRow(tuple(values), measure(cfg, horizon))
    except (ValueError, SimulationAborted) as exc:
        return SweepRow(tuple(values), float("nan"), str(exc))


def _row_seeds(base: SimConfig, n: int) -> list:
    if not base.randomize_attitude:
        return [None] * n
    children = np.random.SeedSequence(base.seed).spawn(n)
    return [int(c.generate_state(1)[0]) for c in children]


def _run_jobs(jobs: list, threads: int) -> list[SweepRow]:
    if threads <= 1 or len(jobs) <= 1:
        return [_evaluate(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        # map preserves input order regardless of completion order
        return list(pool.map(_evaluate, jobs, chunksize=max(1, len(jobs) // (4 * threads))))


def sweep_1d(base: SimConfig, axis: SweepAxis, values: Sequence[float],
             horizon: Horizon = Horizon.FULL_RUN, threads: int = 1) -> list[SweepRow]:
    """Measure one quantity per value of a single swept parameter."""
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    axis, horizon = SweepAxis(axis), Horizon(horizon)
    seeds = _row_seeds(base, len(values))
    jobs = [(base, (axis,), (v,), horizon, s) for v, s in zip(values, seeds)]
    return _run_jobs(jobs, threads)


def sweep_2d(base: SimConfig, axis1: SweepAxis, axis2: SweepAxis,
             values1: Sequence[float], values2: Sequence[float],
             horizon: Horizon = Horizon.FULL_RUN, threads: int = 1) -> list[SweepRow]:
    """Full factorial grid; rows ordered with ``axis2`` varying fastest."""
    values1, values2 = list(values1), list(values2)
    if not values1 or not values2:
        raise ValueError("sweep grids must be nonempty")
    axis1, axis2 = SweepAxis(axis1), SweepAxis(axis2)
    if axis1 is axis2:
        raise ValueError("sweep axes must differ")
    grid = list(itertools.product(values1, values2))
    seeds = _row_seeds(base, len(grid))
    jobs = [(base, (axis1, axis2), pair, Horizon(horizon), s) for pair, s in zip(grid, seeds)]
    return _run_jobs(jobs, threads)


def grid_array(rows: list[SweepRow], n1: int, n2: int) -> np.ndarray:
    """Reshape sweep_2d rows into an (n1, n2) array of measured values."""
    return np.array([r.measured for r in rows]).reshape(n1, n2)
