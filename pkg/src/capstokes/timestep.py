"""Time integration of ``df/dt = Psi(f)`` with diagnostics and a blow-up monitor."""
from __future__ import annotations

import json
import math
import os
import time as _time
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import StepError, ConfigError
from .evolution import InterfaceState, psi_values, diffusion_coefficient
from .geometry import omega_of
from .grid import Grid, GridFn, PhysParams, derivative_values, integrate, hs_proxy_values, write_csv

RK4, IMEX = "rk4", "imex"
CFL = 0.5
#: Sobolev index of the monitored norm (above the critical 3/2)
HS_INDEX = 1.75


@dataclass(frozen=True)
class SimConfig:
    grid: Grid
    params: PhysParams = field(default_factory=PhysParams)
    t_end: float = 1.0
    dt: object = "auto"
    scheme: str = RK4
    snapshot_every: int = 1
    blowup_factor: float = 1e3
    hs_index: float = HS_INDEX
    threads: int = 1

    def __post_init__(self):
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ConfigError("bad-config", f"t_end must be positive, got {self.t_end}")
        if self.dt != "auto":
            try:
                ok = float(self.dt) > 0 and math.isfinite(float(self.dt))
            except (TypeError, ValueError):
                ok = False
            if not ok:
                raise ConfigError("bad-config", f"dt must be positive or 'auto', got {self.dt!r}")
        if self.scheme not in (RK4, IMEX):
            raise ConfigError("bad-config", f"unknown scheme {self.scheme!r}")
        if self.scheme == IMEX and not self.grid.periodic:
            raise ConfigError("bad-config", "imex needs a periodic grid")
        if int(self.snapshot_every) != self.snapshot_every or self.snapshot_every < 1:
            raise ConfigError("bad-config", "snapshot_every must be a positive integer")
        if self.blowup_factor <= 1:
            raise ConfigError("bad-config", "blowup_factor must exceed 1")

    def auto_dt(self):
        return CFL * self.grid.dx * 4 * self.params.mu / self.params.sigma

    def schedule(self):
        """Number of uniform steps and their size (``dt`` is shrunk to divide ``t_end``)."""
        dt = self.auto_dt() if self.dt == "auto" else float(self.dt)
        steps = self.t_end / dt
        n = int(round(steps)) if abs(steps - round(steps)) < 1e-9 * max(1.0, steps) else int(math.ceil(steps))
        n = max(n, 1)
        return n, self.t_end / n


@dataclass(frozen=True)
class Diagnostics:
    time: float
    mass: float
    energy: float
    max_abs_f: float
    hs_proxy: float
    dt_used: float
    alpha_min: float

    def row(self):
        return [self.time, self.mass, self.energy, self.max_abs_f, self.hs_proxy, self.dt_used, self.alpha_min]


DIAG_HEADER = ("t", "mass", "energy", "max_abs_f", "hs_proxy", "dt", "alpha_min")


def diagnostics(state: InterfaceState, dt_used=0.0, hs_index=HS_INDEX) -> Diagnostics:
    grid = state.grid
    f = state.f.values
    fp = derivative_values(f, grid, 1)
    return Diagnostics(
        time=float(state.time),
        mass=float(integrate(f, grid)),
        energy=float(integrate(omega_of(fp) - 1.0, grid)),
        max_abs_f=float(np.max(np.abs(f))),
        hs_proxy=hs_proxy_values(f, grid, hs_index),
        dt_used=float(dt_used),
        alpha_min=float(np.min(diffusion_coefficient(state.f, state.params).values)),
    )


def _finite(v, stage):
    if not np.all(np.isfinite(v)):
        raise StepError("step-diverged", f"non-finite values in {stage}")
    return v


def _check_dt(dt):
    if not dt > 0:
        raise StepError("bad-dt", f"dt must be positive, got {dt}")


def rk4_values(f, grid, params, dt, threads=1):
    rhs = lambda u: _finite(psi_values(u, grid, params, threads), "stage")  # noqa: E731
    k1 = rhs(f)
    k2 = rhs(f + 0.5 * dt * k1)
    k3 = rhs(f + 0.5 * dt * k2)
    k4 = rhs(f + dt * k3)
    return _finite(f + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), "update")


def step_rk4(state: InterfaceState, dt, threads=1) -> InterfaceState:
    """One classical fourth-order Runge-Kutta step."""
    _check_dt(dt)
    out = rk4_values(state.f.values, state.grid, state.params, dt, threads)
    return state.with_values(out, state.time + dt)


def linear_rate(grid: Grid, params: PhysParams):
    """Rate ``sigma |k| / (4 mu)`` on the rfft wavenumbers (Nyquist included)."""
    k = 2 * np.pi * np.fft.rfftfreq(grid.n, d=grid.dx)
    return params.sigma * k / (4 * params.mu)


def cn_factor(z):
    """Crank-Nicolson amplification ``(1 - z/2)/(1 + z/2)`` for decay ``z = rate*dt``."""
    z = np.asarray(z, dtype=float)
    return (1 - 0.5 * z) / (1 + 0.5 * z)


def linear_part(f, grid, params):
    """``-sigma/(4 mu) |D| f``."""
    F = np.fft.rfft(f)
    return np.fft.irfft(-linear_rate(grid, params) * F, n=grid.n)


def remainder_values(f, grid, params, threads=1):
    return psi_values(f, grid, params, threads) - linear_part(f, grid, params)


def imex_update(f, R, R_prev, grid, params, dt):
    """CN on the flat part plus the (3/2, -1/2) extrapolated remainder."""
    z = linear_rate(grid, params) * dt
    F = np.fft.rfft(f)
    Rx = 1.5 * np.fft.rfft(R) - 0.5 * np.fft.rfft(R_prev)
    new = ((1 - 0.5 * z) * F + dt * Rx) / (1 + 0.5 * z)
    return _finite(np.fft.irfft(new, n=grid.n), "update")


def step_imex(state: InterfaceState, dt, prev_remainder=None, threads=1):
    """One CN/AB2 step; returns ``(new_state, remainder_at_state)``.

    Without ``prev_remainder`` the step is bootstrapped with RK4.
    """
    _check_dt(dt)
    grid, params = state.grid, state.params
    if not grid.periodic:
        raise StepError("periodic-only", "imex needs a periodic grid")
    f = state.f.values
    R = _finite(remainder_values(f, grid, params, threads), "remainder")
    if prev_remainder is None:
        out = rk4_values(f, grid, params, dt, threads)
    else:
        out = imex_update(f, R, np.asarray(prev_remainder), grid, params, dt)
    return state.with_values(out, state.time + dt), R


class IMEXStepper:
    """Stateful wrapper holding the previous remainder."""

    def __init__(self, threads=1):
        self.threads = threads
        self.prev = None

    def __call__(self, state, dt):
        new, self.prev = step_imex(state, dt, self.prev, self.threads)
        return new


@dataclass
class RunResult:
    trajectory: list
    diagnostics: list
    status: str
    steps: int
    dt: float
    wall_time: float
    message: str = ""

    @property
    def final(self) -> InterfaceState:
        return self.trajectory[-1]


def run(config: SimConfig, f0: GridFn, time0=0.0) -> RunResult:
    """Integrate ``f0`` to ``t_end``, keeping snapshots every ``snapshot_every`` steps."""
    if f0.grid != config.grid:
        raise ConfigError("bad-config", "initial profile lives on a different grid")
    n_steps, dt = config.schedule()
    state = InterfaceState(f0, config.params, time0)
    d0 = diagnostics(state, 0.0, config.hs_index)
    traj, diags = [state], [d0]
    limit = config.blowup_factor * d0.hs_proxy
    step = RK4 if config.scheme == RK4 else IMEXStepper(config.threads)
    status, message = "completed", ""
    t_start = _time.perf_counter()
    done = 0
    for i in range(1, n_steps + 1):
        try:
            if config.scheme == RK4:
                new = step_rk4(state, dt, config.threads)
            else:
                new = step(state, dt)
        except StepError as exc:
            status, message = "blow-up-suspected", str(exc)
            break
        state = InterfaceState(new.f, config.params, time0 + i * dt)
        done = i
        d = diagnostics(state, dt, config.hs_index)
        last = i == n_steps
        if i % config.snapshot_every == 0 or last:
            traj.append(state)
            diags.append(d)
        if not math.isfinite(d.hs_proxy) or (d0.hs_proxy > 0 and d.hs_proxy > limit):
            if traj[-1] is not state:
                traj.append(state)
                diags.append(d)
            status, message = "blow-up-suspected", f"hs_proxy {d.hs_proxy:.3e} exceeds {limit:.3e}"
            break
    return RunResult(traj, diags, status, done, dt, _time.perf_counter() - t_start, message)


def write_run(result: RunResult, outdir):
    """Snapshots ``snap_#####.csv``, ``diagnostics.csv`` and ``summary.json``; returns the file list."""
    os.makedirs(outdir, exist_ok=True)
    files = []
    for i, st in enumerate(result.trajectory):
        p = os.path.join(outdir, f"snap_{i:05d}.csv")
        write_csv(p, {"xi": st.grid.nodes, "f": st.f.values})
        files.append(p)
    p = os.path.join(outdir, "diagnostics.csv")
    rows = np.array([d.row() for d in result.diagnostics])
    write_csv(p, {name: rows[:, j] for j, name in enumerate(DIAG_HEADER)})
    files.append(p)
    p = os.path.join(outdir, "summary.json")
    summary = {
        "status": result.status,
        "steps": result.steps,
        "dt": result.dt,
        "wall_time": result.wall_time,
        "message": result.message,
        "snapshot_times": [float(s.time) for s in result.trajectory],
        "final": asdict(result.diagnostics[-1]),
    }
    with open(p, "w") as fh:
        json.dump(summary, fh, indent=2)
    files.append(p)
    return files


def mode_amplitude(f: GridFn, k):
    """Amplitude of the ``cos/sin(k xi)`` content of a periodic profile."""
    g = f.grid
    F = np.fft.rfft(f.values)
    j = int(round(k * g.span / (2 * np.pi)))
    return 2.0 * abs(F[j]) / g.n
