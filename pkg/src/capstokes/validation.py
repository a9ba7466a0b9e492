"""Acceptance checks, shared by ``capstokes validate`` and the test-suite.

Each check returns a :class:`CheckResult` with the measured quantity, the
tolerance it is held to and a short free-form detail string.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import evolution as ev
from . import field as fe
from .geometry import geometry
from .grid import Grid, GridFn, PhysParams
from .singular import apply_B, benchmark_B
from .timestep import SimConfig, run, mode_amplitude


@dataclass
class CheckResult:
    id: int
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} [{self.id:2d}] {self.name}: measured={self.measured:.3e} tol={self.tolerance:.1e} {self.detail}".rstrip()


def _periodic(n, length=2 * np.pi):
    return Grid.centered(length, n, "periodic")


def _bump(n=3201, length=40.0, amp=0.3):
    g = Grid.centered(length, n, "line")
    return ev.InterfaceState(GridFn.from_function(g, lambda x: amp * np.exp(-x**2)))


def check_hilbert(ks=(1, 3, 7)):
    g = _periodic(512)
    err = 0.0
    for k in ks:
        h = GridFn.from_function(g, lambda x: np.cos(k * x))
        out = apply_B((0, 0), [], [], h).values
        err = max(err, float(np.max(np.abs(out - np.pi * np.sin(k * g.nodes))) / np.pi))
    return CheckResult(1, "Hilbert identity B_00 = pi H", err, 1e-6, err <= 1e-6, f"k={list(ks)}")


def measured_symbols(ks=(1, 2, 4), n=256, params=PhysParams(), eps=1e-6):
    """Symbol of the flat linearization from ``dpsi`` and from ``Psi(eps h)/eps``."""
    g = _periodic(n)
    zero = ev.InterfaceState(GridFn.zeros(g), params)
    out = []
    for k in ks:
        c = np.cos(k * g.nodes)
        d = ev.dpsi(zero, GridFn(g, c)).values
        p = ev.psi(zero.with_values(eps * c)).values / eps
        cc = float(c @ c)
        out.append((k, float(d @ c) / cc, float(p @ c) / cc))
    return out


def check_flat_symbol(params=PhysParams()):
    rows = measured_symbols(params=params)
    err = max(max(abs(a - ev.flat_symbol(params, k)), abs(b - ev.flat_symbol(params, k))) for k, a, b in rows)
    return CheckResult(2, "flat-state symbol -sigma k/(4 mu)", err, 1e-3, err <= 1e-3, "k=1,2,4")


def check_linear_decay():
    t0 = time.perf_counter()
    g = _periodic(256)
    f0 = GridFn.from_function(g, lambda x: 1e-3 * np.cos(2 * x))
    res = run(SimConfig(g, t_end=1.0), f0)
    ts = np.array([s.time for s in res.trajectory])
    amp = np.array([mode_amplitude(s.f, 2) for s in res.trajectory])
    rate = -np.polyfit(ts, np.log(amp), 1)[0]
    wall = time.perf_counter() - t0
    rel = abs(rate - 0.5) / 0.5
    ok = rel <= 0.02 and wall < 30 and res.status == "completed"
    return CheckResult(3, "linear decay rate of k=2 mode", rel, 0.02, ok, f"rate={rate:.6f} runtime={wall:.1f}s")


def random_profile(grid, rng, amp=0.4, modes=4):
    x = 2 * np.pi * (grid.nodes - grid.xmin) / grid.span
    v = np.zeros(grid.n)
    for k in range(1, modes + 1):
        a, b = rng.normal(size=2) / k**2
        v += a * np.cos(k * x) + b * np.sin(k * x)
    return GridFn(grid, amp * v / np.max(np.abs(v)))


def check_frechet(seeds=range(5), eps=1e-4):
    g = _periodic(128)
    worst = 0.0
    for seed in seeds:
        rng = np.random.default_rng(seed)
        f, h = random_profile(g, rng), random_profile(g, rng, amp=1.0)
        st = ev.InterfaceState(f)
        d = ev.dpsi(st, h).values
        fd = (ev.psi(st.with_values(f.values + eps * h.values)).values
              - ev.psi(st.with_values(f.values - eps * h.values)).values) / (2 * eps)
        worst = max(worst, float(np.max(np.abs(d - fd)) / np.max(np.abs(fd))))
    return CheckResult(4, "Frechet derivative vs central FD", worst, 1e-4, worst <= 1e-4, "5 seeds")


PROBE_XI = (0.0, 0.3, -0.3, 1.5, -1.5)


def check_pressure_jump(state=None):
    state = state or _bump()
    worst = 0.0
    for xi in PROBE_XI:
        r = fe.pressure_jump_check(state, xi)
        worst = max(worst, abs(r["jump_num"] - r["jump_exact"]) / abs(r["jump_exact"]))
    return CheckResult(5, "pressure jump [q] = sigma kappa", worst, 0.02, worst <= 0.02, f"xi={list(PROBE_XI)}")


def check_velocity_continuity(state=None):
    state = state or _bump()
    vg = ev.interface_velocity(state)
    scale = float(np.max(np.hypot(vg["v1"].values, vg["v2"].values)))
    jump = avg = 0.0
    for xi in PROBE_XI:
        r = fe.velocity_continuity_check(state, xi, vg)
        jump = max(jump, r["jump"] / scale)
        avg = max(avg, r["trace_error"] / scale)
    ok = jump <= 0.01 and avg <= 0.02
    return CheckResult(6, "velocity continuity and trace formula", max(jump / 0.01, avg / 0.02), 1.0, ok,
                       f"jump/max|v|={jump:.2e} (<=1e-2) trace/max|v|={avg:.2e} (<=2e-2)")


def check_z_limits(state=None, xis=(0.5, -1.0)):
    state = state or _bump()
    f = state.f
    phi = GridFn.from_function(f.grid, lambda x: np.exp(-(x - 0.2) ** 2))
    worst = 0.0
    fp = geometry(f).fprime
    for xi in xis:
        j = fe.nearest_node(f.grid, xi)
        jumps = fe.jump_vector(fp.values[j])
        phi_xi = abs(phi.values[j])
        for k in range(4):
            for side in (1, -1):
                num = fe.onesided_z(f, phi, k, xi, side)
                pred = fe.z_onesided_predicted(f, phi, k, xi, side)
                # relative to the jump itself when the two parts of pred nearly cancel
                scale = max(abs(pred), 2 * np.pi * abs(jumps[k]) * phi_xi)
                worst = max(worst, abs(num - pred) / scale)
    return CheckResult(7, "Z_k one-sided limits", worst, 0.02, worst <= 0.02, f"k=0..3 xi={list(xis)}")


def check_scaling(lam=2.0, t_end=0.5, n=128):
    def f0(x):
        return 0.3 * np.cos(x) + 0.15 * np.sin(2 * x + 0.4)

    g = _periodic(n)
    gl = _periodic(n, 2 * np.pi / lam)
    cfg = SimConfig(g, t_end=t_end, dt=t_end / 20)
    cfgl = SimConfig(gl, t_end=t_end / lam, dt=t_end / 20 / lam)
    a = run(cfg, GridFn(g, f0(g.nodes))).final.f.values
    b = run(cfgl, GridFn(gl, f0(lam * gl.nodes) / lam)).final.f.values
    rel = float(np.max(np.abs(lam * b - a)) / np.max(np.abs(a)))
    return CheckResult(8, "scaling invariance lambda=2", rel, 1e-3, rel <= 1e-3)


def check_conservation(t_end=1.0):
    g = _periodic(256, 20.0)
    f0 = GridFn.from_function(g, lambda x: 0.5 * np.exp(-x**2))
    res = run(SimConfig(g, t_end=t_end), f0)
    mass = np.array([d.mass for d in res.diagnostics])
    energy = np.array([d.energy for d in res.diagnostics])
    drift = float(np.max(np.abs(mass - mass[0])))
    mass_tol = 1e-4 * g.span * 0.5
    rise = float(np.max(np.diff(energy)))
    e_tol = 1e-8 * energy[0]
    ok = drift <= mass_tol and rise <= e_tol and res.status == "completed"
    return CheckResult(9, "mass conservation and energy decay", drift, mass_tol, ok,
                       f"max energy increase={rise:.2e} (<= {e_tol:.1e})")


def check_farfield(state=None):
    state = state or _bump()
    x2 = np.linspace(10, 100, 10)
    probe = fe.farfield_probe(state, x2)
    v = np.array([s["v"] for s in probe["samples"]])
    q = np.array([s["q"] for s in probe["samples"]])
    mono = bool(np.all(np.diff(v) < 0) and np.all(np.diff(q) < 0))
    ratio = float(q[-1] / q[0])
    ok = mono and ratio < 0.1 and probe["slope"] <= -0.4
    return CheckResult(10, "far-field decay", probe["slope"], -0.4, ok,
                       f"monotone={mono} |q(100)|/|q(10)|={ratio:.2e}")


def check_stokes_residual(state=None, n_probes=10, seed=7):
    state = state or _bump()
    rng = np.random.default_rng(seed)
    worst = 0.0
    count = 0
    while count < n_probes:
        x1, x2 = rng.uniform(-3, 3), rng.uniform(-2, 2)
        if fe.distance_to_interface(state.f, x1, x2).item() < 0.3:
            continue
        r = fe.stokes_residual(state, (x1, x2))
        worst = max(worst, r["momentum"], r["divergence"])
        count += 1
    return CheckResult(11, "Stokes residual at off-interface probes", worst, 1e-4, worst <= 1e-4, f"{n_probes} probes")


def symmetry_errors(n=128, seed=3):
    g = _periodic(n)
    f = random_profile(g, np.random.default_rng(seed))
    st = ev.InterfaceState(f)
    base = ev.psi(st).values
    refl = ev.psi(st.with_values(f.reflected().values)).values
    shift = 17
    tr = ev.psi(st.with_values(f.shifted(shift).values)).values
    vert = ev.psi(st.with_values(f.values + 0.37)).values
    R = g.reflect_index()
    return {
        "reflection": float(np.max(np.abs(refl - base[R]))),
        "translation": float(np.max(np.abs(tr - np.roll(base, shift)))),
        "vertical": float(np.max(np.abs(vert - base))),
    }


def check_symmetry():
    errs = symmetry_errors()
    worst = max(errs.values())
    return CheckResult(12, "reflection/translation/vertical-shift equivariance", worst, 1e-12, worst <= 1e-12,
                       " ".join(f"{k}={v:.1e}" for k, v in errs.items()))


def performance_table(n_list=(1024, 2048, 4096, 8192), thread_list=(1, 4), repeat=3):
    rows = []
    for n in n_list:
        for t in thread_list:
            rows.append(benchmark_B(n, (3, 2), threads=t, repeat=repeat, min_time=0.3))
    return rows


def complexity_slope(rows, threads=1):
    pts = sorted((r["n"], r["seconds"]) for r in rows if r["threads"] == threads)
    if len(pts) < 2:
        return float("nan")
    n, s = np.array(pts).T
    return float(np.polyfit(np.log(n), np.log(s), 1)[0])


def speedup(rows, n, threads):
    t1 = [r["seconds"] for r in rows if r["n"] == n and r["threads"] == 1]
    tp = [r["seconds"] for r in rows if r["n"] == n and r["threads"] == threads]
    if not t1 or not tp:
        return float("nan")
    return t1[0] / tp[0]


def check_performance(rows=None):
    if rows is None:
        rows = performance_table(n_list=(1024, 2048, 4096, 8192), thread_list=(1,))
        rows += performance_table(n_list=(4096,), thread_list=(4,))
    slope = complexity_slope(rows, 1)
    sp = speedup(rows, 4096, 4)
    ok = abs(slope - 2) <= 0.2 and sp >= 3
    return CheckResult(13, "B0_(3,2) complexity and 4-thread speedup", slope, 0.2, ok,
                       f"|slope-2|<=0.2 slope={slope:.3f}; speedup@4096x4={sp:.2f} (>=3)")


CHECKS = {
    1: check_hilbert,
    2: check_flat_symbol,
    3: check_linear_decay,
    4: check_frechet,
    5: check_pressure_jump,
    6: check_velocity_continuity,
    7: check_z_limits,
    8: check_scaling,
    9: check_conservation,
    10: check_farfield,
    11: check_stokes_residual,
    12: check_symmetry,
    13: check_performance,
}

QUICK = (1, 2, 4, 8, 12)


def run_checks(level="full", only=None):
    ids = only if only is not None else (QUICK if level == "quick" else sorted(CHECKS))
    out = []
    for i in ids:
        try:
            out.append(CHECKS[i]())
        except Exception as exc:  # a crash is reported as a failure of that row
            out.append(CheckResult(i, CHECKS[i].__name__, math.nan, math.nan, False, f"error: {exc}"))
    return out
