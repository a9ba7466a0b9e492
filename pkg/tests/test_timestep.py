import json
import math

import numpy as np
import pytest

from capstokes.errors import ConfigError, StepError
from capstokes.evolution import InterfaceState, flat_symbol
from capstokes.grid import Grid, GridFn, PhysParams, read_csv
from capstokes.timestep import (
    SimConfig, cn_factor, diagnostics, imex_update, linear_rate, mode_amplitude, run, step_imex, step_rk4,
    write_run,
)


@pytest.fixture(scope="module")
def g64():
    return Grid.centered(2 * np.pi, 64, "periodic")


def _gauss(g, amp=0.4):
    return GridFn.from_function(g, lambda x: amp * np.exp(-2 * x**2))


def test_equilibrium_is_fixed(g64):
    st = InterfaceState(GridFn.zeros(g64))
    out = step_rk4(st, 0.1)
    assert np.all(out.f.values == 0) and out.time == pytest.approx(0.1)
    out, R = step_imex(st, 0.1)
    assert np.all(out.f.values == 0)
    out, _ = step_imex(out, 0.1, R)
    assert np.all(out.f.values == 0)


def test_rk4_linear_mode(g64):
    eps, dt, k = 1e-6, 0.05, 3
    st = InterfaceState(GridFn.from_function(g64, lambda x: eps * np.cos(k * x)))
    ratio = mode_amplitude(step_rk4(st, dt).f, k) / eps
    assert ratio == pytest.approx(math.exp(flat_symbol(PhysParams(), k) * dt), abs=1e-8)


def _final(g, f0, dt, t_end, scheme):
    return run(SimConfig(g, t_end=t_end, dt=dt, scheme=scheme, snapshot_every=10**6), f0).final.f.values


@pytest.mark.parametrize("scheme,steps,min_order", [("rk4", (4, 8, 16), 3.6), ("imex", (16, 32, 64), 1.95)])
def test_convergence_order(g64, scheme, steps, min_order):
    f0 = _gauss(g64)
    T = 0.4
    ref = _final(g64, f0, T / 256, T, "rk4")
    errs = [np.max(np.abs(_final(g64, f0, T / n, T, scheme) - ref)) for n in steps]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    # the step-halving order approaches its asymptotic value from below
    assert orders[-1] >= min_order, (errs, orders)
    assert orders[-1] >= orders[0] - 0.1


def test_cn_factor_on_linear_regime(g64):
    # with the remainder switched off the update is the scalar CN factor per mode
    dt = 0.3
    params = PhysParams()
    f = np.cos(5 * g64.nodes)
    zero = np.zeros(g64.n)
    out = imex_update(f, zero, zero, g64, params, dt)
    z = (params.sigma * 5 / (4 * params.mu)) * dt
    assert np.max(np.abs(out - cn_factor(z) * f)) < 1e-12
    assert linear_rate(g64, params)[5] == pytest.approx(1.25)


def test_imex_requires_periodic():
    g = Grid.centered(10.0, 64, "line")
    with pytest.raises(ConfigError, match="bad-config"):
        SimConfig(g, scheme="imex")
    with pytest.raises(StepError, match="periodic-only"):
        step_imex(InterfaceState(GridFn.zeros(g)), 0.1)


@pytest.mark.parametrize("kw", [dict(t_end=0.0), dict(dt=-1.0), dict(dt="fast"), dict(scheme="euler"),
                                dict(snapshot_every=0), dict(blowup_factor=1.0)])
def test_bad_config(kw, g64):
    with pytest.raises(ConfigError, match="bad-config"):
        SimConfig(g64, **kw)


def test_auto_dt_and_schedule(g64):
    cfg = SimConfig(g64, t_end=1.0)
    assert cfg.auto_dt() == pytest.approx(0.5 * g64.dx * 4)
    n, dt = cfg.schedule()
    assert n * dt == pytest.approx(1.0) and dt <= cfg.auto_dt()
    n, dt = SimConfig(g64, t_end=1.0, dt=0.25).schedule()
    assert (n, dt) == (4, 0.25)


def test_zero_initial_data_run(g64):
    res = run(SimConfig(g64, t_end=0.5), GridFn.zeros(g64))
    assert res.status == "completed"
    assert all(np.all(s.f.values == 0) for s in res.trajectory)


def test_semiflow_property(g64):
    f0 = _gauss(g64)
    dt = 0.05
    whole = run(SimConfig(g64, t_end=0.5, dt=dt), f0).final
    first = run(SimConfig(g64, t_end=0.2, dt=dt), f0).final
    second = run(SimConfig(g64, t_end=0.3, dt=dt), first.f, time0=first.time).final
    assert np.max(np.abs(whole.f.values - second.f.values)) <= 1e-10
    assert second.time == pytest.approx(0.5)


def test_diagnostics_values(g64):
    d = diagnostics(InterfaceState(GridFn.zeros(g64)))
    assert d.mass == 0 and d.energy == 0 and d.alpha_min == pytest.approx(0.25)
    d = diagnostics(InterfaceState(_gauss(g64)))
    assert d.energy > 0 and d.max_abs_f == pytest.approx(0.4)


def test_conservation_and_dissipation(g64):
    f0 = _gauss(g64)
    res = run(SimConfig(g64, t_end=1.0), f0)
    mass = np.array([d.mass for d in res.diagnostics])
    energy = np.array([d.energy for d in res.diagnostics])
    assert np.max(np.abs(mass - mass[0])) <= 1e-4 * g64.span * 0.4
    assert np.all(np.diff(energy) <= 1e-8 * energy[0])


def test_smoothing_of_rough_data():
    g = Grid.centered(2 * np.pi, 128, "periodic")
    rng = np.random.default_rng(0)
    k = np.arange(1, 40)
    coef = rng.normal(size=(2, k.size)) / k**1.2
    f0 = GridFn(g, 0.02 * (coef[0] @ np.cos(np.outer(k, g.nodes)) + coef[1] @ np.sin(np.outer(k, g.nodes))))
    res = run(SimConfig(g, t_end=10 * SimConfig(g).auto_dt()), f0)
    tail = [np.sum(np.abs(np.fft.rfft(s.f.values)[20:]) ** 2) for s in res.trajectory]
    assert len(tail) == 11
    assert np.all(np.diff(tail) < 0)


def test_blow_up_is_flagged(g64):
    # a wildly unstable explicit step makes the monitored norm explode
    f0 = GridFn.from_function(g64, lambda x: 1e-3 * np.cos(30 * x))
    res = run(SimConfig(g64, t_end=50.0, dt=1.0), f0)
    assert res.status == "blow-up-suspected"
    assert res.steps < 50


def test_write_run(tmp_path, g64):
    res = run(SimConfig(g64, t_end=0.2, dt=0.05, snapshot_every=2), _gauss(g64))
    files = write_run(res, tmp_path)
    names = sorted(p.split("/")[-1] for p in files)
    assert names == ["diagnostics.csv", "snap_00000.csv", "snap_00001.csv", "snap_00002.csv", "summary.json"]
    diag = read_csv(tmp_path / "diagnostics.csv")
    assert list(diag) == ["t", "mass", "energy", "max_abs_f", "hs_proxy", "dt", "alpha_min"]
    assert list(read_csv(tmp_path / "snap_00001.csv")) == ["xi", "f"]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["status"] == "completed" and summary["steps"] == 4
