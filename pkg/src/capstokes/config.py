"""Flat ``key = value`` run configuration.

Example::

    grid.mode = periodic
    grid.length = 6.283185307179586
    grid.n = 256
    params.sigma = 1
    params.mu = 1
    init.kind = cosine        # gaussian | cosine | file
    init.amplitude = 1e-3
    init.k = 2
    time.t_end = 1
    time.dt = auto
    time.scheme = rk4
    output.dir = out

Lines starting with ``#`` are ignored, as is anything after `` #``.
"""
from __future__ import annotations

import hashlib
import os

import numpy as np

from .errors import ConfigError
from .grid import Grid, GridFn, PhysParams, load_gridfn
from .timestep import SimConfig

OUTPUT_ENV = "CAPSTOKES_OUTPUT_DIR"

REQUIRED = ("grid.mode", "params.sigma", "params.mu", "init.kind", "time.t_end", "output.dir")
KNOWN = set(REQUIRED) | {
    "grid.n", "grid.length", "grid.xmin", "grid.xmax",
    "init.amplitude", "init.k", "init.width", "init.center", "init.phase", "init.path",
    "time.dt", "time.scheme", "time.snapshot_every", "time.blowup_factor", "time.hs_index",
}


def parse_text(text, source="<config>"):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(" #", 1)[0].strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("bad-config", f"{source}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN:
            raise ConfigError("bad-config", f"{source}:{lineno}: unknown key '{key}'")
        if key in out:
            raise ConfigError("bad-config", f"{source}:{lineno}: duplicate key '{key}'")
        out[key] = val
    return out


def read_config(path):
    with open(path) as fh:
        text = fh.read()
    cfg = parse_text(text, str(path))
    cfg["_hash"] = hashlib.sha256(text.encode()).hexdigest()
    cfg["_dir"] = os.path.dirname(os.path.abspath(path))
    if os.environ.get(OUTPUT_ENV):
        cfg["output.dir"] = os.environ[OUTPUT_ENV]
    return cfg


def require(cfg, key):
    if key not in cfg or cfg[key] == "":
        raise ConfigError("missing-key", f"missing required key '{key}'")
    return cfg[key]


def _num(cfg, key, default=None, kind=float):
    if key not in cfg:
        if default is None:
            require(cfg, key)
        return default
    try:
        return kind(cfg[key])
    except ValueError:
        raise ConfigError("bad-value", f"key '{key}': cannot read {cfg[key]!r} as {kind.__name__}") from None


def check_required(cfg, keys=REQUIRED):
    for key in keys:
        require(cfg, key)


def build_grid(cfg):
    mode = require(cfg, "grid.mode")
    n = _num(cfg, "grid.n", kind=int)
    if "grid.xmin" in cfg or "grid.xmax" in cfg:
        return Grid(_num(cfg, "grid.xmin"), _num(cfg, "grid.xmax"), n, mode)
    return Grid.centered(_num(cfg, "grid.length"), n, mode)


def build_params(cfg):
    return PhysParams(mu=_num(cfg, "params.mu"), sigma=_num(cfg, "params.sigma"))


def build_initial(cfg):
    """Initial profile and its grid from the ``init.*`` keys."""
    kind = require(cfg, "init.kind")
    if kind == "file":
        path = require(cfg, "init.path")
        if not os.path.isabs(path):
            path = os.path.join(cfg.get("_dir", "."), path)
        return load_gridfn(path, mode=require(cfg, "grid.mode"))
    grid = build_grid(cfg)
    amp = _num(cfg, "init.amplitude")
    if kind == "gaussian":
        width = _num(cfg, "init.width", 1.0)
        c = _num(cfg, "init.center", 0.0)
        return GridFn.from_function(grid, lambda x: amp * np.exp(-((x - c) / width) ** 2))
    if kind == "cosine":
        k = _num(cfg, "init.k", 1.0)
        ph = _num(cfg, "init.phase", 0.0)
        return GridFn.from_function(grid, lambda x: amp * np.cos(k * x + ph))
    raise ConfigError("bad-value", f"key 'init.kind': unknown kind {kind!r}")


def build_sim(cfg, threads=1):
    check_required(cfg)
    f0 = build_initial(cfg)
    dt = cfg.get("time.dt", "auto")
    if dt != "auto":
        dt = _num(cfg, "time.dt")
    sim = SimConfig(
        grid=f0.grid,
        params=build_params(cfg),
        t_end=_num(cfg, "time.t_end"),
        dt=dt,
        scheme=cfg.get("time.scheme", "rk4"),
        snapshot_every=_num(cfg, "time.snapshot_every", 1, int),
        blowup_factor=_num(cfg, "time.blowup_factor", 1e3),
        hs_index=_num(cfg, "time.hs_index", 1.75),
        threads=threads,
    )
    return sim, f0


def echo(cfg):
    return {k: v for k, v in sorted(cfg.items()) if not k.startswith("_")}
