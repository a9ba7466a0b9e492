"""Command-line entry point ``capstokes``.

Subcommands: ``simulate``, ``validate``, ``bench``, ``field``, ``linearize``.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from . import config as cfgmod
from . import evolution as ev
from .errors import CapStokesError, ConfigError
from .field import EXCLUSION_CELLS, distance_to_interface, field_grid
from .grid import Grid, GridFn, PhysParams, write_csv
from .timestep import run, write_run

EXIT_OK, EXIT_ERROR, EXIT_BLOWUP, EXIT_CHECK = 0, 1, 2, 3


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()] if text else []


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()] if text else []


def _hash_inputs(cfg):
    h = hashlib.sha256(cfg["_hash"].encode())
    if cfg.get("init.kind") == "file":
        path = cfg["init.path"]
        if not os.path.isabs(path):
            path = os.path.join(cfg["_dir"], path)
        with open(path, "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()


def write_manifest(outdir, command, cfg, files, wall, extra=None):
    """``manifest.json`` next to the outputs; every listed file must exist."""
    missing = [p for p in files if not os.path.exists(p)]
    if missing:
        raise ConfigError("missing-output", f"outputs not written: {missing}")
    man = {
        "command": command,
        "version": __version__,
        "config": cfgmod.echo(cfg),
        "input_hash": _hash_inputs(cfg),
        "outputs": [os.path.relpath(p, outdir) for p in files],
        "timing": {"wall_seconds": wall},
    }
    if extra:
        man.update(extra)
    path = os.path.join(outdir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(man, fh, indent=2)
    return path


def cmd_simulate(args):
    t0 = time.perf_counter()
    cfg = cfgmod.read_config(args.config)
    sim, f0 = cfgmod.build_sim(cfg, threads=args.threads)
    result = run(sim, f0)
    outdir = cfg["output.dir"]
    files = write_run(result, outdir)
    write_manifest(outdir, "simulate", cfg, files, time.perf_counter() - t0,
                   {"status": result.status, "steps": result.steps})
    print(f"{result.status}: {result.steps} steps, dt={result.dt:.6g}, output in {outdir}")
    if result.message:
        print(result.message, file=sys.stderr)
    return EXIT_OK if result.status == "completed" else EXIT_BLOWUP


def cmd_validate(args):
    from .validation import run_checks

    only = _int_list(args.only) or None
    results = run_checks(args.level, only)
    for r in results:
        print(r.line())
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} checks passed")
    return EXIT_OK if n_pass == len(results) else EXIT_ERROR


def cmd_bench(args):
    from .singular import benchmark_B
    from .validation import complexity_slope, speedup

    n_list = _int_list(args.n)
    threads = _int_list(args.thread_list) or [args.threads]
    if not n_list:
        print("error: empty size list", file=sys.stderr)
        return EXIT_ERROR
    rows = []
    for n in n_list:
        for t in threads:
            rows.append(benchmark_B(n, (3, 2), threads=t, repeat=args.repeat))
    cols = {k: [r[k] for r in rows] for k in ("n", "threads", "seconds", "nodes_per_sec")}
    if args.out:
        write_csv(args.out, cols)
    print("n,threads,seconds,nodes_per_sec")
    for r in rows:
        print(f"{r['n']},{r['threads']},{r['seconds']!r},{r['nodes_per_sec']!r}")
    ok = True
    base = min(threads)
    if len(set(n_list)) >= 2:
        slope = complexity_slope(rows, base)
        good = abs(slope - 2) <= 0.2
        ok &= good
        print(f"# complexity slope {slope:.3f} ({'ok' if good else 'outside 2 +/- 0.2'})", file=sys.stderr)
    if 1 in threads and 4 in threads:
        for n in sorted(set(v for v in n_list if v >= 4096)):
            sp = speedup(rows, n, 4)
            good = sp >= 3
            ok &= good
            print(f"# speedup at n={n}, 4 threads: {sp:.2f} ({'ok' if good else 'below 3'})", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK


def parse_rect(text):
    """``"x1min:x1max:n1,x2min:x2max:n2"`` -> two coordinate arrays."""
    try:
        parts = [p.split(":") for p in text.split(",")]
        (a0, a1, an), (b0, b1, bn) = parts
        return (np.linspace(float(a0), float(a1), int(an)), np.linspace(float(b0), float(b1), int(bn)))
    except ValueError:
        raise ConfigError("bad-rect", f"expected x1min:x1max:n1,x2min:x2max:n2, got {text!r}") from None


def cmd_field(args):
    t0 = time.perf_counter()
    cfg = cfgmod.read_config(args.config)
    cfgmod.check_required(cfg, ("grid.mode", "params.sigma", "params.mu", "output.dir"))
    if args.profile:
        cfg["init.kind"], cfg["init.path"] = "file", os.path.abspath(args.profile)
    f = cfgmod.build_initial(cfg)
    state = ev.InterfaceState(f, cfgmod.build_params(cfg))
    X1, X2 = parse_rect(args.rect)
    P1, P2 = (a.ravel() for a in np.meshgrid(X1, X2, indexing="ij"))
    dist = distance_to_interface(f, P1, P2)
    keep = dist >= EXCLUSION_CELLS * f.grid.dx * (1 - 1e-9)
    vals = field_grid(state, P1[keep], P2[keep]) if keep.any() else np.zeros((0, 3))
    outdir = cfg["output.dir"]
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, args.out)
    write_csv(path, {"x1": P1[keep], "x2": P2[keep], "v1": vals[:, 0], "v2": vals[:, 1], "q": vals[:, 2]})
    skipped = int((~keep).sum())
    write_manifest(outdir, "field", cfg, [path], time.perf_counter() - t0,
                   {"probes": int(keep.size), "skipped": skipped})
    print(f"wrote {int(keep.sum())} probes to {path}; skipped {skipped} inside the {EXCLUSION_CELLS:g}-cell band")
    return EXIT_OK


def cmd_linearize(args):
    params = PhysParams(mu=args.mu, sigma=args.sigma)
    g = Grid.centered(2 * np.pi, args.n, "periodic")
    zero = ev.InterfaceState(GridFn.zeros(g), params)
    ks = _int_list(args.k)
    if not ks or max(ks) >= args.n // 2:
        raise ConfigError("bad-k", "need wavenumbers 1 <= k < n/2")
    rows = []
    for k in ks:
        c = np.cos(k * g.nodes)
        d = ev.dpsi(zero, GridFn(g, c), threads=args.threads).values
        rows.append((k, float(d @ c) / float(c @ c), ev.flat_symbol(params, k)))
    cols = {"k": [r[0] for r in rows], "measured_symbol": [r[1] for r in rows], "exact_symbol": [r[2] for r in rows]}
    if args.out:
        write_csv(args.out, cols)
    print("k,measured_symbol,exact_symbol")
    for k, m, e in rows:
        print(f"{k},{m!r},{e!r}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="capstokes", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=1, help="worker threads for the O(N^2) kernels")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate an interface from a config file")
    s.add_argument("config")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("validate", help="run the acceptance checks")
    s.add_argument("level", choices=("quick", "full"), nargs="?", default="quick")
    s.add_argument("--only", help="comma-separated check ids")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("bench", help="time B0_(3,2) across sizes and thread counts")
    s.add_argument("--n", default="1024,2048,4096,8192", help="comma-separated sizes")
    s.add_argument("--thread-list", default="", help="comma-separated thread counts (default: --threads)")
    s.add_argument("--repeat", type=int, default=2)
    s.add_argument("--out", help="also write the table to this CSV file")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("field", help="export velocity and pressure on a probe lattice")
    s.add_argument("config")
    s.add_argument("--rect", required=True, help="x1min:x1max:n1,x2min:x2max:n2")
    s.add_argument("--profile", help="snapshot CSV overriding init.*")
    s.add_argument("--out", default="field.csv", help="file name inside output.dir")
    s.set_defaults(func=cmd_field)

    s = sub.add_parser("linearize", help="probe the flat-state symbol through dpsi")
    s.add_argument("--k", default="1,2,4")
    s.add_argument("--n", type=int, default=256)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_linearize)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (CapStokesError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
