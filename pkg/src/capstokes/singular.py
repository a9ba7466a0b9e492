"""Multilinear principal-value operators ``B_{n,m}``.

For lattice functions on a :class:`~capstokes.grid.Grid` the operator

    B_{n,m}(a_1..a_m)[b_1..b_n, h](xi) =
        PV int h(xi - eta)/eta * prod(d b_i / eta) / prod(1 + (d a_i / eta)^2) d eta,
    d u = u(xi) - u(xi - eta),

is evaluated on the lattice of offsets ``eta = l*dx``.  Offsets ``+l`` and
``-l`` are summed pairwise so that the odd ``1/eta`` part cancels, and the
``l = 0`` node carries the exact limit of the regular part of the integrand,
which makes the rule a plain trapezoid sum of a smooth function.

In periodic mode the integral still runs over the whole real line: the
images ``eta + p*L`` of every lattice offset are summed directly for
``|p| <= P`` and through Hurwitz-zeta tails beyond.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from . import _kernels
from .errors import OperatorError
from .grid import Grid, GridFn, check_same_grid, derivative_values

MAX_ORDER = 8
#: terms kept in the far-image expansion in powers of (A/t)^2
SERIES_TERMS = 8


@dataclass(frozen=True)
class BSpec:
    n: int
    m: int

    def __post_init__(self):
        for v in (self.n, self.m):
            if int(v) != v or v < 0 or v > MAX_ORDER:
                raise OperatorError("unsupported-order", f"need 0 <= n, m <= {MAX_ORDER}, got {self}")

    @classmethod
    def of(cls, spec):
        return spec if isinstance(spec, BSpec) else cls(*spec)


def _canonical(arrays):
    # fixed product order regardless of argument order
    return sorted(arrays, key=lambda v: v.tobytes())


@lru_cache(maxsize=64)
def _tail_table(N, period, n, m, n_img):
    J = SERIES_TERMS if m > 0 else 0
    half = N // 2
    o = np.arange(-half, half + 1)
    x = o / N
    table = np.zeros((len(o), J + 1))
    P1 = n_img + 1
    for k in range(J + 1):
        s = n + 1 + 2 * k
        if s == 1:
            col = (special.digamma(P1 - x) - special.digamma(P1 + x)) / period
        else:
            col = (special.zeta(s, P1 + x) + (-1) ** s * special.zeta(s, P1 - x)) / period**s
        table[:, k] = col
    table[half, :] = 0.0
    table.flags.writeable = False
    return table


def _image_count(a, period):
    if a.shape[0] == 0:
        return 1
    spread = float(np.max(np.ptp(a, axis=1)))
    return max(1, int(math.ceil(4.0 * spread / period - 0.5)))


def _diagonal_term(grid, a, b, H):
    """Limit at eta -> 0 of the integrand minus its 1/eta part."""
    da = [derivative_values(v, grid, 1) for v in a]
    dda = [derivative_values(v, grid, 2) for v in a]
    db = [derivative_values(v, grid, 1) for v in b]
    ddb = [derivative_values(v, grid, 2) for v in b]
    N = grid.n
    prod_db = np.ones(N)
    for v in db:
        prod_db = prod_db * v
    denom = np.ones(N)
    a_sum = np.zeros(N)
    for v1, v2 in zip(da, dda):
        q = 1.0 + v1 * v1
        denom = denom * q
        a_sum = a_sum + v1 * v2 / q
    b_sum = np.zeros(N)
    for i in range(len(b)):
        term = ddb[i]
        for k in range(len(b)):
            if k != i:
                term = term * db[k]
        b_sum = b_sum + term
    coef_h = (-0.5 * b_sum + prod_db * a_sum) / denom
    coef_dh = -prod_db / denom
    dH = np.array([derivative_values(h, grid, 1) for h in H])
    return coef_h * H + coef_dh * dH


def _run_rows(fn, N, threads, *args):
    if threads <= 1 or N < 2 * threads:
        fn(0, N, *args)
        return
    bounds = np.linspace(0, N, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, int(lo), int(hi), *args) for lo, hi in zip(bounds[:-1], bounds[1:])]
        for fut in futures:
            fut.result()


def b_apply(grid: Grid, a, b, H, threads=1):
    """Array-level ``B_{len(b),len(a)}``; ``H`` is a stack of densities (nh, N)."""
    BSpec(len(b), len(a))
    N = grid.n
    a = np.ascontiguousarray(_canonical([np.asarray(v, float) for v in a]), dtype=float).reshape(len(a), N)
    b = np.ascontiguousarray(_canonical([np.asarray(v, float) for v in b]), dtype=float).reshape(len(b), N)
    H = np.ascontiguousarray(np.atleast_2d(np.asarray(H, dtype=float)))
    if H.shape[1] != N:
        raise OperatorError("grid-mismatch", f"density has {H.shape[1]} samples, grid has {N}")
    out = np.empty_like(H)
    if grid.periodic:
        n_img = _image_count(a, grid.span)
        tail = _tail_table(N, grid.span, b.shape[0], a.shape[0], n_img)
        _run_rows(_kernels.b_rows_periodic, N, threads, a, b, H, out, grid.dx, grid.span, n_img, tail)
    else:
        _run_rows(_kernels.b_rows_line, N, threads, a, b, H, out, grid.dx)
    out += _diagonal_term(grid, a, b, H)
    return grid.dx * out


def apply_B(spec, a, b, h: GridFn, threads=1) -> GridFn:
    """``B_{n,m}(a_1..a_m)[b_1..b_n, h]`` on the lattice of ``h``."""
    spec = BSpec.of(spec)
    a, b = list(a), list(b)
    if len(a) != spec.m or len(b) != spec.n:
        raise OperatorError("bad-arity", f"{spec} needs {spec.m} a-slots and {spec.n} b-slots")
    grid = check_same_grid(h, *a, *b)
    out = b_apply(grid, [u.values for u in a], [u.values for u in b], h.values[None, :], threads)
    return GridFn(grid, out[0])


def apply_B0(f: GridFn, spec, h: GridFn, threads=1) -> GridFn:
    """``B^0_{n,m}(f)[h]``: every a- and b-slot filled with ``f``."""
    spec = BSpec.of(spec)
    return apply_B(spec, [f] * spec.m, [f] * spec.n, h, threads)


def b0_apply(grid, f, n, m, H, threads=1):
    return b_apply(grid, [f] * m, [f] * n, H, threads)


def db0_apply(grid, f, n, m, g, H, threads=1):
    """Array-level directional derivative of ``f -> B^0_{n,m}(f)[h]`` along ``g``."""
    H = np.atleast_2d(H)
    out = np.zeros(H.shape)
    if n > 0:
        out += n * b_apply(grid, [f] * m, [f] * (n - 1) + [g], H, threads)
    if m > 0:
        BSpec(n + 2, m + 1)
        out -= 2 * m * b_apply(grid, [f] * (m + 1), [f] * (n + 1) + [g], H, threads)
    return out


def apply_dB0(f: GridFn, spec, g: GridFn, h: GridFn, threads=1) -> GridFn:
    """Frechet derivative of ``f -> B^0_{n,m}(f)[h]`` in direction ``g``:

    ``n B_{n,m}(f..)[g, f.., h] - 2m B_{n+2,m+1}(f..)[g, f.., h]``.
    """
    spec = BSpec.of(spec)
    grid = check_same_grid(f, g, h)
    out = db0_apply(grid, f.values, spec.n, spec.m, g.values, h.values[None, :], threads)
    return GridFn(grid, out[0])


def benchmark_B(n_nodes, spec=(3, 2), threads=1, repeat=1, mode="line", min_time=0.0):
    """Time ``apply_B0`` on a Gaussian profile; returns wall time and throughput."""
    spec = BSpec.of(spec)
    grid = Grid.centered(40.0, n_nodes, mode)
    x = grid.nodes
    f = 0.3 * np.exp(-x**2)
    H = (np.exp(-x**2) * np.cos(x))[None, :]
    warm = Grid.centered(40.0, 64, mode)
    b0_apply(warm, np.zeros(64), spec.n, spec.m, np.zeros((1, 64)), threads)  # compile
    # best of at least `repeat` calls, continued until `min_time` has elapsed
    best, spent, calls = math.inf, 0.0, 0
    while calls < repeat or spent < min_time:
        t0 = time.perf_counter()
        b0_apply(grid, f, spec.n, spec.m, H, threads)
        dt = time.perf_counter() - t0
        best, spent, calls = min(best, dt), spent + dt, calls + 1
    return {
        "n": n_nodes,
        "threads": threads,
        "seconds": best,
        "nodes_per_sec": n_nodes / best,
        "pairs_per_sec": n_nodes * n_nodes / best,
    }
