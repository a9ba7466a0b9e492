"""Uniform 1-D grids, grid functions and the Fourier-side utilities.

Two modes are supported.  ``line`` samples a compactly supported profile on a
truncated interval of the real line; ``periodic`` samples one period of a
periodic profile and enables spectral differentiation and the Hilbert
transform.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .errors import GridError

LINE = "line"
PERIODIC = "periodic"

#: relative size of the outer band checked for decay in line mode
SUPPORT_BAND = 0.05
SUPPORT_TOL = 1e-10

#: accuracy order of the line-mode finite differences
FD_ORDER = 8


@dataclass(frozen=True)
class Grid:
    """Uniform lattice ``xi_j = xmin + j*dx``, ``j = 0..n-1``, ``dx = (xmax-xmin)/n``."""

    xmin: float
    xmax: float
    n: int
    mode: str = LINE

    def __post_init__(self):
        if self.mode not in (LINE, PERIODIC):
            raise GridError("bad-mode", f"mode must be 'line' or 'periodic', got {self.mode!r}")
        if not (math.isfinite(self.xmin) and math.isfinite(self.xmax)) or self.xmax <= self.xmin:
            raise GridError("bad-grid", "need finite xmax > xmin")
        if int(self.n) != self.n or self.n < 8:
            raise GridError("bad-grid", f"need integer n >= 8, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "xmin", float(self.xmin))
        object.__setattr__(self, "xmax", float(self.xmax))

    @classmethod
    def centered(cls, length, n, mode=LINE):
        """Grid invariant under ``xi -> -xi``.

        Periodic grids start at ``-length/2``.  Line grids are shifted by half a
        cell so that node ``j`` reflects onto node ``n-1-j``.
        """
        dx = length / n
        if mode == PERIODIC:
            xmin = -length / 2
        else:
            xmin = -(n - 1) * dx / 2
        return cls(xmin, xmin + length, n, mode)

    @property
    def periodic(self):
        return self.mode == PERIODIC

    @property
    def span(self):
        return self.xmax - self.xmin

    @property
    def dx(self):
        return self.span / self.n

    @property
    def nodes(self):
        return self.xmin + self.dx * np.arange(self.n)

    def wavenumbers(self):
        """Angular wavenumbers in numpy FFT order (periodic mode)."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def reflect_index(self):
        """Index map realizing ``xi -> -xi`` on a centered grid."""
        j = np.arange(self.n)
        if self.periodic:
            return (-j) % self.n
        return self.n - 1 - j

    def node_index(self, x, tol=1e-9):
        """Index of the node at ``x``; raises if ``x`` is not (close to) a node."""
        t = (x - self.xmin) / self.dx
        j = int(round(t))
        if abs(t - j) > tol:
            raise GridError("off-grid", f"x={x} is not a grid node")
        if self.periodic:
            return j % self.n
        if not 0 <= j < self.n:
            raise GridError("out-of-domain", f"x={x} outside grid")
        return j


@dataclass(frozen=True)
class PhysParams:
    mu: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if not (self.mu > 0 and self.sigma > 0):
            raise GridError("bad-params", "viscosity and surface tension must be positive")


class GridFn:
    """Immutable samples of a real function on a :class:`Grid`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        v = np.array(values, dtype=float)
        if v.shape != (grid.n,):
            raise GridError("bad-shape", f"expected {grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise GridError("non-finite", "grid function values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", v)

    def __setattr__(self, name, value):
        raise AttributeError("GridFn is immutable")

    @classmethod
    def from_function(cls, grid, fn: Callable):
        return cls(grid, fn(grid.nodes))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n))

    def __len__(self):
        return self.grid.n

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __repr__(self):
        return f"GridFn(n={self.grid.n}, mode={self.grid.mode}, max|u|={np.max(np.abs(self.values)):.3g})"

    def _other(self, other):
        if isinstance(other, GridFn):
            check_same_grid(self, other)
            return other.values
        return other

    def __add__(self, other):
        return GridFn(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFn(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return GridFn(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return GridFn(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFn(self.grid, self.values / self._other(other))

    def __neg__(self):
        return GridFn(self.grid, -self.values)

    def shifted(self, nodes):
        """Periodic shift by whole nodes: ``u(xi - nodes*dx)``."""
        if not self.grid.periodic:
            raise GridError("periodic-only", "whole-node shifts need a periodic grid")
        return GridFn(self.grid, np.roll(self.values, nodes))

    def reflected(self):
        return GridFn(self.grid, self.values[self.grid.reflect_index()])


def check_same_grid(*fns):
    """Raise ``grid-mismatch`` unless every GridFn lives on one grid."""
    grids = {fn.grid for fn in fns}
    if len(grids) > 1:
        raise GridError("grid-mismatch", "grid functions live on different grids")
    return fns[0].grid if fns else None


def check_support(u: GridFn, name="f", tol=SUPPORT_TOL):
    """Warn when a line-mode profile does not decay in the outer band.

    Returns True when the condition holds.
    """
    if u.grid.periodic:
        return True
    v = u.values
    scale = np.max(np.abs(v))
    if scale == 0:
        return True
    k = max(1, int(math.ceil(SUPPORT_BAND * len(v))))
    edge = max(np.max(np.abs(v[:k])), np.max(np.abs(v[-k:])))
    ok = edge <= tol * scale
    if not ok:
        warnings.warn(
            f"{name} is not negligible near the line-grid ends "
            f"(|edge|/max = {edge / scale:.2e} > {tol:.0e})",
            stacklevel=2,
        )
    return ok


# ----------------------------------------------------------------------------
# differentiation


@lru_cache(maxsize=None)
def fd_weights(offsets: tuple, order: int):
    """Finite-difference weights for ``d^order/dx^order`` at 0 on unit spacing."""
    x = np.asarray(offsets, dtype=float)
    k = len(x)
    A = np.vander(x, k, increasing=True).T
    rhs = np.zeros(k)
    rhs[order] = math.factorial(order)
    w = np.linalg.solve(A, rhs)
    w.flags.writeable = False
    return w


def _fd_derivative(v, dx, order):
    n = len(v)
    half = FD_ORDER // 2
    central = tuple(range(-half, half + 1))
    # one-sided closures need one extra point per derivative order to keep FD_ORDER
    width = FD_ORDER + order
    if n < width:
        raise GridError("grid-too-coarse", f"{n} nodes cannot carry a {width}-point stencil")
    out = np.zeros(n)
    for wi, off in zip(fd_weights(central, order), central):
        out[half:n - half] += wi * v[half + off:n - half + off]
    for j in list(range(half)) + list(range(n - half, n)):
        start = 0 if j < half else n - width
        wj = fd_weights(tuple(range(start - j, start - j + width)), order)
        out[j] = np.dot(wj, v[start:start + width])
    return out / dx**order


def _spectral_derivative(v, grid, order):
    n = grid.n
    k = 2 * np.pi * np.fft.rfftfreq(n, d=grid.dx)
    mult = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        mult[-1] = 0.0
    return np.fft.irfft(mult * np.fft.rfft(v), n=n)


def derivative_values(v, grid: Grid, order=1):
    if order not in (1, 2):
        raise GridError("bad-order", f"order must be 1 or 2, got {order}")
    if grid.periodic:
        return _spectral_derivative(np.asarray(v, dtype=float), grid, order)
    return _fd_derivative(np.asarray(v, dtype=float), grid.dx, order)


def derivative(u: GridFn, order=1):
    """First or second derivative: spectral (periodic) or 8th-order FD (line)."""
    return GridFn(u.grid, derivative_values(u.values, u.grid, order))


# ----------------------------------------------------------------------------
# Fourier multipliers


def _require_periodic(grid):
    if not grid.periodic:
        raise GridError("periodic-only", "operation needs a periodic grid")


def _rfft_multiplier(u: GridFn, mult):
    n = u.grid.n
    return GridFn(u.grid, np.fft.irfft(mult * np.fft.rfft(u.values), n=n))


def hilbert(u: GridFn):
    """Periodic Hilbert transform, Fourier multiplier ``-i sign(k)``.

    The mean and (for even n) the Nyquist coefficient are mapped to zero.
    """
    _require_periodic(u.grid)
    n = u.grid.n
    mult = np.full(n // 2 + 1, -1j)
    mult[0] = 0.0
    if n % 2 == 0:
        mult[-1] = 0.0
    return _rfft_multiplier(u, mult)


def half_laplacian(u: GridFn):
    """``(-d^2/dxi^2)^{1/2}``, multiplier ``|k|`` (Nyquist dropped to match hilbert o d/dxi)."""
    _require_periodic(u.grid)
    n = u.grid.n
    mult = 2 * np.pi * np.fft.rfftfreq(n, d=u.grid.dx)
    if n % 2 == 0:
        mult = mult.copy()
        mult[-1] = 0.0
    return _rfft_multiplier(u, mult)


# ----------------------------------------------------------------------------
# interpolation and norms


def interpolate(u: GridFn, x: float) -> float:
    """Four-point (cubic Lagrange) interpolation of ``u`` at ``x``."""
    g = u.grid
    t = (x - g.xmin) / g.dx
    jr = round(t)
    if abs(t - jr) < 1e-12:
        if g.periodic:
            return float(u.values[int(jr) % g.n])
        if 0 <= jr < g.n:
            return float(u.values[int(jr)])
    if not g.periodic and not (0.0 <= t <= g.n - 1):
        raise GridError("out-of-domain", f"x={x} outside [{g.xmin}, {g.xmin + (g.n - 1) * g.dx}]")
    j = int(math.floor(t))
    start = j - 1
    if not g.periodic:
        start = min(max(start, 0), g.n - 4)
    s = t - start
    idx = np.arange(start, start + 4)
    vals = u.values[idx % g.n] if g.periodic else u.values[idx]
    nodes = np.arange(4.0)
    w = np.ones(4)
    for a in range(4):
        for b in range(4):
            if a != b:
                w[a] *= (s - nodes[b]) / (nodes[a] - nodes[b])
    return float(np.dot(w, vals))


def integrate(v, grid: Grid):
    """Trapezoid rule; for periodic grids this is the plain rectangle sum."""
    v = np.asarray(v, dtype=float)
    if grid.periodic:
        return grid.dx * float(np.sum(v))
    return grid.dx * float(np.sum(v) - 0.5 * (v[0] + v[-1]))


class Norms(NamedTuple):
    l2: float
    linf: float
    hs_proxy: Callable[[float], float]


def hs_proxy_values(v, grid: Grid, s):
    """``sum (1+k^2)^s |u_k|^2`` scaled so that ``s = 0`` gives ``dx * sum u^2``."""
    v = np.asarray(v, dtype=float)
    if grid.periodic:
        n, length, vv = grid.n, grid.span, v
    else:
        n = 2 * grid.n
        length = n * grid.dx
        vv = np.concatenate([v, np.zeros(grid.n)])
    U = np.fft.fft(vv)
    k = 2 * np.pi * np.fft.fftfreq(n, d=length / n)
    return float(length / n**2 * np.sum((1 + k**2) ** s * np.abs(U) ** 2))


def norms(u: GridFn) -> Norms:
    g = u.grid
    v = u.values
    l2 = math.sqrt(max(integrate(v * v, g), 0.0))
    return Norms(l2=l2, linf=float(np.max(np.abs(v))), hs_proxy=lambda s: hs_proxy_values(v, g, s))


# ----------------------------------------------------------------------------
# CSV


def write_csv(path, columns: dict):
    """Write equal-length numeric columns with round-trip precision."""
    names = list(columns)
    data = [np.asarray(columns[k], dtype=float) for k in names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*data):
            w.writerow([format(float(x), ".17g") for x in row])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    arr = np.array([[float(x) for x in r] for r in body if r], dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


def save_gridfn(u: GridFn, path):
    write_csv(path, {"xi": u.grid.nodes, "value": u.values})


def load_gridfn(path, mode=LINE, value_column="value"):
    """Read a ``xi,<value>`` CSV written by :func:`save_gridfn` (or a snapshot)."""
    cols = read_csv(path)
    xi = cols["xi"]
    if value_column not in cols:
        value_column = [c for c in cols if c != "xi"][0]
    n = len(xi)
    if n < 8:
        raise GridError("bad-grid", f"{path}: need at least 8 rows")
    dx = (xi[-1] - xi[0]) / (n - 1)
    if not np.allclose(np.diff(xi), dx, rtol=1e-9, atol=1e-12 * max(1.0, abs(dx))):
        raise GridError("bad-grid", f"{path}: nodes are not uniform")
    grid = Grid(float(xi[0]), float(xi[0]) + n * dx, n, mode)
    return GridFn(grid, cols[value_column])
