"""Velocity and pressure off the interface from the hydrodynamic single-layer potential.

For an interface state ``f`` the field at ``x`` not on the graph is

    (v, q)(x) = -sigma * sum_k int (d_1 + f'(s) d_2)[U^k, P^k](r) g_k(s) ds,
    r = x - (s, f(s)),

with the Stokeslet ``(U^k, P^k)`` and the density ``g = (-phi1, phi2)``.
Quadratures reuse the interface nodes; points closer than ``2*dx`` to the
graph are refused and one-sided boundary values are obtained by Richardson
extrapolation along the normal instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FieldError
from .evolution import InterfaceState, interface_velocity
from .geometry import geometry, omega_of
from .grid import GridFn, interpolate, derivative_values
from .singular import b0_apply

ABOVE, BELOW, ON = "above", "below", "on"
#: probes must stay this many cells away from the graph
EXCLUSION_CELLS = 2.0
#: distances (in cells) used for the one-sided extrapolation
RICHARDSON_CELLS = (8.0, 4.0, 2.0)


@dataclass(frozen=True)
class FieldPoint:
    x1: float
    x2: float
    side: str = ABOVE

    @classmethod
    def locate(cls, f: GridFn, x1, x2):
        """Point tagged with its side of the graph of ``f``."""
        h = height_at(f, x1)
        side = ABOVE if x2 > h else BELOW if x2 < h else ON
        return cls(float(x1), float(x2), side)


def height_at(f: GridFn, x1):
    g = f.grid
    if not g.periodic and not (g.xmin <= x1 <= g.xmin + (g.n - 1) * g.dx):
        return 0.0
    return interpolate(f, x1)


def fundamental_solutions(k, y, mu=1.0):
    """Stokeslet ``(U^k, P^k)`` at ``y != 0`` for a unit point force along ``e_k``."""
    if k not in (1, 2):
        raise FieldError("bad-index", f"k must be 1 or 2, got {k}")
    y1, y2 = float(y[0]), float(y[1])
    r2 = y1 * y1 + y2 * y2
    if r2 == 0.0:
        raise FieldError("singular-point", "Stokeslet is singular at y = 0")
    yk = y1 if k == 1 else y2
    log_term = -0.5 * math.log(r2)  # ln(1/|y|)
    U = np.array([
        (log_term if k == 1 else 0.0) + y1 * yk / r2,
        (log_term if k == 2 else 0.0) + y2 * yk / r2,
    ]) * (-1.0 / (4 * math.pi * mu))
    P = -yk / (2 * math.pi * r2)
    return U, P


def stokeslet_matrix(y, sigma=1.0, mu=1.0):
    """The 3x2 matrix ``-sigma [[U^1, U^2], [P^1, P^2]]``."""
    cols = []
    for k in (1, 2):
        U, P = fundamental_solutions(k, y, mu)
        cols.append([U[0], U[1], P])
    return -sigma * np.array(cols).T


def stokeslet_gradients(r1, r2, mu=1.0):
    """Derivatives of the Stokeslets, arrays broadcast over ``r``.

    Returns ``d[k][i] = (d_i U^k_1, d_i U^k_2, d_i P^k)`` for ``k, i`` in {0, 1}.
    """
    s1, s2 = r1 * r1, r2 * r2
    r4 = (s1 + s2) ** 2
    cu = 1.0 / (4 * math.pi * mu * r4)
    cp = 1.0 / (2 * math.pi * r4)
    d1U1 = (cu * r1 * (s1 - s2), cu * r2 * (s1 - s2), cp * (s1 - s2))
    d2U1 = (cu * r2 * (s2 + 3 * s1), cu * r1 * (s2 - s1), cp * 2 * r1 * r2)
    d1U2 = (cu * r2 * (s1 - s2), cu * r1 * (s1 + 3 * s2), cp * 2 * r1 * r2)
    d2U2 = (cu * r1 * (s2 - s1), cu * r2 * (s2 - s1), cp * (s2 - s1))
    return ((d1U1, d2U1), (d1U2, d2U2))


def _require_line(state_or_f):
    grid = state_or_f.grid
    if grid.periodic:
        raise FieldError("line-only", "field evaluation needs a line-mode interface")
    return grid


def _weights(grid):
    w = np.full(grid.n, grid.dx)
    w[0] = w[-1] = 0.5 * grid.dx
    return w


def _as_points(x1, x2):
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    return np.broadcast_arrays(x1, x2)


def distance_to_interface(f: GridFn, x1, x2):
    """Smallest distance from each point to the interface nodes."""
    s = f.grid.nodes
    x1, x2 = _as_points(x1, x2)
    out = np.empty(x1.shape)
    for i in range(x1.size):
        out.flat[i] = math.sqrt(np.min((x1.flat[i] - s) ** 2 + (x2.flat[i] - f.values) ** 2))
    return out


def _guard(f, x1, x2):
    d = distance_to_interface(f, x1, x2)
    limit = EXCLUSION_CELLS * f.grid.dx * (1 - 1e-9)
    if np.any(d < limit):
        raise FieldError(
            "near-interface",
            f"point within {EXCLUSION_CELLS:g} cells of the interface: use one-sided extrapolation",
        )


def _point_coords(x):
    if isinstance(x, FieldPoint):
        return x.x1, x.x2
    return float(x[0]), float(x[1])


def _field_arrays(state, x1, x2, chunk=256):
    grid = state.grid
    f = state.f.values
    geo = geometry(state.f)
    fp, g1, g2 = geo.fprime.values, geo.g1.values, geo.g2.values
    w = _weights(grid)
    s = grid.nodes
    sigma, mu = state.params.sigma, state.params.mu
    x1, x2 = _as_points(x1, x2)
    X1, X2 = x1.ravel(), x2.ravel()
    out = np.empty((X1.size, 3))
    for lo in range(0, X1.size, chunk):
        r1 = X1[lo:lo + chunk, None] - s[None, :]
        r2 = X2[lo:lo + chunk, None] - f[None, :]
        d = stokeslet_gradients(r1, r2, mu)
        for c in range(3):
            col = 0.0
            for k, gk in enumerate((g1, g2)):
                col = col + (d[k][0][c] + fp * d[k][1][c]) * gk
            out[lo:lo + chunk, c] = -sigma * (col @ w)
    return out.reshape(x1.shape + (3,))


def field_vq(state: InterfaceState, x, guard=True):
    """Velocity and pressure at an off-interface point (derivative-kernel form)."""
    _require_line(state)
    x1, x2 = _point_coords(x)
    if guard:
        _guard(state.f, x1, x2)
    v1, v2, q = _field_arrays(state, x1, x2)[0]
    return {"v": np.array([v1, v2]), "q": float(q)}


def field_grid(state: InterfaceState, x1, x2):
    """Vectorized field at many points; returns an array ``(..., 3)`` of ``v1, v2, q``.

    No proximity guard is applied; callers filter points first.
    """
    _require_line(state)
    return _field_arrays(state, x1, x2)


def field_vq_direct(state: InterfaceState, x):
    """Same field via the Stokeslet itself against ``g'`` (integrated by parts)."""
    grid = _require_line(state)
    x1, x2 = _point_coords(x)
    _guard(state.f, x1, x2)
    geo = geometry(state.f)
    dg = [derivative_values(geo.g1.values, grid, 1), derivative_values(geo.g2.values, grid, 1)]
    w = _weights(grid)
    sigma, mu = state.params.sigma, state.params.mu
    r1 = x1 - grid.nodes
    r2 = x2 - state.f.values
    rr = r1 * r1 + r2 * r2
    lg = -0.5 * np.log(rr)
    c = -1.0 / (4 * math.pi * mu)
    U = [
        (c * (lg + r1 * r1 / rr), c * (r1 * r2 / rr)),
        (c * (r1 * r2 / rr), c * (lg + r2 * r2 / rr)),
    ]
    P = [-r1 / (2 * math.pi * rr), -r2 / (2 * math.pi * rr)]
    v = np.array([-sigma * sum(U[k][j] * dg[k] for k in range(2)) @ w for j in range(2)])
    q = -sigma * float(sum(P[k] * dg[k] for k in range(2)) @ w)
    return {"v": v, "q": q}


def z_eval(f: GridFn, phi: GridFn, n, x, guard=True):
    """``Z_n[phi](x) = int r1^(3-n) r2^n / |r|^4 phi(s) ds``."""
    _require_line(f)
    if n not in (0, 1, 2, 3):
        raise FieldError("bad-index", f"n must be 0..3, got {n}")
    x1, x2 = _point_coords(x)
    if guard:
        _guard(f, x1, x2)
    r1 = x1 - f.grid.nodes
    r2 = x2 - f.values
    kern = r1 ** (3 - n) * r2**n / (r1 * r1 + r2 * r2) ** 2
    return float((kern * phi.values) @ _weights(f.grid))


def jump_vector(fp):
    """Coefficients ``J_k`` with ``{Z_k}^(+/-) = B^0_{k,2}[phi] -/+ 2 pi J_k phi``."""
    w4 = omega_of(fp) ** 4
    return np.array([
        (fp**3 + 3 * fp) / (4 * w4),
        (fp**2 - 1) / (4 * w4),
        (fp**3 - fp) / (4 * w4),
        -(3 * fp**2 + 1) / (4 * w4),
    ])


def z_onesided_predicted(f: GridFn, phi: GridFn, k, xi, side):
    """Predicted limit of ``z_eval`` as ``x -> (xi, f(xi))`` from ``side`` (``+1``/above, ``-1``/below)."""
    sgn = _side_sign(side)
    j = nearest_node(f.grid, xi)
    b0 = b0_apply(f.grid, f.values, k, 2, phi.values[None, :])[0][j]
    fp = derivative_values(f.values, f.grid, 1)[j]
    return float(b0 - sgn * 2 * math.pi * jump_vector(fp)[k] * phi.values[j])


def nearest_node(grid, xi):
    """Index of the lattice node closest to ``xi``."""
    j = int(round((xi - grid.xmin) / grid.dx))
    if grid.periodic:
        return j % grid.n
    if j < 0 or j >= grid.n:
        raise FieldError("out-of-domain", f"xi={xi} outside the grid")
    return j


def _side_sign(side):
    if side in (1, "+", ABOVE):
        return 1
    if side in (-1, "-", BELOW):
        return -1
    raise FieldError("bad-side", f"side must be +/-, got {side!r}")


def richardson(v_far, v_mid, v_near):
    """Limit of ``v(d) = L + c1 d + c2 d^2`` from samples at ``4d, 2d, d``."""
    v_far, v_mid, v_near = (np.asarray(v, dtype=float) for v in (v_far, v_mid, v_near))
    return (8 * v_near - 6 * v_mid + v_far) / 3


def one_sided(fn, f: GridFn, xi, side, cells=RICHARDSON_CELLS, check=True):
    """Extrapolate ``fn(x1, x2)`` to the interface point over ``xi`` along the normal.

    With ``check`` a fourth sample at twice the largest distance gives a second extrapolant from
    the three outer distances; if the two disagree by more than a third of the
    spread of the samples the nearest sample is taken to be polluted.
    """
    sgn = _side_sign(side)
    grid = f.grid
    j = nearest_node(grid, xi)
    fp = derivative_values(f.values, grid, 1)[j]
    w = math.sqrt(1 + fp * fp)
    n1, n2 = -fp / w, 1.0 / w
    x0 = (grid.nodes[j], f.values[j])
    dist = ((2 * cells[0],) if check else ()) + tuple(cells)
    samples = []
    for c in dist:
        d = sgn * c * grid.dx
        samples.append(np.asarray(fn(x0[0] + d * n1, x0[1] + d * n2), dtype=float))
    limit = richardson(*samples[-3:])
    if check:
        outer = richardson(*samples[:3])
        S = np.array(samples)
        spread = float(np.max(np.ptp(S, axis=0)))
        floor = 1e-12 * max(1.0, float(np.max(np.abs(S))))
        if float(np.max(np.abs(limit - outer))) > spread / 3 + floor:
            raise FieldError("extrapolation-unreliable", "one-sided samples are not converging")
    return limit


def onesided_z(f: GridFn, phi: GridFn, k, xi, side):
    return float(one_sided(lambda a, b: z_eval(f, phi, k, (a, b)), f, xi, side))


def onesided_field(state: InterfaceState, xi, side):
    """Extrapolated ``(v1, v2, q)`` on the interface from one side."""
    return one_sided(lambda a, b: _field_arrays(state, a, b)[0], state.f, xi, side)


def pressure_jump_check(state: InterfaceState, xi):
    """``q^+ - q^-`` from two-sided extrapolation next to ``sigma * kappa``."""
    _require_line(state)
    up = onesided_field(state, xi, ABOVE)
    down = onesided_field(state, xi, BELOW)
    j = nearest_node(state.grid, xi)
    kappa = geometry(state.f).kappa.values[j]
    return {"jump_num": float(up[2] - down[2]), "jump_exact": float(state.params.sigma * kappa)}


def velocity_continuity_check(state: InterfaceState, xi, v_gamma=None):
    """Two-sided velocity limits at ``xi`` and their comparison with the trace formula."""
    _require_line(state)
    up = onesided_field(state, xi, ABOVE)[:2]
    down = onesided_field(state, xi, BELOW)[:2]
    if v_gamma is None:
        v_gamma = interface_velocity(state)
    j = nearest_node(state.grid, xi)
    trace = np.array([v_gamma["v1"].values[j], v_gamma["v2"].values[j]])
    avg = 0.5 * (up + down)
    return {
        "jump": float(np.linalg.norm(up - down)),
        "average": avg,
        "trace": trace,
        "trace_error": float(np.linalg.norm(avg - trace)),
    }


def farfield_probe(state: InterfaceState, x2_list, x1=0.0):
    """Field magnitudes along the vertical ray through ``x1`` and the log-log slope of ``|v|``."""
    _require_line(state)
    x2 = np.asarray(x2_list, dtype=float)
    hmax = float(np.max(np.abs(state.f.values)))
    if np.any(np.abs(x2) <= 2 * hmax):
        raise FieldError("too-close", "far-field probes need |x2| > 2 max|f|")
    vals = _field_arrays(state, np.full_like(x2, x1), x2)
    speed = np.hypot(vals[:, 0], vals[:, 1])
    pres = np.abs(vals[:, 2])
    samples = [{"x2": float(a), "v": float(b), "q": float(c)} for a, b, c in zip(x2, speed, pres)]
    slope = float("nan")
    if np.all(speed > 0) and len(x2) >= 2:
        slope = float(np.polyfit(np.log(np.abs(x2)), np.log(speed), 1)[0])
    return {"samples": samples, "slope": slope}


def stokes_residual(state: InterfaceState, x, h=None):
    """Finite-difference residuals of ``mu lap v - grad q`` and ``div v`` at ``x``.

    Both are relative to the size of the individual terms.
    """
    x1, x2 = _point_coords(x)
    if h is None:
        h = 0.05 * distance_to_interface(state.f, x1, x2).item()
    offs = np.array([-2, -1, 0, 1, 2], dtype=float) * h
    X1 = np.concatenate([x1 + offs, np.full(5, x1)])
    X2 = np.concatenate([np.full(5, x2), x2 + offs])
    _guard(state.f, X1, X2)
    F = _field_arrays(state, X1, X2)
    along1, along2 = F[:5], F[5:]
    d1 = (along1[0] - 8 * along1[1] + 8 * along1[3] - along1[4]) / (12 * h)
    d2 = (along2[0] - 8 * along2[1] + 8 * along2[3] - along2[4]) / (12 * h)
    lap = lambda a: (-a[0] + 16 * a[1] - 30 * a[2] + 16 * a[3] - a[4]) / (12 * h * h)  # noqa: E731
    L = lap(along1) + lap(along2)
    mu = state.params.mu
    mom = mu * L[:2] - np.array([d1[2], d2[2]])
    mom_scale = np.linalg.norm(mu * L[:2]) + np.linalg.norm([d1[2], d2[2]])
    div = d1[0] + d2[1]
    div_scale = np.abs(d1[:2]).sum() + np.abs(d2[:2]).sum()
    return {
        "momentum": float(np.linalg.norm(mom) / mom_scale) if mom_scale > 0 else 0.0,
        "divergence": float(abs(div) / div_scale) if div_scale > 0 else 0.0,
    }
