"""Right-hand side ``Psi`` of the interface evolution ``df/dt = Psi(f)``.

``Psi`` is assembled from the operators ``B^0_{k,2}(f)``, ``k = 0..3``, acting
on combinations of ``f'`` and ``phi_i(f)``.  The on-interface velocity is
coded separately from the density ``g`` so that the identity
``Psi = -f' v1 + v2`` is a genuine cross-check of the two formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import a1_of, a2_of, phi1_of, phi2_of
from .grid import GridFn, PhysParams, check_same_grid, check_support, derivative_values
from .singular import b0_apply, db0_apply


@dataclass(frozen=True)
class InterfaceState:
    f: GridFn
    params: PhysParams = field(default_factory=PhysParams)
    time: float = 0.0

    def __post_init__(self):
        if self.time < 0:
            raise ValueError("time must be non-negative")

    @property
    def grid(self):
        return self.f.grid

    def with_values(self, values, time=None):
        return replace(self, f=GridFn(self.grid, values), time=self.time if time is None else time)


def _b0_family(grid, f, requests, threads):
    """``{k: [h, ...]} -> {k: [B^0_{k,2}(f)[h], ...]}``."""
    out = {}
    for k, hs in requests.items():
        res = b0_apply(grid, f, k, 2, np.array(hs), threads)
        out[k] = list(res)
    return out


def _combos(fp, p1, p2):
    return (
        p1 + fp * p2,
        3 * fp * p1 - p2,
        fp * p1 + p2,
        fp * p1 - 3 * p2,
    )


def psi_parts_values(f, grid, threads=1):
    fp = derivative_values(f, grid, 1)
    u1, u2, u3, u4 = _combos(fp, phi1_of(fp), phi2_of(fp))
    B = _b0_family(grid, f, {0: [u1, u3], 1: [u2, u1], 2: [u1, u4], 3: [u3, u1]}, threads)
    psi1 = B[0][0] - B[2][0] + B[1][0] + B[3][0]
    psi2 = -B[0][1] + B[1][1] - B[3][1] + B[2][1]
    return fp, psi1, psi2


def psi_parts(f: GridFn, threads=1):
    """The two nonlinear building blocks ``Psi_1(f)``, ``Psi_2(f)``."""
    _, p1, p2 = psi_parts_values(f.values, f.grid, threads)
    return {"psi1": GridFn(f.grid, p1), "psi2": GridFn(f.grid, p2)}


def capillary_speed(params: PhysParams):
    return params.sigma / (4 * math.pi * params.mu)


def psi_values(f, grid, params, threads=1):
    fp, p1, p2 = psi_parts_values(f, grid, threads)
    c = capillary_speed(params)
    return c * (p2 - fp * p1)


def psi(state: InterfaceState, threads=1) -> GridFn:
    """``Psi(f) = sigma/(4 pi mu) * (Psi_2(f) - f' Psi_1(f))``."""
    check_support(state.f)
    return GridFn(state.grid, psi_values(state.f.values, state.grid, state.params, threads))


def interface_velocity(state: InterfaceState, threads=1):
    """Trace of the single-layer velocity on the interface, written in terms of ``g``."""
    grid = state.grid
    f = state.f.values
    fp = derivative_values(f, grid, 1)
    g1 = -phi1_of(fp)
    g2 = phi2_of(fp)
    w1 = g1 - fp * g2
    B = _b0_family(
        grid, f,
        {0: [w1, fp * g1 - g2], 1: [3 * fp * g1 + g2, w1], 2: [w1, fp * g1 + 3 * g2], 3: [fp * g1 - g2, w1]},
        threads,
    )
    c = capillary_speed(state.params)
    v1 = c * ((B[2][0] - B[0][0]) - B[1][0] - B[3][0])
    v2 = c * (B[0][1] + (B[3][1] - B[1][1]) - B[2][1])
    return {"v1": GridFn(grid, v1), "v2": GridFn(grid, v2)}


def dpsi_values(f, h, grid, params, threads=1):
    fp = derivative_values(f, grid, 1)
    hp = derivative_values(h, grid, 1)
    p1, p2 = phi1_of(fp), phi2_of(fp)
    dp1, dp2 = a1_of(fp) * hp, a2_of(fp) * hp
    u1, u2, u3, u4 = _combos(fp, p1, p2)
    du1 = dp1 + hp * p2 + fp * dp2
    du2 = 3 * (hp * p1 + fp * dp1) - dp2
    du3 = hp * p1 + fp * dp1 + dp2
    du4 = hp * p1 + fp * dp1 - 3 * dp2

    # product rule: each B^0_{k,2}(f)[u] contributes dB^0[h][u] + B^0[du]
    def term(k, u, du):
        return (db0_apply(grid, f, k, 2, h, np.array([u]), threads)[0]
                + b0_apply(grid, f, k, 2, np.array([du]), threads)[0])

    t0u1 = term(0, u1, du1)
    t2u1 = term(2, u1, du1)
    dpsi1 = t0u1 - t2u1 + term(1, u2, du2) + term(3, u3, du3)
    dpsi2 = -term(0, u3, du3) + term(1, u1, du1) - term(3, u1, du1) + term(2, u4, du4)
    _, psi1, _ = psi_parts_values(f, grid, threads)
    c = capillary_speed(params)
    return c * (-hp * psi1 - fp * dpsi1 + dpsi2)


def dpsi(state: InterfaceState, h: GridFn, threads=1) -> GridFn:
    """Directional (Frechet) derivative of ``Psi`` at ``state.f`` along ``h``."""
    grid = check_same_grid(state.f, h)
    return GridFn(grid, dpsi_values(state.f.values, h.values, grid, state.params, threads))


def flat_symbol(params: PhysParams, k):
    """Fourier symbol ``-sigma |k| / (4 mu)`` of the linearization at ``f = 0``."""
    if np.any(np.asarray(k) < 0):
        raise ValueError("k must be non-negative")
    val = -params.sigma * np.asarray(k, dtype=float) / (4 * params.mu)
    return float(val) if val.ndim == 0 else val


def diffusion_coefficient(f: GridFn, params: PhysParams):
    """Local coefficient ``sigma/(4 mu) (a2 + f' a1)`` of the principal part; always positive."""
    fp = derivative_values(f.values, f.grid, 1)
    return GridFn(f.grid, params.sigma / (4 * params.mu) * (a2_of(fp) + fp * a1_of(fp)))
