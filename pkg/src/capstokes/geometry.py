"""Pointwise geometry of the graph interface ``xi -> (xi, f(xi))``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridFn, derivative_values, write_csv


def omega_of(fp):
    return np.sqrt(1.0 + fp * fp)


def phi1_of(fp):
    w = omega_of(fp)
    return fp * fp / (w + w * w)


def phi2_of(fp):
    return fp / omega_of(fp)


def a1_of(fp):
    w = omega_of(fp)
    return fp * (2.0 + fp * fp + 2.0 * w) / (w * (w + 1.0 + fp * fp) ** 2)


def a2_of(fp):
    return (1.0 + fp * fp) ** -1.5


@dataclass(frozen=True)
class GeometryBundle:
    fprime: GridFn
    omega: GridFn
    phi1: GridFn
    phi2: GridFn
    g1: GridFn
    g2: GridFn
    kappa: GridFn
    nu1: GridFn
    nu2: GridFn

    def to_csv(self, path):
        grid = self.fprime.grid
        write_csv(path, {
            "xi": grid.nodes,
            "fprime": self.fprime.values,
            "omega": self.omega.values,
            "phi1": self.phi1.values,
            "phi2": self.phi2.values,
            "kappa": self.kappa.values,
            "nu1": self.nu1.values,
            "nu2": self.nu2.values,
        })


def geometry(f: GridFn) -> GeometryBundle:
    """Slope, metric, ``phi_i``, ``g``, curvature and upward unit normal of the graph of ``f``.

    ``g = (omega^-1 - 1, omega^-1 f') = (-phi1, phi2)`` satisfies
    ``kappa * nu = omega^-1 g'``.
    """
    grid = f.grid
    fp = derivative_values(f.values, grid, 1)
    fpp = derivative_values(f.values, grid, 2)
    w = omega_of(fp)
    p1 = phi1_of(fp)
    p2 = phi2_of(fp)
    G = lambda v: GridFn(grid, v)  # noqa: E731
    return GeometryBundle(
        fprime=G(fp),
        omega=G(w),
        phi1=G(p1),
        phi2=G(p2),
        g1=G(-p1),
        g2=G(p2),
        kappa=G(fpp / w**3),
        nu1=G(-fp / w),
        nu2=G(1.0 / w),
    )


def linearization_coeffs(f: GridFn):
    """Coefficients with ``d phi_i(f)[h] = a_i(f) h'``."""
    fp = derivative_values(f.values, f.grid, 1)
    return {"a1": GridFn(f.grid, a1_of(fp)), "a2": GridFn(f.grid, a2_of(fp))}
