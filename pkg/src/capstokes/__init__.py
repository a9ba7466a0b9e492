"""Boundary-integral simulation of a capillary interface between two Stokes fluids.

The interface is the graph of a height function ``f`` and evolves by
``df/dt = Psi(f)``, a nonlocal operator built from principal-value integrals.
"""
from .errors import CapStokesError, GridError, OperatorError, FieldError, StepError, ConfigError
from .grid import Grid, GridFn, PhysParams, derivative, hilbert, half_laplacian, interpolate, norms
from .singular import BSpec, apply_B, apply_B0, apply_dB0, benchmark_B
from .geometry import GeometryBundle, geometry, linearization_coeffs
from .evolution import InterfaceState, psi, psi_parts, dpsi, interface_velocity, flat_symbol
from .field import (
    FieldPoint, fundamental_solutions, field_vq, z_eval, z_onesided_predicted,
    pressure_jump_check, velocity_continuity_check, farfield_probe,
)
from .timestep import SimConfig, Diagnostics, diagnostics, step_rk4, step_imex, run

__version__ = "0.1.0"

__all__ = [
    "CapStokesError", "GridError", "OperatorError", "FieldError", "StepError", "ConfigError",
    "Grid", "GridFn", "PhysParams", "derivative", "hilbert", "half_laplacian", "interpolate", "norms",
    "BSpec", "apply_B", "apply_B0", "apply_dB0", "benchmark_B",
    "GeometryBundle", "geometry", "linearization_coeffs",
    "InterfaceState", "psi", "psi_parts", "dpsi", "interface_velocity", "flat_symbol",
    "FieldPoint", "fundamental_solutions", "field_vq", "z_eval", "z_onesided_predicted",
    "pressure_jump_check", "velocity_continuity_check", "farfield_probe",
    "SimConfig", "Diagnostics", "diagnostics", "step_rk4", "step_imex", "run",
]
