"""Crouzeix-Raviart optimal control of doubly diffusive Brinkman-Navier-Stokes flow."""

from ._ddopt import (
    ConfigError,
    Mesh,
    NonConvergenceError,
    cavity_coefficients,
    convergence_study,
    eoc,
    project_control,
    read_csv_points,
    run,
    solve_manufactured,
    unit_square_mesh,
)

__all__ = [
    "ConfigError",
    "Mesh",
    "NonConvergenceError",
    "cavity_coefficients",
    "convergence_study",
    "eoc",
    "project_control",
    "read_csv_points",
    "run",
    "solve_manufactured",
    "unit_square_mesh",
]
