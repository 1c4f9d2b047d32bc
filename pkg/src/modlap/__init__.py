"""Iterated discrete Laplacians on the square lattice under modulus schedules."""
from .lattice import (DIAG, MOORE, VON_NEUMANN, GridState, ModulusSchedule,
                      NeighborhoodStencil, Trajectory, evolve, iterate, laplacian,
                      make_seed, modulus_at, parse_schedule, stencil_by_name,
                      stencil_from_mask, step, support_bounds)

__version__ = "0.1.0"

__all__ = [
    "DIAG", "MOORE", "VON_NEUMANN", "GridState", "ModulusSchedule", "NeighborhoodStencil",
    "Trajectory", "evolve", "iterate", "laplacian", "make_seed", "modulus_at",
    "parse_schedule", "stencil_by_name", "stencil_from_mask", "step", "support_bounds",
]
