"""Periodic cubic simulation cell and density/Wigner-Seitz conversions.

Conventions: cubic cell of edge L with positions wrapped into [0, L)^3,
minimum-image displacements in [-L/2, L/2) per component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def density_to_rs(rho: float) -> float:
    """Wigner-Seitz radius r_s = (3 / (4 pi rho))^(1/3) in bohr."""
    if rho <= 0:
        raise ValueError(f"density must be positive, got {rho}")
    return (3.0 / (4.0 * math.pi * rho)) ** (1.0 / 3.0)


def rs_to_density(rs: float) -> float:
    """Electron density rho = 3 / (4 pi r_s^3) in e/bohr^3."""
    if rs <= 0:
        raise ValueError(f"Wigner-Seitz radius must be positive, got {rs}")
    return 3.0 / (4.0 * math.pi * rs**3)


@dataclass(frozen=True)
class SimulationCell:
    """Cubic cell of edge `edge_length` (bohr) holding `n_particles` electrons."""

    edge_length: float
    n_particles: int

    def __post_init__(self):
        if self.edge_length <= 0:
            raise ValueError(f"edge_length must be positive, got {self.edge_length}")
        if self.n_particles < 1:
            raise ValueError(f"n_particles must be >= 1, got {self.n_particles}")

    @classmethod
    def from_density(cls, n_particles: int, density: float) -> "SimulationCell":
        if density <= 0:
            raise ValueError(f"density must be positive, got {density}")
        return cls(edge_length=(n_particles / density) ** (1.0 / 3.0), n_particles=n_particles)

    @classmethod
    def from_wigner_seitz(cls, n_particles: int, rs: float) -> "SimulationCell":
        return cls.from_density(n_particles, rs_to_density(rs))

    @property
    def volume(self) -> float:
        return self.edge_length**3

    @property
    def density(self) -> float:
        return self.n_particles / self.volume

    @property
    def wigner_seitz(self) -> float:
        return density_to_rs(self.density)


def minimum_image(displacement: np.ndarray, cell: SimulationCell | float) -> np.ndarray:
    """Wrap displacement components into [-L/2, L/2).

    Accepts a single 3-vector or any array whose last axis is the coordinate
    axis. The half-open convention maps +L/2 to -L/2.
    """
    L = cell.edge_length if isinstance(cell, SimulationCell) else float(cell)
    d = np.asarray(displacement, dtype=float)
    return d - L * np.floor(d / L + 0.5)


def wrap_positions(positions: np.ndarray, cell: SimulationCell | float) -> np.ndarray:
    """Wrap absolute positions into [0, L)^3."""
    L = cell.edge_length if isinstance(cell, SimulationCell) else float(cell)
    p = np.asarray(positions, dtype=float)
    return p - L * np.floor(p / L)
