"""Boltzmann-like conditional distribution over electron configurations.

The sampling weight is f proportional to exp(-gamma * sum_{i<j} v_E(r_i, r_j))
with gamma >= 0 an inverse-energy coupling (1/hartree) and v_E the periodic
Ewald pair potential. The normalization constant is position-independent in a
uniform system and is never evaluated: it cancels in Metropolis ratios and in
the gradient with respect to the reference particle (index 0 by convention).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ewald
from .cell import SimulationCell, wrap_positions
from .ewald import EwaldParameters


def as_configuration(positions: np.ndarray, cell: SimulationCell) -> np.ndarray:
    """Validate and wrap an (N, 3) position array into the cell."""
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise ValueError(f"configuration must have shape (N, 3), got {pos.shape}")
    if len(pos) != cell.n_particles:
        raise ValueError(
            f"configuration has {len(pos)} particles, cell expects {cell.n_particles}"
        )
    return wrap_positions(pos, cell)


@dataclass(frozen=True)
class ConditionalModel:
    """Coupling, cell and electrostatics defining the sampling distribution."""

    gamma: float
    cell: SimulationCell
    ewald: EwaldParameters

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")

    def log_weight(self, positions: np.ndarray) -> float:
        return log_weight(positions, self)

    def reference_gradient(self, positions: np.ndarray) -> np.ndarray:
        return reference_gradient(positions, self)

    def move_deltas(
        self, positions: np.ndarray, index: int, new_position: np.ndarray
    ) -> tuple[float, float]:
        """(d log-weight, d pair-energy) for moving one particle.

        Reference implementation via two full pair sums; the production chain
        uses an equivalent incremental kernel.
        """
        trial = positions.copy()
        trial[index] = new_position
        d_pair = ewald.pair_energy(trial, self.ewald, self.cell) - ewald.pair_energy(
            positions, self.ewald, self.cell
        )
        return -self.gamma * d_pair, d_pair


def log_weight(positions: np.ndarray, model: ConditionalModel) -> float:
    """log f up to its configuration-independent constant.

    Returns -gamma * sum_{i<j} v_E(r_i, r_j); exact for Metropolis ratios.
    """
    pos = as_configuration(positions, model.cell)
    if model.gamma == 0.0:
        # still validate non-coincidence through the pair sum
        ewald.pair_energy(pos, model.ewald, model.cell)
        return 0.0
    return -model.gamma * ewald.pair_energy(pos, model.ewald, model.cell)


def reference_gradient(positions: np.ndarray, model: ConditionalModel) -> np.ndarray:
    """Gradient of log f with respect to the reference particle (index 0).

    Equals gamma times the Ewald force on particle 0; its squared magnitude
    feeds the nonlocal kinetic estimator.
    """
    pos = as_configuration(positions, model.cell)
    if model.gamma == 0.0:
        ewald.pair_energy(pos, model.ewald, model.cell)
        return np.zeros(3)
    return model.gamma * ewald.force_on_particle(pos, 0, model.ewald, model.cell)
