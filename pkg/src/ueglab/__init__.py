"""ueglab: a desk-scale Monte Carlo laboratory for the uniform electron gas.

Hartree atomic units throughout: lengths in bohr, energies in hartree.
"""

__version__ = "0.1.0"

from .cell import SimulationCell, density_to_rs, minimum_image, rs_to_density
from .conditional import ConditionalModel, log_weight, reference_gradient
from .ewald import (
    EwaldParameters,
    build_ewald,
    converged_ewald,
    force_on_particle,
    forces,
    pair_potential,
    total_pair_energy,
)
from .sampler import (
    BlockAccumulator,
    ChainState,
    EstimateWithError,
    merge,
    metropolis_step,
    run_chain,
)

__all__ = [
    "SimulationCell",
    "density_to_rs",
    "rs_to_density",
    "minimum_image",
    "EwaldParameters",
    "build_ewald",
    "converged_ewald",
    "total_pair_energy",
    "pair_potential",
    "forces",
    "force_on_particle",
    "ConditionalModel",
    "log_weight",
    "reference_gradient",
    "ChainState",
    "BlockAccumulator",
    "EstimateWithError",
    "metropolis_step",
    "run_chain",
    "merge",
    "__version__",
]
