"""Analytic uniform-gas baselines and the correlation-energy bookkeeping.

Per-particle quantities in hartree. The model kinetic energy of the sampled
distribution is the ideal-gas (Thomas-Fermi) term plus the nonlocal term
(1/8) <|grad_ref log f|^2>; the gradient-free Weizsacker term vanishes for a
uniform density, so the kinetic correlation energy reduces to the nonlocal
term. The potential correlation subtracts the thermodynamic-limit Dirac
exchange of the plane-wave determinant (the Hartree part cancels against the
neutralizing background).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .sampler import BlockAccumulator, EstimateWithError

THOMAS_FERMI_COEFF = 0.3 * (3.0 * math.pi**2) ** (2.0 / 3.0)  # 2.871234...
DIRAC_COEFF = -0.75 * (3.0 / math.pi) ** (1.0 / 3.0)  # -0.738559...


def thomas_fermi(rho: float) -> float:
    """Ideal-gas kinetic energy per particle, (3/10)(3 pi^2)^(2/3) rho^(2/3)."""
    if rho < 0:
        raise ValueError(f"density must be >= 0, got {rho}")
    return THOMAS_FERMI_COEFF * rho ** (2.0 / 3.0)


def dirac_exchange(rho: float) -> float:
    """Plane-wave-determinant exchange per particle, -(3/4)(3/pi)^(1/3) rho^(1/3)."""
    if rho < 0:
        raise ValueError(f"density must be >= 0, got {rho}")
    return DIRAC_COEFF * rho ** (1.0 / 3.0)


def nonlocal_kinetic(acc: BlockAccumulator) -> EstimateWithError:
    """Nonlocal kinetic term (1/8) <|grad_ref log f|^2> from chain samples.

    The accumulator's grad_sq observable already carries the gamma^2 factor,
    so the estimate is exactly zero for gamma = 0 chains. Non-negative by
    construction (mean of squares).
    """
    est = acc.estimate("grad_sq")
    return EstimateWithError(est.mean / 8.0, est.error / 8.0, est.n_blocks)


@dataclass(frozen=True)
class CorrelationBreakdown:
    """Correlation energies per particle at one density."""

    rho: float
    t_thomas_fermi: float
    t_c: EstimateWithError
    v_ee: EstimateWithError
    e_x_dirac: float
    v_c: EstimateWithError
    e_c: EstimateWithError


def assemble(
    rho: float, t_nloc: EstimateWithError, v_ee: EstimateWithError
) -> CorrelationBreakdown:
    """Combine sampled terms into the correlation breakdown.

    t_c = t_nloc, v_c = v_ee - Dirac exchange, e_c = t_c + v_c with the error
    of e_c taken in quadrature.
    """
    e_x = dirac_exchange(rho)
    v_c = EstimateWithError(v_ee.mean - e_x, v_ee.error, v_ee.n_blocks)
    e_c = EstimateWithError(
        t_nloc.mean + v_c.mean,
        math.hypot(t_nloc.error, v_c.error),
        min(t_nloc.n_blocks, v_c.n_blocks),
    )
    return CorrelationBreakdown(
        rho=rho,
        t_thomas_fermi=thomas_fermi(rho),
        t_c=t_nloc,
        v_ee=v_ee,
        e_x_dirac=e_x,
        v_c=v_c,
        e_c=e_c,
    )
