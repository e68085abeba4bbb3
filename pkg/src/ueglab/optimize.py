"""Noise-aware one-dimensional minimization of the variational objective.

At fixed density the objective is w(gamma) = t_nloc(gamma) + v_ee(gamma), the
coupling-dependent part of the model energy per particle (the Thomas-Fermi
term is coupling-independent and excluded). Each grid point is sampled by
independent replicated chains; a local quadratic fit around the grid minimum
locates the optimum and its uncertainty. Golden-section-style line searches
are unreliable under stochastic noise, hence the replicated grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cell import SimulationCell
from .conditional import ConditionalModel
from .estimators import nonlocal_kinetic
from .ewald import EwaldParameters, build_ewald
from .parallel import map_indexed
from .sampler import EstimateWithError, merge, run_chain

QUAD_WINDOW = 5  # grid points entering the local quadratic fit


@dataclass(frozen=True)
class GammaScan:
    """Objective scan over the coupling at one density."""

    gammas: np.ndarray
    w_mean: np.ndarray
    w_err: np.ndarray
    t_nloc: list[EstimateWithError]
    v_ee: list[EstimateWithError]
    quad_coeffs: np.ndarray | None
    gamma_star: float
    gamma_star_err: float
    flags: tuple[str, ...]
    chain_flags: tuple[str, ...] = ()
    acceptance: tuple[float, ...] = ()


def fit_scan_minimum(
    gammas: np.ndarray, w: np.ndarray, w_err: np.ndarray
) -> tuple[float, float, np.ndarray | None, list[str]]:
    """Locate the minimum of a noisy scan by a local quadratic fit.

    Returns (gamma_star, gamma_star_err, quadratic coefficients, flags).
    Flags: 'nonconvex_scan' when the local fit has no positive curvature,
    'vertex_outside_bracket' when the vertex falls outside the scanned range
    (the better endpoint is returned), 'minimum_at_bracket_edge' when the
    grid minimum sits on the bracket boundary (widen the bracket),
    'flat_scan_within_noise' when no grid point beats the rest beyond noise.
    """
    gammas = np.asarray(gammas, dtype=float)
    w = np.asarray(w, dtype=float)
    w_err = np.asarray(w_err, dtype=float)
    if len(gammas) < 5:
        raise ValueError("at least 5 grid points required")
    if np.any(np.diff(gammas) <= 0) or gammas[0] < 0:
        raise ValueError("gamma grid must be strictly increasing and >= 0")
    flags: list[str] = []
    imin = int(np.argmin(w))
    spread = float(np.max(w) - np.min(w))
    noise = float(np.median(w_err))
    if noise > 0 and spread < 3.0 * noise:
        flags.append("flat_scan_within_noise")
    if imin in (0, len(gammas) - 1):
        flags.append("minimum_at_bracket_edge")
    lo = max(0, min(imin - QUAD_WINDOW // 2, len(gammas) - QUAD_WINDOW))
    sl = slice(lo, lo + QUAD_WINDOW)
    x, y, s = gammas[sl], w[sl], w_err[sl]
    weights = 1.0 / np.where(s > 0, s, 1.0)
    try:
        coeffs, cov = np.polyfit(x, y, 2, w=weights, cov="unscaled")
    except (np.linalg.LinAlgError, ValueError):
        coeffs, cov = np.polyfit(x, y, 2, w=weights), None
    a, b = coeffs[0], coeffs[1]
    if a <= 0:
        flags.append("nonconvex_scan")
        return float(gammas[imin]), float(gammas[1] - gammas[0]), np.asarray(coeffs), flags
    vertex = -b / (2.0 * a)
    if cov is not None:
        grad = np.array([b / (2.0 * a * a), -1.0 / (2.0 * a), 0.0])
        err = math.sqrt(max(float(grad @ cov @ grad), 0.0))
    else:
        err = float(gammas[1] - gammas[0])
    if vertex < gammas[0] or vertex > gammas[-1]:
        flags.append("vertex_outside_bracket")
        vertex = float(gammas[0] if w[0] < w[-1] else gammas[-1])
    return float(vertex), err, np.asarray(coeffs), flags


def _chain_task(args):
    model, kwargs = args
    return run_chain(model, **kwargs)


def scan_objective(run) -> tuple[EstimateWithError, EstimateWithError, float, float]:
    """(t_nloc, v_ee, w mean, w error) from a merged chain accumulator."""
    t = nonlocal_kinetic(run)
    v = run.estimate("pair_energy")
    return t, v, t.mean + v.mean, math.hypot(t.error, v.error)


def optimize_gamma(
    density: float,
    *,
    n_particles: int,
    gamma_bracket: tuple[float, float],
    grid_size: int = 7,
    replicas: int = 2,
    warmup_steps: int,
    sample_steps: int,
    block_length: int,
    seed: int,
    stream_prefix: tuple = (),
    ewald_params: EwaldParameters | None = None,
    lanes: int = 1,
    **chain_kwargs,
) -> GammaScan:
    """Scan the coupling grid with replicated chains and fit the optimum.

    Chains are independent ((seed, stream_prefix + (grid index, replica))
    streams) and embarrassingly parallel across `lanes`. Replicas at the same
    grid point are merged before the objective is formed.
    """
    lo, hi = gamma_bracket
    if lo < 0 or hi < lo:
        raise ValueError(f"invalid gamma bracket [{lo}, {hi}]")
    if grid_size < 5:
        raise ValueError("grid_size must be >= 5")
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    cell = SimulationCell.from_density(n_particles, density)
    params = ewald_params or build_ewald(cell)
    gammas = np.linspace(lo, hi, grid_size)

    if hi == lo:
        # degenerate bracket: single forced coupling, no fit
        gammas = np.array([lo])
    tasks = []
    for gi, g in enumerate(gammas):
        model = ConditionalModel(gamma=float(g), cell=cell, ewald=params)
        for r in range(replicas):
            kwargs = dict(
                warmup_steps=warmup_steps,
                sample_steps=sample_steps,
                block_length=block_length,
                seed=seed,
                stream=stream_prefix + (gi, r),
                **chain_kwargs,
            )
            tasks.append((model, kwargs))
    runs = map_indexed(_chain_task, tasks, lanes)

    t_list, v_list, w_mean, w_err = [], [], [], []
    chain_flags: list[str] = []
    acceptance: list[float] = []
    for gi in range(len(gammas)):
        merged = runs[gi * replicas].accumulator
        for r in range(1, replicas):
            merged = merge(merged, runs[gi * replicas + r].accumulator)
        for r in range(replicas):
            run = runs[gi * replicas + r]
            acceptance.append(run.acceptance)
            chain_flags.extend(f"{f}[gamma={gammas[gi]:g},replica={r}]" for f in run.flags)
        t, v, wm, we = scan_objective(merged)
        t_list.append(t)
        v_list.append(v)
        w_mean.append(wm)
        w_err.append(we)
    w_mean = np.asarray(w_mean)
    w_err = np.asarray(w_err)

    if len(gammas) == 1:
        return GammaScan(
            gammas=gammas, w_mean=w_mean, w_err=w_err, t_nloc=t_list, v_ee=v_list,
            quad_coeffs=None, gamma_star=float(gammas[0]), gamma_star_err=0.0,
            flags=("degenerate_bracket",), chain_flags=tuple(chain_flags),
            acceptance=tuple(acceptance),
        )
    gamma_star, gamma_err, coeffs, flags = fit_scan_minimum(gammas, w_mean, w_err)
    return GammaScan(
        gammas=gammas,
        w_mean=w_mean,
        w_err=w_err,
        t_nloc=t_list,
        v_ee=v_list,
        quad_coeffs=coeffs,
        gamma_star=gamma_star,
        gamma_star_err=gamma_err,
        flags=tuple(flags),
        chain_flags=tuple(chain_flags),
        acceptance=tuple(acceptance),
    )


def default_gamma_bracket(density: float, scale: float = 4.0) -> tuple[float, float]:
    """Bracket [0, scale * r_s]: the natural coupling grows with the spacing."""
    from .cell import density_to_rs

    return (0.0, scale * density_to_rs(density))
