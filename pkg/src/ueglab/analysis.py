"""Density scans, log-model fits and reference-table ingestion.

The fitted model is y = A + B log(rho) with natural log and rho in e/bohr^3.
Rescaling the density unit shifts A by -B log(c) and leaves B unchanged, so
the unit convention must be pinned for comparability but is otherwise
harmless.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .cell import SimulationCell, density_to_rs, rs_to_density
from .conditional import ConditionalModel
from .entropy import GriddedDensity, fisher_weizsacker, shannon_continuous
from .estimators import CorrelationBreakdown, assemble, nonlocal_kinetic
from .ewald import build_ewald
from .optimize import GammaScan, default_gamma_bracket, optimize_gamma
from .parallel import map_indexed
from .sampler import EstimateWithError, merge, run_chain


@dataclass(frozen=True)
class LogFitResult:
    """Weighted least-squares fit of y = A + B log(rho)."""

    A: float
    B: float
    covariance: np.ndarray  # 2x2, order (A, B)
    r_squared: float
    window: tuple[float, float]
    n_points: int


def fit_log_model(points, window: tuple[float, float] | None = None) -> LogFitResult:
    """Fit y = A + B log(rho) to (rho, y, sigma_y) triples inside `window`.

    Weighted least squares with weights 1/sigma^2; the parameter covariance
    is (X^T W X)^{-1} with the given sigmas taken at face value. R^2 is the
    weighted coefficient of determination.
    """
    pts = [(float(r), float(y), float(s)) for r, y, s in points]
    if window is None:
        rhos = [p[0] for p in pts]
        window = (min(rhos), max(rhos))
    lo, hi = window
    sel = [(r, y, s) for r, y, s in pts if lo <= r <= hi]
    if len(sel) < 3:
        raise ValueError(f"{len(sel)} points in window [{lo}, {hi}]; >= 3 required")
    rho = np.array([p[0] for p in sel])
    y = np.array([p[1] for p in sel])
    sig = np.array([p[2] for p in sel])
    if np.any(rho <= 0):
        raise ValueError("densities must be positive")
    if np.any(sig <= 0):
        raise ValueError("sigma_y must be positive")
    x = np.log(rho)
    if np.ptp(x) == 0.0:
        raise ValueError("singular design: all densities equal")
    X = np.column_stack([np.ones_like(x), x])
    w = 1.0 / sig**2
    XtWX = X.T @ (w[:, None] * X)
    cov = np.linalg.inv(XtWX)
    beta = cov @ (X.T @ (w * y))
    resid = y - X @ beta
    ybar = float(np.sum(w * y) / np.sum(w))
    ss_res = float(np.sum(w * resid**2))
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return LogFitResult(
        A=float(beta[0]),
        B=float(beta[1]),
        covariance=cov,
        r_squared=r2,
        window=(lo, hi),
        n_points=len(sel),
    )


@dataclass(frozen=True)
class DensityScanRecord:
    """Per-density pipeline result."""

    rho: float
    rs: float
    gamma_star: float
    gamma_star_err: float
    breakdown: CorrelationBreakdown
    n_particles: int
    seed: int
    flags: tuple[str, ...]
    gamma_scan: GammaScan
    scan_streams: tuple = ()
    production_streams: tuple = ()
    production_acceptance: tuple = ()

    @property
    def t_c(self) -> EstimateWithError:
        return self.breakdown.t_c

    @property
    def v_c(self) -> EstimateWithError:
        return self.breakdown.v_c

    @property
    def e_c(self) -> EstimateWithError:
        return self.breakdown.e_c


def _production_task(args):
    model, kwargs = args
    return run_chain(model, **kwargs)


def density_scan(densities, config, *, lanes: int | None = None) -> list[DensityScanRecord]:
    """Optimize the coupling and assemble correlation energies per density.

    Deterministic under a fixed master seed: chain streams are keyed by
    (density index, phase, grid index, replica) where phase 0 is the coupling
    scan and phase 1 the production run at the optimum.
    """
    densities = [float(d) for d in densities]
    if any(d <= 0 for d in densities):
        raise ValueError("densities must be positive")
    records = []
    for di, rho in enumerate(densities):
        cell = SimulationCell.from_density(config.n_particles, rho)
        params = build_ewald(
            cell, alpha=config.ewald_alpha_scale / cell.edge_length,
            recip_tol=config.ewald_recip_tol,
        )
        bracket = default_gamma_bracket(rho, config.gamma_bracket_scale)
        scan = optimize_gamma(
            rho,
            n_particles=config.n_particles,
            gamma_bracket=bracket,
            grid_size=config.gamma_grid_size,
            replicas=config.gamma_replicas,
            warmup_steps=config.scan_warmup_steps,
            sample_steps=config.scan_sample_steps,
            block_length=config.block_length,
            seed=config.master_seed,
            stream_prefix=(di, 0),
            ewald_params=params,
            lanes=lanes if lanes is not None else config.lanes,
            measure_every=config.measure_every or None,
        )
        model = ConditionalModel(gamma=scan.gamma_star, cell=cell, ewald=params)
        tasks = [
            (
                model,
                dict(
                    warmup_steps=config.production_warmup_steps,
                    sample_steps=config.production_sample_steps,
                    block_length=config.block_length,
                    seed=config.master_seed,
                    stream=(di, 1, 0, r),
                    measure_every=config.measure_every or None,
                ),
            )
            for r in range(config.production_replicas)
        ]
        runs = map_indexed(
            _production_task, tasks, lanes if lanes is not None else config.lanes
        )
        acc = runs[0].accumulator
        for r in runs[1:]:
            acc = merge(acc, r.accumulator)
        breakdown = assemble(rho, nonlocal_kinetic(acc), acc.estimate("pair_energy"))
        flags = list(scan.flags) + list(scan.chain_flags)
        for r_i, run in enumerate(runs):
            flags.extend(f"{f}[production,replica={r_i}]" for f in run.flags)
        scan_streams = tuple(
            (di, 0, gi, r)
            for gi in range(len(scan.gammas))
            for r in range(config.gamma_replicas)
        )
        records.append(
            DensityScanRecord(
                rho=rho,
                rs=density_to_rs(rho),
                gamma_star=scan.gamma_star,
                gamma_star_err=scan.gamma_star_err,
                breakdown=breakdown,
                n_particles=config.n_particles,
                seed=config.master_seed,
                flags=tuple(flags),
                gamma_scan=scan,
                scan_streams=scan_streams,
                production_streams=tuple(r.stream for r in runs),
                production_acceptance=tuple(r.acceptance for r in runs),
            )
        )
    return records


def ingest_reference(rows_or_path) -> list[tuple[float, float]]:
    """Convert an (r_s, e_c) table to (rho, e_c) pairs.

    Accepts a path to a CSV file (header optional, '#' comments allowed) or an
    iterable of rows. Malformed rows raise with their line numbers;
    non-monotonic r_s is allowed; an empty table returns [] with a warning.
    """
    if isinstance(rows_or_path, (str, bytes)) or hasattr(rows_or_path, "__fspath__"):
        with open(rows_or_path, newline="", encoding="utf-8") as fh:
            raw = list(csv.reader(fh))
    else:
        raw = [list(row) for row in rows_or_path]
    out: list[tuple[float, float]] = []
    errors: list[str] = []
    for lineno, row in enumerate(raw, start=1):
        cells = [c.strip() for c in row if c.strip() != ""]
        if not cells or cells[0].startswith("#"):
            continue
        try:
            rs, ec = float(cells[0]), float(cells[1])
        except (ValueError, IndexError):
            if lineno == 1:
                continue  # header row
            errors.append(f"line {lineno}: expected numeric 'r_s,e_c', got {row!r}")
            continue
        if rs <= 0:
            errors.append(f"line {lineno}: r_s must be positive, got {rs!r}")
            continue
        out.append((rs_to_density(rs), ec))
    if errors:
        raise ValueError("malformed reference table:\n" + "\n".join(errors))
    if not out:
        warnings.warn("reference table contained no data rows")
    return out


@dataclass(frozen=True)
class ExponentialEntropyRecord:
    """Side-by-side exponential-entropy functional and its linearization."""

    shannon: float
    rho_log_rho_integral: float
    exponential_term: float  # alpha * exp(w * S)
    weizsacker_term: float
    first_order: float  # alpha * (1 + w * S)


def exponential_entropy_eval(d: GriddedDensity, alpha: float, w: float) -> ExponentialEntropyRecord:
    """Evaluate T_w plus alpha*exp(w S[rho]) alongside its first-order expansion.

    Reports both terms for comparison; no equality between them is implied.
    """
    s = shannon_continuous(d)
    return ExponentialEntropyRecord(
        shannon=s,
        rho_log_rho_integral=-s,
        exponential_term=alpha * math.exp(w * s),
        weizsacker_term=fisher_weizsacker(d),
        first_order=alpha * (1.0 + w * s),
    )
