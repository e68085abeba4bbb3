"""Numba inner loops for the Metropolis chain.

These kernels reproduce the reference numpy Ewald arithmetic (same splitting,
same real-space cutoff mask) with incremental structure-factor updates.
Per-particle reciprocal phases are generated from per-axis power tables:
exp(i k.r) = px[mx] py[my] pz[mz], so no per-k trigonometry is needed.

Randomness is pregenerated by the caller (particle indices, displacements and
acceptance uniforms), which makes the consumption pattern independent of the
accept/reject outcome and keeps chains bit-reproducible.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from numba import njit

COINCIDENCE_CUTOFF = 1e-10


@njit(cache=True)
def _axis_powers(x, twopi_over_L, mmax, out):
    # out[mmax + m] = exp(i 2 pi m x / L), m in [-mmax, mmax]
    base = cmath.exp(1j * twopi_over_L * x)
    out[mmax] = 1.0 + 0.0j
    for m in range(1, mmax + 1):
        out[mmax + m] = out[mmax + m - 1] * base
        out[mmax - m] = out[mmax + m].conjugate()


@njit(cache=True)
def phase_rows(pos, twopi_over_L, mmax, ix, iy, iz):
    """exp(i k.r_j) for every particle and stored k-vector, shape (N, nk)."""
    N = pos.shape[0]
    nk = ix.shape[0]
    rows = np.empty((N, nk), np.complex128)
    px = np.empty(2 * mmax + 1, np.complex128)
    py = np.empty(2 * mmax + 1, np.complex128)
    pz = np.empty(2 * mmax + 1, np.complex128)
    for i in range(N):
        _axis_powers(pos[i, 0], twopi_over_L, mmax, px)
        _axis_powers(pos[i, 1], twopi_over_L, mmax, py)
        _axis_powers(pos[i, 2], twopi_over_L, mmax, pz)
        for k in range(nk):
            rows[i, k] = px[ix[k]] * py[iy[k]] * pz[iz[k]]
    return rows


@njit(cache=True)
def run_moves(
    pos,
    rows,
    S,
    U,
    kcoef,
    ix,
    iy,
    iz,
    mmax,
    alpha,
    rc,
    L,
    gamma,
    width,
    idxs,
    disps,
    uaccept,
):
    """Advance the chain by one pregenerated batch of single-particle moves.

    Mutates pos, rows and S in place; returns (updated energy, accept count).
    Proposals that would bring two particles within the coincidence cutoff
    are rejected outright.
    """
    N = pos.shape[0]
    nk = kcoef.shape[0]
    twopi_over_L = 2.0 * math.pi / L
    scratch = np.empty(nk, np.complex128)
    px = np.empty(2 * mmax + 1, np.complex128)
    py = np.empty(2 * mmax + 1, np.complex128)
    pz = np.empty(2 * mmax + 1, np.complex128)
    nacc = 0
    for t in range(idxs.shape[0]):
        i = idxs[t]
        nx = pos[i, 0] + disps[t, 0]
        ny = pos[i, 1] + disps[t, 1]
        nz = pos[i, 2] + disps[t, 2]
        nx -= L * math.floor(nx / L)
        ny -= L * math.floor(ny / L)
        nz -= L * math.floor(nz / L)
        dU_real = 0.0
        ok = True
        for j in range(N):
            if j == i:
                continue
            dx = pos[j, 0] - nx
            dy = pos[j, 1] - ny
            dz = pos[j, 2] - nz
            dx -= L * math.floor(dx / L + 0.5)
            dy -= L * math.floor(dy / L + 0.5)
            dz -= L * math.floor(dz / L + 0.5)
            rn = math.sqrt(dx * dx + dy * dy + dz * dz)
            if rn < COINCIDENCE_CUTOFF:
                ok = False
                break
            if rn <= rc:
                dU_real += math.erfc(alpha * rn) / rn
            dx = pos[j, 0] - pos[i, 0]
            dy = pos[j, 1] - pos[i, 1]
            dz = pos[j, 2] - pos[i, 2]
            dx -= L * math.floor(dx / L + 0.5)
            dy -= L * math.floor(dy / L + 0.5)
            dz -= L * math.floor(dz / L + 0.5)
            ro = math.sqrt(dx * dx + dy * dy + dz * dz)
            if ro <= rc:
                dU_real -= math.erfc(alpha * ro) / ro
        if not ok:
            continue
        _axis_powers(nx, twopi_over_L, mmax, px)
        _axis_powers(ny, twopi_over_L, mmax, py)
        _axis_powers(nz, twopi_over_L, mmax, pz)
        dU_rec = 0.0
        for k in range(nk):
            rnk = px[ix[k]] * py[iy[k]] * pz[iz[k]]
            scratch[k] = rnk
            dre = rnk.real - rows[i, k].real
            dim = rnk.imag - rows[i, k].imag
            dU_rec += kcoef[k] * (
                2.0 * (S[k].real * dre + S[k].imag * dim) + dre * dre + dim * dim
            )
        dU = dU_real + dU_rec
        dlw = -gamma * dU
        if dlw >= 0.0 or uaccept[t] < math.exp(dlw):
            for k in range(nk):
                S[k] += scratch[k] - rows[i, k]
                rows[i, k] = scratch[k]
            pos[i, 0] = nx
            pos[i, 1] = ny
            pos[i, 2] = nz
            U += dU
            nacc += 1
    return U, nacc


@njit(cache=True)
def mean_sq_force(pos, rows, S, kvecs, kcoef, alpha, rc, L):
    """Mean over particles of the squared Ewald force magnitude."""
    N = pos.shape[0]
    nk = kcoef.shape[0]
    pref = 2.0 * alpha / math.sqrt(math.pi)
    total = 0.0
    for i in range(N):
        fx = 0.0
        fy = 0.0
        fz = 0.0
        for j in range(N):
            if j == i:
                continue
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            dz = pos[i, 2] - pos[j, 2]
            dx -= L * math.floor(dx / L + 0.5)
            dy -= L * math.floor(dy / L + 0.5)
            dz -= L * math.floor(dz / L + 0.5)
            r = math.sqrt(dx * dx + dy * dy + dz * dz)
            if r > rc:
                continue
            coef = math.erfc(alpha * r) / (r * r * r) + pref * math.exp(
                -alpha * alpha * r * r
            ) / (r * r)
            fx += coef * dx
            fy += coef * dy
            fz += coef * dz
        for k in range(nk):
            im = rows[i, k].imag * S[k].real - rows[i, k].real * S[k].imag
            c = 2.0 * kcoef[k] * im
            fx += c * kvecs[k, 0]
            fy += c * kvecs[k, 1]
            fz += c * kvecs[k, 2]
        total += fx * fx + fy * fy + fz * fz
    return total / N


@njit(cache=True)
def sq_force_on_reference(pos, rows, S, kvecs, kcoef, alpha, rc, L):
    """Squared Ewald force magnitude on particle 0 only."""
    N = pos.shape[0]
    nk = kcoef.shape[0]
    pref = 2.0 * alpha / math.sqrt(math.pi)
    fx = 0.0
    fy = 0.0
    fz = 0.0
    for j in range(1, N):
        dx = pos[0, 0] - pos[j, 0]
        dy = pos[0, 1] - pos[j, 1]
        dz = pos[0, 2] - pos[j, 2]
        dx -= L * math.floor(dx / L + 0.5)
        dy -= L * math.floor(dy / L + 0.5)
        dz -= L * math.floor(dz / L + 0.5)
        r = math.sqrt(dx * dx + dy * dy + dz * dz)
        if r > rc:
            continue
        coef = math.erfc(alpha * r) / (r * r * r) + pref * math.exp(
            -alpha * alpha * r * r
        ) / (r * r)
        fx += coef * dx
        fy += coef * dy
        fz += coef * dz
    for k in range(nk):
        im = rows[0, k].imag * S[k].real - rows[0, k].real * S[k].imag
        c = 2.0 * kcoef[k] * im
        fx += c * kvecs[k, 0]
        fy += c * kvecs[k, 1]
        fz += c * kvecs[k, 2]
    return fx * fx + fy * fy + fz * fz
