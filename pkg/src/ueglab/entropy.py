"""Information-theoretic density descriptors.

Natural logarithm is the default everywhere (base 2 available by flag where
noted; conversion is a multiplicative constant). The continuous-extension
convention 0 log 0 := 0 applies throughout. Radial quadrature is trapezoidal
with 4 pi r^2 weights on the given grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_NORM_RTOL = 1e-6


def _xlogx(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    mask = p > 0
    out[mask] = p[mask] * np.log(p[mask])
    return out


@dataclass(frozen=True)
class GriddedDensity:
    """Radial or uniform one-particle density normalized to `norm` electrons.

    Radial: strictly increasing grid r (bohr) with values rho(r) >= 0 and
    quadrature integral 4 pi int r^2 rho dr equal to `norm`. Uniform: constant
    rho over a volume with rho * volume equal to `norm`.
    """

    kind: str  # "radial" | "uniform"
    norm: float
    r: np.ndarray | None = None
    rho: np.ndarray | None = None
    uniform_rho: float = 0.0
    volume: float = 0.0

    @classmethod
    def radial(cls, r, rho, norm: float) -> "GriddedDensity":
        r = np.asarray(r, dtype=float)
        rho = np.asarray(rho, dtype=float)
        if r.ndim != 1 or r.shape != rho.shape or len(r) < 2:
            raise ValueError("radial grid and values must be matching 1-D arrays")
        if np.any(np.diff(r) <= 0):
            raise ValueError("radial grid must be strictly increasing")
        if np.any(rho < 0):
            raise ValueError("density values must be >= 0")
        d = cls(kind="radial", norm=float(norm), r=r, rho=rho)
        q = d.integrate(rho)
        if abs(q - norm) > _NORM_RTOL * max(abs(norm), 1.0):
            raise ValueError(
                f"density integrates to {q!r}, declared norm {norm!r} (rtol {_NORM_RTOL})"
            )
        return d

    @classmethod
    def uniform(cls, rho: float, volume: float, norm: float) -> "GriddedDensity":
        if rho < 0 or volume <= 0:
            raise ValueError("uniform density needs rho >= 0 and volume > 0")
        if abs(rho * volume - norm) > _NORM_RTOL * max(abs(norm), 1.0):
            raise ValueError(f"rho*volume = {rho * volume!r} != declared norm {norm!r}")
        return cls(kind="uniform", norm=float(norm), uniform_rho=float(rho), volume=float(volume))

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature of a gridded integrand over the density's domain."""
        if self.kind == "uniform":
            return float(values) * self.volume
        return float(np.trapezoid(4.0 * math.pi * self.r**2 * np.asarray(values), self.r))

    def unit_normalized(self) -> "GriddedDensity":
        """Same shape rescaled to integrate to one (sigma = rho / norm)."""
        if self.norm == 0:
            raise ValueError("cannot normalize a zero-norm density")
        if self.kind == "uniform":
            return GriddedDensity.uniform(self.uniform_rho / self.norm, self.volume, 1.0)
        return GriddedDensity(kind="radial", norm=1.0, r=self.r, rho=self.rho / self.norm)


@dataclass(frozen=True)
class OccupationList:
    """Spin-orbital occupations in [0, 1] with an energy scale (hartree)."""

    occupations: np.ndarray
    scale: float

    def __post_init__(self):
        occ = np.asarray(self.occupations, dtype=float)
        if np.any((occ < 0) | (occ > 1)):
            raise ValueError("occupations must lie in [0, 1]")
        object.__setattr__(self, "occupations", occ)


@dataclass(frozen=True)
class MomentumDistribution:
    """Momentum distribution on a k/k_F grid covering [0, k_max], k_max >= 2."""

    k_over_kf: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.k_over_kf, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or len(k) < 2:
            raise ValueError("grid and values must be matching 1-D arrays")
        if np.any(np.diff(k) <= 0) or k[0] < 0:
            raise ValueError("k/k_F grid must be strictly increasing from >= 0")
        if k[-1] < 2.0:
            raise ValueError("grid must cover [0, k_max] with k_max >= 2")
        if np.any(v < 0):
            raise ValueError("momentum distribution values must be >= 0")
        object.__setattr__(self, "k_over_kf", k)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class PairHistogram:
    """2-D bin counts over spherically averaged radii (r1, r2)."""

    counts: np.ndarray
    r1_edges: np.ndarray
    r2_edges: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=float)
        if c.ndim != 2 or np.any(c < 0):
            raise ValueError("counts must be a non-negative 2-D array")
        if c.shape != (len(self.r1_edges) - 1, len(self.r2_edges) - 1):
            raise ValueError("counts shape must match bin edges")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> float:
        return float(self.counts.sum())


def shannon_discrete(p, log_base: float = 2.0) -> float:
    """S = -sum p log p for a normalized probability sequence."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("probabilities must be >= 0")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total!r}, expected 1 within 1e-9")
    s = -float(_xlogx(p).sum())
    return s / math.log(log_base)


def von_neumann(p) -> float:
    """Entropy of a diagonal density operator (natural base)."""
    return shannon_discrete(p, log_base=math.e)


def shannon_continuous(d: GriddedDensity) -> float:
    """S = -int rho log rho over the density's domain (natural log)."""
    if d.kind == "uniform":
        # constant integrand: exact closed form -N log(N/V)
        if d.uniform_rho == 0.0:
            return 0.0
        return -d.norm * math.log(d.uniform_rho)
    return -d.integrate(_xlogx(d.rho))


def entropy_density(d: GriddedDensity) -> np.ndarray:
    """Pointwise s(r) = -rho log rho on the density's grid."""
    if d.kind == "uniform":
        return np.asarray(-_xlogx(np.array([d.uniform_rho]))[0])
    return -_xlogx(d.rho)


def _radial_gradient(d: GriddedDensity) -> np.ndarray:
    if len(d.r) < 3:
        raise ValueError("radial grid must have >= 3 points for gradients")
    if np.any(d.rho <= 0):
        raise ValueError("gradient descriptors need rho > 0 on the whole grid")
    return np.gradient(d.rho, d.r)


def local_wavevector(d: GriddedDensity):
    """|d(-log rho)/dr| on the grid: the local wave-vector of the density."""
    if d.kind == "uniform":
        return 0.0
    return np.abs(_radial_gradient(d) / d.rho)


def fisher_weizsacker(d: GriddedDensity) -> float:
    """Gradient functional (1/8) int |grad rho|^2 / rho (hartree).

    Zero for a uniform density; equals the Weizsacker kinetic energy of the
    one-particle density.
    """
    if d.kind == "uniform":
        return 0.0
    g = _radial_gradient(d)
    return 0.125 * d.integrate(g * g / d.rho)


def dehesa_measure(s_sigma: float) -> float:
    """Entropy-power delocalization measure J = (1/2 pi) exp((2/3) S)."""
    return math.exp(2.0 * s_sigma / 3.0) / (2.0 * math.pi)


def mutual_information(h: PairHistogram) -> float:
    """Plug-in mutual information of a pair histogram (natural log).

    I = sum p12 log(p12 / (p1 p2)) over occupied bins; non-negative, with
    plug-in bias bounded by (bins - 1)^2 / (2 total) before corrections.
    """
    total = h.total
    if total <= 0:
        raise ValueError("empty histogram")
    p12 = h.counts / total
    p1 = p12.sum(axis=1)
    p2 = p12.sum(axis=0)
    mask = p12 > 0
    denom = np.outer(p1, p2)
    return float(np.sum(p12[mask] * np.log(p12[mask] / denom[mask])))


def collins_sum(occ: OccupationList) -> float:
    """Occupation-entropy correlation energy: scale * sum n_j log n_j."""
    return occ.scale * float(_xlogx(occ.occupations).sum())


def ziesche_entropy(m: MomentumDistribution) -> float:
    """S = -int d(k/k_F) rho(k) log rho(k) by trapezoidal quadrature."""
    return -float(np.trapezoid(_xlogx(m.values), m.k_over_kf))
