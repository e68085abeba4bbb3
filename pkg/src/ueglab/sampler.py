"""Metropolis sampling of electron configurations with blocked statistics.

Chains use single-particle displacement proposals (uniform cube of side equal
to the proposal width) accepted with probability min(1, exp(d log-weight)).
Observables are recorded once per measurement interval and aggregated into
fixed-length blocks (Flyvbjerg-style) whose means yield the standard error.

Reproducibility: each chain draws from a counter-based Philox generator keyed
by (seed, stream); all randomness is pregenerated in fixed-size batches so the
draw pattern does not depend on accept/reject outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, ewald
from .cell import wrap_positions
from .conditional import ConditionalModel

MIN_BLOCKS_FOR_ERROR = 16


@dataclass(frozen=True)
class EstimateWithError:
    """Mean, standard error from block variance, and completed block count."""

    mean: float
    error: float
    n_blocks: int


@dataclass
class BlockAccumulator:
    """Mergeable fixed-block-length statistics for a set of observables."""

    observables: tuple[str, ...]
    block_length: int
    n_blocks: int = 0
    block_mean_sum: np.ndarray = field(default=None, repr=False)
    block_mean_sqsum: np.ndarray = field(default=None, repr=False)
    partial_sum: np.ndarray = field(default=None, repr=False)
    partial_count: int = 0

    def __post_init__(self):
        if self.block_length < 1:
            raise ValueError("block_length must be >= 1")
        n = len(self.observables)
        if self.block_mean_sum is None:
            self.block_mean_sum = np.zeros(n)
        if self.block_mean_sqsum is None:
            self.block_mean_sqsum = np.zeros(n)
        if self.partial_sum is None:
            self.partial_sum = np.zeros(n)

    @classmethod
    def empty(cls, observables, block_length: int) -> "BlockAccumulator":
        return cls(observables=tuple(observables), block_length=int(block_length))

    def add(self, values) -> None:
        """Record one measurement (sequence aligned with `observables`)."""
        v = np.asarray(values, dtype=float)
        if v.shape != (len(self.observables),):
            raise ValueError(f"expected {len(self.observables)} values, got {v.shape}")
        self.partial_sum += v
        self.partial_count += 1
        if self.partial_count == self.block_length:
            m = self.partial_sum / self.block_length
            self.block_mean_sum += m
            self.block_mean_sqsum += m * m
            self.n_blocks += 1
            self.partial_sum[:] = 0.0
            self.partial_count = 0

    def index(self, name: str) -> int:
        try:
            return self.observables.index(name)
        except ValueError:
            raise KeyError(f"unknown observable {name!r}; have {self.observables}")

    def mean(self, name: str) -> float:
        if self.n_blocks < 1:
            raise ValueError("no completed blocks")
        return float(self.block_mean_sum[self.index(name)] / self.n_blocks)

    def estimate(self, name: str) -> EstimateWithError:
        """Mean and blocked standard error; requires >= 16 completed blocks."""
        if self.n_blocks < MIN_BLOCKS_FOR_ERROR:
            raise ValueError(
                f"{self.n_blocks} completed blocks; "
                f">= {MIN_BLOCKS_FOR_ERROR} required before error bars are reported"
            )
        i = self.index(name)
        n = self.n_blocks
        mean = self.block_mean_sum[i] / n
        var = (self.block_mean_sqsum[i] - n * mean * mean) / (n - 1)
        return EstimateWithError(float(mean), math.sqrt(max(var, 0.0) / n), n)


def merge(a: BlockAccumulator, b: BlockAccumulator) -> BlockAccumulator:
    """Combine two accumulators over disjoint sample streams.

    Associative and commutative (bitwise, since only sums are combined); the
    merged mean is the block-weighted mean. Partial blocks cannot be merged.
    """
    if a.observables != b.observables:
        raise ValueError(f"mismatched observables: {a.observables} vs {b.observables}")
    if a.block_length != b.block_length:
        raise ValueError(f"mismatched block lengths: {a.block_length} vs {b.block_length}")
    if a.partial_count or b.partial_count:
        raise ValueError("cannot merge accumulators holding partial blocks")
    return BlockAccumulator(
        observables=a.observables,
        block_length=a.block_length,
        n_blocks=a.n_blocks + b.n_blocks,
        block_mean_sum=a.block_mean_sum + b.block_mean_sum,
        block_mean_sqsum=a.block_mean_sqsum + b.block_mean_sqsum,
        partial_sum=np.zeros(len(a.observables)),
        partial_count=0,
    )


def chain_rng(seed: int, stream) -> np.random.Generator:
    """Philox generator for stream `stream` (int or tuple) of a master seed."""
    key = (stream,) if isinstance(stream, int) else tuple(stream)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=key)))


@dataclass
class ChainState:
    """Mutable Markov-chain state: configuration, cached energy, proposal width."""

    positions: np.ndarray
    energy: float
    width: float
    rng: np.random.Generator
    seed: int
    stream: tuple
    step: int = 0
    accepted: int = 0

    @classmethod
    def initialize(
        cls, model, seed: int, stream=0, width: float | None = None
    ) -> "ChainState":
        rng = chain_rng(seed, stream)
        cell = model.cell
        pos = _lattice_start(cell.n_particles, cell.edge_length, rng)
        energy = 0.0
        if isinstance(model, ConditionalModel):
            energy = ewald.total_pair_energy(pos, model.ewald, cell)
        key = (stream,) if isinstance(stream, int) else tuple(stream)
        if width is None:
            width = min(cell.wigner_seitz, cell.edge_length / 2.0)
        return cls(positions=pos, energy=energy, width=width, rng=rng, seed=seed, stream=key)


def _lattice_start(n: int, L: float, rng: np.random.Generator) -> np.ndarray:
    """Jittered simple-cubic start; avoids near-coincident initial pairs."""
    m = int(math.ceil(n ** (1.0 / 3.0)))
    g = (np.arange(m) + 0.5) * (L / m)
    pts = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)[:n]
    return wrap_positions(pts + rng.uniform(-0.05, 0.05, (n, 3)) * (L / m), L)


def metropolis_step(state: ChainState, model) -> ChainState:
    """One single-particle Metropolis update (reference implementation).

    `model` provides move_deltas(positions, i, new_position) ->
    (d log-weight, d pair-energy); coincident proposals are auto-rejected.
    The production chain in run_chain applies the same rule through a
    compiled incremental kernel.
    """
    rng = state.rng
    pos = state.positions
    N = len(pos)
    L = model.cell.edge_length
    i = int(rng.integers(N))
    disp = rng.uniform(-state.width / 2.0, state.width / 2.0, 3)
    u = float(rng.random())
    new = wrap_positions(pos[i] + disp, L)
    state.step += 1
    others = np.delete(pos, i, axis=0)
    if len(others):
        d = others - new
        d -= L * np.floor(d / L + 0.5)
        if float(np.min(np.einsum("ij,ij->i", d, d))) < _kernels.COINCIDENCE_CUTOFF**2:
            return state
    dlw, d_pair = model.move_deltas(pos, i, new)
    if dlw >= 0.0 or u < math.exp(dlw):
        pos[i] = new
        state.energy += d_pair
        state.accepted += 1
    return state


@dataclass
class ChainRun:
    """Outcome of run_chain: accumulator plus chain diagnostics."""

    accumulator: BlockAccumulator
    acceptance: float
    proposal_width: float
    flags: list[str]
    seed: int
    stream: tuple
    n_measurements: int
    final_positions: np.ndarray | None = None
    final_energy: float = 0.0
    configs: list | None = None


def _kvec_indices(params: ewald.EwaldParameters):
    L = params.cell.edge_length
    m = np.rint(params.kvecs * L / (2.0 * math.pi)).astype(np.int64)
    mmax = params.shell_max
    return (m[:, 0] + mmax, m[:, 1] + mmax, m[:, 2] + mmax, mmax)


def run_chain(
    model: ConditionalModel,
    *,
    warmup_steps: int,
    sample_steps: int,
    block_length: int,
    seed: int,
    stream=0,
    measure_every: int | None = None,
    refresh_every: int = 16384,
    adapt_interval: int = 512,
    initial_width: float | None = None,
    gradient_references: str = "all",
    keep_configs: bool = False,
) -> ChainRun:
    """Run one Metropolis chain and accumulate blocked observables.

    Observables (per measurement, one measurement every `measure_every`
    single-particle steps, default one sweep = N steps):
      grad_sq     |gradient of log f w.r.t. a reference particle|^2;
                  with gradient_references="all" the squared force is averaged
                  over every particle as reference (same expectation in a
                  uniform system, smaller variance), "single" uses particle 0.
      pair_energy total pair energy per particle, hartree (background and
                  image constants included).

    The proposal width adapts toward 40-60% acceptance during warmup only and
    is frozen afterwards. Fixed (seed, stream, parameters) reproduce the run
    bit-identically.
    """
    if warmup_steps < 0 or sample_steps <= 0:
        raise ValueError("warmup_steps must be >= 0 and sample_steps > 0")
    if gradient_references not in ("all", "single"):
        raise ValueError("gradient_references must be 'all' or 'single'")
    cell = model.cell
    params = model.ewald
    N = cell.n_particles
    L = cell.edge_length
    gamma = model.gamma
    if measure_every is None:
        measure_every = N
    state = ChainState.initialize(model, seed, stream, width=initial_width)
    rng = state.rng
    pos = state.positions
    ix, iy, iz, mmax = _kvec_indices(params)
    twopi_over_L = 2.0 * math.pi / L
    rows = _kernels.phase_rows(pos, twopi_over_L, mmax, ix, iy, iz)
    S = rows.sum(axis=0)
    U = ewald.total_pair_energy(pos, params, cell)

    def batch(nmoves: int, width: float):
        idxs = rng.integers(0, N, nmoves)
        disps = rng.uniform(-width / 2.0, width / 2.0, (nmoves, 3))
        uacc = rng.random(nmoves)
        return idxs, disps, uacc

    # warmup with width adaptation
    width = state.width
    done = 0
    while done < warmup_steps:
        n = min(adapt_interval, warmup_steps - done)
        idxs, disps, uacc = batch(n, width)
        U, nacc = _kernels.run_moves(
            pos, rows, S, U, params.kcoef, ix, iy, iz, mmax,
            params.alpha, params.real_cutoff, L, gamma, width, idxs, disps, uacc,
        )
        rate = nacc / n
        if rate > 0.6:
            width = min(width * 1.2, L / 2.0)
        elif rate < 0.4:
            width = max(width / 1.2, 1e-4 * L)
        done += n
    state.width = width

    # refresh caches at the warmup/production boundary
    rows = _kernels.phase_rows(pos, twopi_over_L, mmax, ix, iy, iz)
    S = rows.sum(axis=0)
    U = ewald.total_pair_energy(pos, params, cell)

    acc = BlockAccumulator.empty(("grad_sq", "pair_energy"), block_length)
    # whole blocks only, so merges over chain replicas stay exact
    n_measurements = sample_steps // measure_every
    n_measurements -= n_measurements % block_length
    accepted = 0
    since_refresh = 0
    configs = [] if keep_configs else None
    for _ in range(n_measurements):
        idxs, disps, uacc = batch(measure_every, width)
        U, nacc = _kernels.run_moves(
            pos, rows, S, U, params.kcoef, ix, iy, iz, mmax,
            params.alpha, params.real_cutoff, L, gamma, width, idxs, disps, uacc,
        )
        accepted += nacc
        since_refresh += measure_every
        if refresh_every and since_refresh >= refresh_every:
            rows = _kernels.phase_rows(pos, twopi_over_L, mmax, ix, iy, iz)
            S = rows.sum(axis=0)
            U = ewald.total_pair_energy(pos, params, cell)
            since_refresh = 0
        if gamma == 0.0:
            grad_sq = 0.0
        elif gradient_references == "all":
            grad_sq = gamma**2 * _kernels.mean_sq_force(
                pos, rows, S, params.kvecs, params.kcoef, params.alpha, params.real_cutoff, L
            )
        else:
            grad_sq = gamma**2 * _kernels.sq_force_on_reference(
                pos, rows, S, params.kvecs, params.kcoef, params.alpha, params.real_cutoff, L
            )
        acc.add((grad_sq, U / N))
        if keep_configs:
            configs.append(pos.copy())

    total_moves = n_measurements * measure_every
    acceptance = accepted / total_moves if total_moves else 0.0
    flags = []
    if total_moves:
        if acceptance < 0.05 or (acceptance > 0.95 and gamma > 0.0):
            flags.append("acceptance_out_of_range")
    state.energy = U
    state.positions = pos
    return ChainRun(
        accumulator=acc,
        acceptance=acceptance,
        proposal_width=width,
        flags=flags,
        seed=seed,
        stream=state.stream,
        n_measurements=n_measurements,
        final_positions=pos,
        final_energy=U,
        configs=configs,
    )
