"""Flat key-value run configuration.

Config files hold one `key = value` pair per line with '#' comments; values
are parsed by the target field type (density lists are comma-separated).
Command-line flags override file values.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

DEFAULT_DENSITIES = (0.002, 0.01, 0.05, 0.1, 0.25)


@dataclass
class RunConfig:
    densities: tuple[float, ...] = DEFAULT_DENSITIES
    n_particles: int = 64
    master_seed: int = 20240817
    # ewald splitting: alpha = ewald_alpha_scale / L, real cutoff L/2
    ewald_alpha_scale: float = 6.0
    ewald_recip_tol: float = 1e-7
    # sampler budgets (single-particle steps per chain)
    scan_warmup_steps: int = 20000
    scan_sample_steps: int = 64000
    production_warmup_steps: int = 64000
    production_sample_steps: int = 256000
    production_replicas: int = 2
    block_length: int = 16  # measurements per block
    measure_every: int = 0  # 0 -> one sweep (N steps) per measurement
    # coupling scan
    gamma_bracket_scale: float = 4.0  # bracket [0, scale * r_s]
    gamma_grid_size: int = 7
    gamma_replicas: int = 2
    # fit windows (e/bohr^3); the component window also seeds the e_c window,
    # which extends to the largest scanned density
    fit_window_lo: float = 0.002
    fit_window_hi: float = 0.25
    lanes: int = 0  # 0 -> UEGLAB_LANES env var, else 1

    def validate(self) -> None:
        if not self.densities or any(d <= 0 for d in self.densities):
            raise ValueError("densities must be a non-empty list of positive values")
        if self.n_particles < 2:
            raise ValueError("n_particles must be >= 2")
        if self.gamma_grid_size < 5:
            raise ValueError("gamma_grid_size must be >= 5")
        if self.gamma_replicas < 2 or self.production_replicas < 1:
            raise ValueError("gamma_replicas >= 2 and production_replicas >= 1 required")
        if min(self.scan_warmup_steps, self.production_warmup_steps) < 0:
            raise ValueError("warmup steps must be >= 0")
        if min(self.scan_sample_steps, self.production_sample_steps) <= 0:
            raise ValueError("sample steps must be > 0")
        if self.block_length < 1:
            raise ValueError("block_length must be >= 1")
        if self.fit_window_lo <= 0 or self.fit_window_hi < self.fit_window_lo:
            raise ValueError("fit window must satisfy 0 < lo <= hi")

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["densities"] = list(self.densities)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        kwargs = {}
        names = {f.name: f for f in fields(cls)}
        for key, value in data.items():
            if key not in names:
                raise ValueError(f"unknown configuration key {key!r}")
            kwargs[key] = _coerce(cls, key, value)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg


def _coerce(cls, key: str, value):
    if key == "densities":
        if isinstance(value, str):
            value = [v for v in value.replace(",", " ").split() if v]
        return tuple(float(v) for v in value)
    target = cls.__dataclass_fields__[key].type
    if isinstance(value, str):
        value = value.strip()
    if "int" in str(target):
        return int(value)
    if "float" in str(target):
        return float(value)
    return value


def load_config(path: str) -> RunConfig:
    """Parse a flat key-value config file; line numbers reported on errors."""
    data: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line.rstrip()!r}")
            key, _, value = stripped.partition("=")
            key = key.strip()
            if key not in RunConfig.__dataclass_fields__:
                raise ValueError(f"{path}:{lineno}: unknown configuration key {key!r}")
            try:
                data[key] = _coerce(RunConfig, key, value.strip())
            except ValueError:
                raise ValueError(f"{path}:{lineno}: cannot parse value for {key!r}: {value.strip()!r}") from None
    return RunConfig.from_dict(data)
