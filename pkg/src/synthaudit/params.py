"""Tunable knobs shared by the test battery, plus seed derivation."""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError


@dataclass(frozen=True)
class AuditParams:
    permutations: int = 500
    alpha: float = 0.05
    chi_square_expected: str = "pooled"
    mmd_subsample: int = 2000
    max_group_size: int = 4
    eps_scale: float = 1.0
    smoothing: float = 1.0
    close_rows_cap: int | None = None
    boruta_max_rounds: int = 100
    public_features: tuple = field(default_factory=tuple)
    sensitive: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "public_features", tuple(self.public_features))
        if self.permutations < 100:
            raise ConfigError("permutations must be at least 100")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.chi_square_expected not in ("pooled", "test"):
            raise ConfigError("chi_square_expected must be 'pooled' or 'test'")
        if self.mmd_subsample is not None and self.mmd_subsample < 2:
            raise ConfigError("mmd_subsample must be at least 2")
        if self.max_group_size < 2:
            raise ConfigError("max_group_size must be at least 2")
        if self.eps_scale <= 0 or self.smoothing <= 0:
            raise ConfigError("eps_scale and smoothing must be positive")
        if self.close_rows_cap is not None and self.close_rows_cap < 1:
            raise ConfigError("close_rows_cap must be positive")
        if self.boruta_max_rounds < 1:
            raise ConfigError("boruta_max_rounds must be positive")


def derive_seed(master: int, *keys) -> int:
    """Independent 32-bit seed for the stream identified by ``keys``.

    Streams depend only on (master, keys), never on execution order, so
    results do not change with the number of workers.
    """
    words = [zlib.crc32(str(k).encode("utf-8")) for k in keys]
    return int(np.random.SeedSequence([int(master) & 0xFFFFFFFF, *words]).generate_state(1)[0])


def subsample_indices(n: int, size: int | None, seed: int) -> np.ndarray:
    """Sorted row indices of a uniform subsample without replacement (all rows if n <= size)."""
    if size is None or n <= size:
        return np.arange(n)
    return np.sort(np.random.default_rng(seed).choice(n, size=size, replace=False))
