"""Blind max-min amplitude heuristic over a coherence block.

The maximum, over a block of equalized symbols, of each symbol's distance to
its nearest constellation point estimates the interference-plus-noise
amplitude without pilots; its squared inverse gives a blind SINR estimate for
every resource element of the block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import Constellation, nearest_distances
from .errors import InputError

DEFAULT_K_RB = 12
DEFAULT_SINR_CEILING_DB = 40.0


@dataclass(frozen=True)
class CoherenceBlock:
    """K_RB contiguous equalized symbols over which interference power is modeled constant."""

    symbols: np.ndarray
    k_rb: int

    def __post_init__(self):
        sym = np.asarray(self.symbols)
        if self.k_rb < 1 or sym.size != self.k_rb:
            raise InputError(f"block length {sym.size} does not match k_rb={self.k_rb} >= 1")


def d_max(block: CoherenceBlock, c: Constellation) -> float:
    """Maximum nearest-neighbor distance over the block. O(K_RB * |points|)."""
    sym = np.asarray(block.symbols)
    if sym.size == 0:
        raise InputError("empty coherence block")
    if not np.all(np.isfinite(sym)):
        raise InputError("block contains non-finite symbols")
    return float(nearest_distances(sym, c).max())


def sinr_from_dmax(dmax: float, signal_power: float = 1.0,
                   ceiling_db: float = DEFAULT_SINR_CEILING_DB) -> float:
    """Blind per-block SINR = signal_power / dmax^2, capped at the ceiling.

    The amplitude estimate enters squared (power domain); the cap guards the
    dmax -> 0 blow-up. The same value applies to every RE of the block.
    """
    if dmax < 0 or signal_power < 0:
        raise InputError("dmax and signal_power must be nonnegative")
    ceiling = 10.0 ** (ceiling_db / 10.0) * signal_power
    if dmax == 0.0:
        return ceiling
    return min(signal_power / (dmax * dmax), ceiling)


def d_max_per_block(symbols: np.ndarray, c: Constellation, k_rb: int = DEFAULT_K_RB) -> np.ndarray:
    """d_max of each K_RB-wide block along the last axis (vectorized fast path)."""
    from .constellation import nearest_lattice

    sym = np.asarray(symbols)
    if sym.shape[-1] % k_rb:
        raise InputError(f"last axis ({sym.shape[-1]}) not a multiple of k_rb={k_rb}")
    _, dist = nearest_lattice(sym, c)
    return dist.reshape(sym.shape[:-1] + (-1, k_rb)).max(axis=-1)
