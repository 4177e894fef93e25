"""Semi-blind interference localization and per-RE hybrid SINR assembly.

Stages: (1) recover the pulse repetition rate from a per-block power series
by a mean-removed windowed DFT and predict future impaired blocks on the
resulting time lattice; (2) compare the block's pilot-aided wideband SINR
against an interference-free reference to decide whether pilots themselves
were hit; (3) when they were not, find the contaminated OFDM symbol by the
weighted nearest-neighbor log-likelihood score and fill that symbol's
coherence blocks with the blind amplitude-heuristic SINR, keeping
pilot-aided values everywhere else. Decoded blocks that pass CRC admit the
exact reconstruction-based SINR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constellation import Constellation, nearest_lattice
from .errors import ContractViolationError, InputError
from .heuristic import sinr_from_dmax
from .phy import SINR_CEILING

TAG_PILOT = 0
TAG_HEURISTIC = 1
TAG_RECONSTRUCTION = 2

DEFAULT_PRI_WINDOW = 500
DEFAULT_PEAK_THRESHOLD = 6.0
DEFAULT_GAMMA_TH_DB = 1.0
NPI_MEMORY_BLOCKS = 8


@dataclass(frozen=True)
class PriEstimate:
    """Estimated pulse repetition rate with its spectral peak confidence."""

    f_rep: float                # Hz
    confidence: float           # peak magnitude / median magnitude
    window: int


@dataclass(frozen=True)
class SinrGrid:
    """Per-RE SINR estimates, each tagged with the estimator that produced it."""

    values: np.ndarray
    source: np.ndarray          # TAG_* codes
    data_mask: np.ndarray

    def __post_init__(self):
        if not (self.values.shape == self.source.shape == self.data_mask.shape):
            raise InputError("SinrGrid arrays must share one shape")

    def wideband(self, mode: str = "average", beta: float = 4.0) -> float:
        from .phy import wideband_map
        return wideband_map(self.values[self.data_mask], mode=mode, beta=beta)


def estimate_prep(power_series: np.ndarray, window: int = DEFAULT_PRI_WINDOW,
                  block_duration: float = 1e-3,
                  threshold: float = DEFAULT_PEAK_THRESHOLD) -> PriEstimate | None:
    """Pulse repetition rate from the last `window` per-block power samples.

    Mean-removed DFT over the window; returns the strongest non-DC bin as a
    frequency if it clears threshold x the median bin magnitude, else None.
    Bin resolution is 1/(window * block_duration).
    """
    series = np.asarray(power_series, dtype=float)
    if series.size < window:
        raise InputError(f"need at least {window} power samples, got {series.size}")
    seg = series[-window:]
    spec = np.abs(np.fft.rfft(seg - seg.mean()))
    mags = spec[1:]
    med = float(np.median(mags))
    peak_idx = int(np.argmax(mags))
    peak = float(mags[peak_idx])
    if med <= 0 or peak < threshold * med:
        return None
    f_rep = (peak_idx + 1) / (window * block_duration)
    return PriEstimate(f_rep, peak / med, window)


def predict_impaired_blocks(pri: PriEstimate, phase_ref: float, horizon: int,
                            block_duration: float = 1e-3
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Blocks 0..horizon-1 hit by pulses at phase_ref + m/f_rep, with counts.

    phase_ref is a known pulse epoch in the same time base as the block
    grid. Counting uses the arithmetic lattice directly, so rationally
    related periods reproduce their exact hit pattern.
    """
    if pri is None:
        raise InputError("no PRI estimate available")
    t_rep = 1.0 / pri.f_rep
    edges = np.arange(horizon + 1) * block_duration
    k = np.floor((edges - phase_ref) / t_rep + 1e-12)
    counts = np.diff(k).astype(int)
    idx = np.flatnonzero(counts > 0)
    return idx, counts[idx]


def detect_pilot_contamination(gamma_avg_db: float, gamma_npi_db: float,
                               gamma_th_db: float = DEFAULT_GAMMA_TH_DB) -> bool:
    """True when the block's pilots are interference-impaired.

    An impaired block whose pilot-aided wideband SINR fell at least
    gamma_th below the interference-free reference is treated as
    pilot-impaired (the comparison is inclusive).
    """
    return (gamma_npi_db - gamma_avg_db) >= gamma_th_db


def detect_contaminated_symbol(equalized: np.ndarray, gamma_p: np.ndarray,
                               non_pilot_symbols, data_mask: np.ndarray,
                               c: Constellation, m: int = 1) -> np.ndarray:
    """Indices of the m interference-impaired OFDM symbols (Algorithm-style).

    Scores each candidate symbol with the negated mean of pilot-SINR-weighted
    squared nearest-neighbor distances over its data subcarriers and returns
    the m smallest scores (ties toward lower indices).
    """
    if m < 1:
        raise InputError("need at least one symbol to detect")
    cand = np.asarray(list(non_pilot_symbols), dtype=int)
    scores = np.empty(cand.size)
    for i, n in enumerate(cand):
        ks = np.flatnonzero(data_mask[n])
        _, dist = nearest_lattice(equalized[n, ks], c)
        scores[i] = -np.mean(gamma_p[n, ks] * dist ** 2)
    order = np.argsort(scores, kind="stable")
    return np.sort(cand[order[:m]])


def heuristic_symbol_sinr(equalized_row: np.ndarray, data_mask_row: np.ndarray,
                          c: Constellation, k_rb: int = 12,
                          signal_power: float = 1.0) -> np.ndarray:
    """Blind per-RE SINR for one OFDM symbol, constant over each coherence block.

    The block maximum of nearest-neighbor distances is taken over the
    symbol's data REs in runs of k_rb subcarriers; pilot positions inside a
    run are skipped, shortening that block.
    """
    n_sub = equalized_row.size
    out = np.full(n_sub, np.nan)
    _, dist = nearest_lattice(equalized_row, c)
    for start in range(0, n_sub, k_rb):
        sl = slice(start, min(start + k_rb, n_sub))
        sel = data_mask_row[sl]
        if not sel.any():
            continue
        dmax = float(dist[sl][sel].max())
        out[sl] = sinr_from_dmax(dmax, signal_power)
    return out


def hybrid_sinr_grid(pilot_sinr_grid: np.ndarray, data_mask: np.ndarray,
                     impaired: bool, pilot_impaired: bool | None = None,
                     detected_symbols=None, heuristic_rows: dict | None = None
                     ) -> SinrGrid:
    """Per-RE SINR dispatch for one block.

    Interference-free blocks and pilot-impaired blocks keep pilot-aided
    values everywhere (pilot estimates already reflect the hit in the latter
    case); a non-pilot hit replaces the detected symbol's data REs with the
    blind heuristic values.
    """
    values = np.array(pilot_sinr_grid, dtype=float)
    source = np.full(values.shape, TAG_PILOT, dtype=np.uint8)
    if impaired:
        if pilot_impaired is None:
            raise InputError("impaired block needs a pilot-contamination decision")
        if not pilot_impaired:
            if detected_symbols is None or heuristic_rows is None:
                raise InputError("non-pilot impairment needs detected symbols and heuristic values")
            for n in np.atleast_1d(detected_symbols):
                row = heuristic_rows[int(n)]
                sel = data_mask[n]
                values[n, sel] = row[sel]
                source[n, sel] = TAG_HEURISTIC
    return SinrGrid(values, source, np.asarray(data_mask, dtype=bool))


def reconstruction_sinr(x: np.ndarray, y: np.ndarray, crc_passed: bool,
                        ceiling: float = SINR_CEILING) -> np.ndarray:
    """Exact per-RE SINR |x|^2/|x-y|^2 from reconstructed transmit symbols."""
    if not crc_passed:
        raise ContractViolationError("reconstruction requires a CRC pass")
    x = np.asarray(x)
    y = np.asarray(y)
    err = np.abs(x - y) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = np.where(err > 0, np.abs(x) ** 2 / err, np.inf)
    return np.minimum(gamma, ceiling)


class PriTracker:
    """Causal PRI estimation and impairment prediction over a power series.

    Feeds estimate_prep over a sliding window and fits the pulse epoch by
    maximizing the comb-aligned power sum, refreshing both periodically.
    """

    def __init__(self, window: int = DEFAULT_PRI_WINDOW,
                 threshold: float = DEFAULT_PEAK_THRESHOLD,
                 block_duration: float = 1e-3, refresh: int = 50,
                 phase_offsets: int = 128):
        self.window = window
        self.threshold = threshold
        self.block_duration = block_duration
        self.refresh = refresh
        self.phase_offsets = phase_offsets
        self.powers: list[float] = []
        self.pri: PriEstimate | None = None
        self.t0_hat: float | None = None

    def update(self, block_idx: int, power: float) -> None:
        self.powers.append(float(power))
        if len(self.powers) >= self.window and block_idx % self.refresh == 0:
            self.pri = estimate_prep(np.asarray(self.powers), self.window,
                                     self.block_duration, self.threshold)
            if self.pri is not None:
                self._fit_phase(block_idx)
            else:
                self.t0_hat = None

    def _fit_phase(self, block_idx: int) -> None:
        t_rep = 1.0 / self.pri.f_rep
        seg = np.asarray(self.powers[-self.window:])
        seg = seg - np.median(seg)
        start_block = len(self.powers) - self.window
        offsets = np.arange(self.phase_offsets) * (t_rep / self.phase_offsets)
        n_pulses = int(self.window * self.block_duration / t_rep)
        m = np.arange(n_pulses)
        times = offsets[:, None] + m[None, :] * t_rep
        blocks = np.floor(times / self.block_duration).astype(int)
        blocks = np.clip(blocks, 0, self.window - 1)
        scores = seg[blocks].sum(axis=1)
        best = offsets[int(np.argmax(scores))]
        self.t0_hat = start_block * self.block_duration + best

    def predicted_pulse_count(self, block_idx: int) -> int:
        """Pulses expected inside a block, 0 when no PRI is locked."""
        if self.pri is None or self.t0_hat is None:
            return 0
        t_rep = 1.0 / self.pri.f_rep
        lo = block_idx * self.block_duration
        hi = lo + self.block_duration
        return int(math.floor((hi - self.t0_hat) / t_rep + 1e-12)
                   - math.floor((lo - self.t0_hat) / t_rep + 1e-12))


class NpiReference:
    """Running median of pilot-aided wideband SINR over recent clean blocks."""

    def __init__(self, memory: int = NPI_MEMORY_BLOCKS):
        self.memory = memory
        self.values: list[float] = []

    def update(self, gamma_db: float) -> None:
        self.values.append(float(gamma_db))
        if len(self.values) > self.memory:
            self.values.pop(0)

    @property
    def ready(self) -> bool:
        return len(self.values) >= max(2, self.memory // 2)

    @property
    def reference_db(self) -> float:
        if not self.values:
            raise InputError("no interference-free blocks observed yet")
        return float(np.median(self.values))
