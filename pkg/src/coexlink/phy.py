"""OFDM grid, pilots, channel estimation, MMSE equalization, SINR metrics.

The grid geometry follows the usual sub-6 GHz numerology: a power-of-two DFT
at sample rate n_dft * subcarrier_spacing, two slots of seven symbols per
block with a longer first cyclic prefix, so a 15 kHz / 600-subcarrier grid
spans exactly 1 ms. Cell-style pilots sit on four symbols per block, every
sixth subcarrier with a per-symbol frequency shift.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .constellation import build_qam
from .errors import ConfigurationError, InputError

SINR_CEILING = 1e4          # 40 dB cap wherever a denominator can vanish
PILOT_SYMBOLS = (0, 4, 7, 11)
PILOT_SHIFTS = (0, 3, 0, 3)
PILOT_SPACING = 6


def _default_n_dft(n_subcarriers: int) -> int:
    for n in (128, 256, 512, 1024, 2048):
        if n >= n_subcarriers * 4 // 3:
            return n
    raise ConfigurationError(f"no supported DFT size for {n_subcarriers} subcarriers")


@dataclass(frozen=True)
class GridGeometry:
    """Time-frequency lattice of one transmission block."""

    n_subcarriers: int = 600
    n_symbols: int = 14
    subcarrier_spacing: float = 15e3
    n_dft: int = 0

    def __post_init__(self):
        if self.n_dft == 0:
            object.__setattr__(self, "n_dft", _default_n_dft(self.n_subcarriers))
        if self.n_dft % 128 or self.n_dft < self.n_subcarriers:
            raise ConfigurationError("n_dft must be a multiple of 128 and >= n_subcarriers")
        if self.n_symbols % 7:
            raise ConfigurationError("n_symbols must be a multiple of 7 (whole slots)")

    @property
    def sample_rate(self) -> float:
        return self.subcarrier_spacing * self.n_dft

    @property
    def t_useful(self) -> float:
        return 1.0 / self.subcarrier_spacing

    @property
    def cp_samples(self) -> np.ndarray:
        cp0 = self.n_dft * 10 // 128
        cp = self.n_dft * 9 // 128
        slot = [cp0] + [cp] * 6
        return np.array(slot * (self.n_symbols // 7))

    @property
    def block_duration(self) -> float:
        total = int(self.cp_samples.sum()) + self.n_symbols * self.n_dft
        return total / self.sample_rate

    def useful_start_times(self) -> np.ndarray:
        """Start of each symbol's useful (post-CP) window, relative to block start."""
        lengths = self.cp_samples + self.n_dft
        starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
        return (starts + self.cp_samples) / self.sample_rate

    @property
    def subcarrier_bins(self) -> np.ndarray:
        """DFT bin of each subcarrier (band centered on DC)."""
        k = np.arange(self.n_subcarriers) - self.n_subcarriers // 2
        return np.mod(k, self.n_dft)

    @property
    def subcarrier_freqs(self) -> np.ndarray:
        k = np.arange(self.n_subcarriers) - self.n_subcarriers // 2
        return k * self.subcarrier_spacing

    def pilot_mask(self) -> np.ndarray:
        """Boolean (n_symbols, n_subcarriers) pilot-position mask."""
        mask = np.zeros((self.n_symbols, self.n_subcarriers), dtype=bool)
        for sym, shift in zip(PILOT_SYMBOLS, PILOT_SHIFTS):
            for s in range(sym, self.n_symbols, 14):
                mask[s, shift::PILOT_SPACING] = True
        return mask

    @property
    def n_data_re(self) -> int:
        return int((~self.pilot_mask()).sum())


@dataclass(frozen=True)
class ResourceGrid:
    """Transmitted block: per-RE symbols with pilot/data roles."""

    geometry: GridGeometry
    modulation: int
    symbols: np.ndarray
    pilot_mask: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        if self.symbols.shape != (self.geometry.n_symbols, self.geometry.n_subcarriers):
            raise ConfigurationError("symbol array does not match the geometry")
        if self.symbols.shape != self.pilot_mask.shape:
            raise ConfigurationError("pilot mask does not match the geometry")


@dataclass(frozen=True)
class EqualizedGrid:
    """Post-equalizer symbols and ground-truth per-RE SINR."""

    symbols: np.ndarray
    true_sinr: np.ndarray

    def __post_init__(self):
        if self.symbols.shape != self.true_sinr.shape:
            raise ConfigurationError("equalized symbols and SINR shapes differ")


def build_grid(geom: GridGeometry, modulation: int = 16, seed=None) -> ResourceGrid:
    """Random data symbols plus unit-power pilots on the cell-style pattern."""
    rng = np.random.default_rng(seed)
    const = build_qam(modulation)
    mask = geom.pilot_mask()
    symbols = const.points[rng.integers(0, const.order,
                                        (geom.n_symbols, geom.n_subcarriers))]
    n_pilots = int(mask.sum())
    symbols[mask] = np.exp(2j * math.pi * rng.random(n_pilots))
    return ResourceGrid(geom, modulation, symbols, mask, seed)


# ---------------------------------------------------------------------------
# channel estimation

def estimate_channel(received: np.ndarray, grid: ResourceGrid, realization,
                     mode: str = "genie") -> np.ndarray:
    """Per-RE channel estimates.

    genie returns the true response; ls_interp divides received pilots by the
    known pilot symbols and interpolates linearly in frequency then time,
    holding edges.
    """
    if mode == "genie":
        return realization.h.copy()
    if mode != "ls_interp":
        raise ConfigurationError(f"unknown channel estimation mode {mode!r}")
    geom = grid.geometry
    mask = grid.pilot_mask
    pilot_syms = [s for s in range(geom.n_symbols) if mask[s].any()]
    per_symbol = np.empty((len(pilot_syms), geom.n_subcarriers), dtype=complex)
    all_k = np.arange(geom.n_subcarriers)
    for i, s in enumerate(pilot_syms):
        ks = np.flatnonzero(mask[s])
        ls = received[s, ks] / grid.symbols[s, ks]
        per_symbol[i] = (np.interp(all_k, ks, ls.real)
                         + 1j * np.interp(all_k, ks, ls.imag))
    # piecewise-linear time interpolation as one weight matrix, edges held
    ts = np.asarray(pilot_syms, dtype=float)
    wts = np.zeros((geom.n_symbols, len(ts)))
    for j in range(len(ts)):
        basis = np.zeros(len(ts))
        basis[j] = 1.0
        wts[:, j] = np.interp(np.arange(geom.n_symbols), ts, basis)
    return wts @ per_symbol


def estimate_noise_from_pilots(received: np.ndarray, grid: ResourceGrid,
                               h_hat: np.ndarray) -> float:
    """Block noise-plus-interference variance from pilot residuals.

    Residual r = z/p - h_hat at pilot REs measures whatever impairs the
    pilots beyond the estimated channel; pooled over the block's pilots it
    is the receiver's sigma_w^2 working estimate (inflated when a
    pilot-bearing symbol is hit, which is what pilot-contamination
    detection relies on).
    """
    mask = grid.pilot_mask
    r = received[mask] / grid.symbols[mask] - h_hat[mask]
    return float(np.mean(np.abs(r) ** 2))


# ---------------------------------------------------------------------------
# equalization and SINR

def mmse_equalize(y: np.ndarray, h_hat: np.ndarray, w: np.ndarray,
                  sigma_w2_hat: float) -> np.ndarray:
    """MMSE estimate (W^H H^H H W + sigma^2 I)^-1 W^H H^H y for one RE."""
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    h_hat = np.atleast_2d(np.asarray(h_hat, dtype=complex))
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    hw = h_hat @ w
    gram = hw.conj().T @ hw + sigma_w2_hat * np.eye(w.shape[1])
    if sigma_w2_hat == 0 and np.linalg.matrix_rank(hw) < w.shape[1]:
        raise np.linalg.LinAlgError("singular zero-noise equalizer")
    return np.linalg.solve(gram, hw.conj().T @ y)


def pilot_sinr(h_hat: np.ndarray, w: np.ndarray, sigma_w2_hat: float) -> np.ndarray:
    """Pilot-aided per-layer post-equalizer SINR 1/[(W^H H^H H W/s2 + I)^-1]_ll - 1."""
    h_hat = np.atleast_2d(np.asarray(h_hat, dtype=complex))
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    if sigma_w2_hat <= 0:
        return np.full(w.shape[1], SINR_CEILING)
    hw = h_hat @ w
    m = hw.conj().T @ hw / sigma_w2_hat + np.eye(w.shape[1])
    inv = np.linalg.inv(m)
    gamma = 1.0 / np.real(np.diag(inv)) - 1.0
    return np.minimum(gamma, SINR_CEILING)


def true_post_eq_sinr(h: np.ndarray, h_hat: np.ndarray, w: np.ndarray,
                      sigma_w2_hat: float, h_r: np.ndarray, i_val: complex,
                      sigma_w2: float, ceiling: float = SINR_CEILING) -> np.ndarray:
    """Ground-truth per-layer post-equalizer SINR for one RE.

    Decomposes the equalized symbol into its useful diagonal coefficient and
    everything else (inter-layer leakage, equalized interference, equalized
    noise), taking data and noise at their second moments. With perfect
    estimates this reduces to the unbiased MMSE SINR, matching the
    pilot-aided formula exactly.
    """
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    h_hat = np.atleast_2d(np.asarray(h_hat, dtype=complex))
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    h_r_v = np.atleast_1d(np.asarray(h_r, dtype=complex))
    hw_hat = h_hat @ w
    gram = hw_hat.conj().T @ hw_hat + sigma_w2_hat * np.eye(w.shape[1])
    g = np.linalg.solve(gram, hw_hat.conj().T)          # (L, K)
    a = g @ (h @ w)                                     # (L, L)
    sig = np.abs(np.diag(a)) ** 2
    leak = np.sum(np.abs(a) ** 2, axis=1) - sig
    gi = np.abs(g @ h_r_v) ** 2 * abs(i_val) ** 2
    gn = np.sum(np.abs(g) ** 2, axis=1) * sigma_w2
    den = leak + gi + gn
    with np.errstate(divide="ignore"):
        gamma = np.where(den > 0, sig / den, np.inf)
    return np.minimum(gamma, ceiling)


def siso_true_sinr(h, h_hat, sigma_w2_hat, h_r, i_vals, sigma_w2,
                   ceiling: float = SINR_CEILING) -> np.ndarray:
    """Vectorized SISO specialization of true_post_eq_sinr over a grid."""
    g = np.conj(h_hat) / (np.abs(h_hat) ** 2 + sigma_w2_hat)
    sig = np.abs(g * h) ** 2
    den = np.abs(g) ** 2 * (np.abs(h_r * i_vals) ** 2 + sigma_w2)
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = np.where(den > 0, sig / den, np.inf)
    return np.minimum(gamma, ceiling)


def wideband_map(gammas: np.ndarray, mode: str = "eesm", beta: float = 4.0) -> float:
    """Wideband SINR summary of per-RE values: EESM or arithmetic mean."""
    g = np.asarray(gammas, dtype=float).ravel()
    if g.size == 0:
        raise InputError("wideband mapping needs at least one data RE")
    if mode == "average":
        return float(np.mean(g))
    if mode == "eesm":
        return float(-beta * math.log(np.mean(np.exp(-g / beta))))
    raise ConfigurationError(f"unknown wideband mapping {mode!r}")


# ---------------------------------------------------------------------------
# grid dump (analyzer-path interchange format)

GRID_DUMP_COLUMNS = "n,k,role,re,im,pilot"


def dump_grid_csv(path, grid: ResourceGrid, equalized: np.ndarray) -> None:
    """Write per-RE records with a header carrying dims, modulation and seed."""
    geom = grid.geometry
    with open(path, "w", newline="") as fh:
        fh.write(f"# n_symbols={geom.n_symbols} n_subcarriers={geom.n_subcarriers} "
                 f"modulation={grid.modulation} seed={grid.seed}\n")
        fh.write(GRID_DUMP_COLUMNS + "\n")
        for n in range(geom.n_symbols):
            for k in range(geom.n_subcarriers):
                pilot = bool(grid.pilot_mask[n, k])
                role = "pilot" if pilot else "data"
                v = equalized[n, k]
                fh.write(f"{n},{k},{role},{v.real:.12g},{v.imag:.12g},{int(pilot)}\n")


def load_grid_csv(path) -> tuple[dict, np.ndarray, np.ndarray]:
    """Read a grid dump: (header fields, equalized symbols, pilot mask)."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise InputError("grid dump missing header line")
        fields = dict(kv.split("=") for kv in header[1:].split())
        body = fh.read()
    n_sym = int(fields["n_symbols"])
    n_sub = int(fields["n_subcarriers"])
    data = np.genfromtxt(io.StringIO(body), delimiter=",", names=True,
                         dtype=None, encoding="utf-8")
    symbols = np.zeros((n_sym, n_sub), dtype=complex)
    pilot = np.zeros((n_sym, n_sub), dtype=bool)
    symbols[data["n"], data["k"]] = data["re"] + 1j * data["im"]
    pilot[data["n"], data["k"]] = data["pilot"].astype(bool)
    return fields, symbols, pilot
