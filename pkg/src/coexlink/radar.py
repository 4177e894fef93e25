"""Pulsed LFM radar: waveform, analytic spectrum, and grid-level interference.

The chirp sweeps f_s Hz over a pulse of width t_pul, repeating every t_rep.
Interference enters the OFDM grid by sampling the pulse inside each symbol's
useful (post-CP) window and applying the demodulator's own DFT, so the
injected coefficients are bit-exact with the receiver's processing; the
stationary-phase spectrum approximation is kept as an analytic cross-check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InputError

SPECTRUM_VALIDITY_TB = 10.0  # minimum time-bandwidth product for the approximation


class SpectrumValidityWarning(UserWarning):
    """Raised when the stationary-phase spectrum is evaluated at low f_s * t_pul."""


@dataclass(frozen=True)
class RadarConfig:
    """LFM pulse train parameters (linear power, seconds, Hz)."""

    p_rad: float = 1.0
    t_pul: float = 5e-6
    f_s: float = 5e6
    delta_f_r: float = 0.0
    t_rep: float = 3.125e-3
    phase0: float = 0.0
    t0: float = 0.0

    def __post_init__(self):
        if self.t_pul <= 0:
            raise ConfigurationError("pulse width t_pul must be positive")
        if self.t_rep <= self.t_pul:
            raise ConfigurationError("repetition interval t_rep must exceed t_pul")
        if self.f_s <= 0:
            raise ConfigurationError("sweep frequency f_s must be positive")
        if self.p_rad < 0:
            raise ConfigurationError("transmit power p_rad must be nonnegative")

    @property
    def time_bandwidth(self) -> float:
        return self.f_s * self.t_pul

    @property
    def spectrum_approx_valid(self) -> bool:
        return self.time_bandwidth >= SPECTRUM_VALIDITY_TB


@dataclass(frozen=True)
class PulseTrain:
    """Pulse-center arrival times and per-pulse initial phases."""

    arrivals: np.ndarray
    phases: np.ndarray = field(default=None)

    def __post_init__(self):
        arr = np.asarray(self.arrivals, dtype=float)
        if arr.size > 1 and not np.all(np.diff(arr) > 0):
            raise InputError("pulse arrivals must be strictly increasing")
        object.__setattr__(self, "arrivals", arr)
        if self.phases is None:
            object.__setattr__(self, "phases", np.zeros_like(arr))
        else:
            ph = np.asarray(self.phases, dtype=float)
            if ph.shape != arr.shape:
                raise InputError("phases must match arrivals in shape")
            object.__setattr__(self, "phases", ph)


def pulse_train(cfg: RadarConfig, horizon: float, rng=None,
                phase_mode: str = "random") -> PulseTrain:
    """Arrivals t0 + m*t_rep inside [0, horizon); phases random or fixed.

    Randomized per-pulse phases model an incoherent illuminator; the fixed
    mode keeps phase0 on every pulse for known-phase experiments.
    """
    if horizon <= 0:
        return PulseTrain(np.empty(0), np.empty(0))
    first = math.ceil((-cfg.t0 - cfg.t_pul / 2) / cfg.t_rep)
    arrivals = []
    m = first
    while cfg.t0 + m * cfg.t_rep < horizon + cfg.t_pul / 2:
        arrivals.append(cfg.t0 + m * cfg.t_rep)
        m += 1
    arrivals = np.array(arrivals)
    if phase_mode == "random":
        rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
        phases = rng.uniform(0.0, 2 * math.pi, size=arrivals.size)
    elif phase_mode == "fixed":
        phases = np.full(arrivals.size, cfg.phase0)
    else:
        raise ConfigurationError(f"unknown phase_mode {phase_mode!r}")
    return PulseTrain(arrivals, phases)


def lfm_pulse(t, cfg: RadarConfig, phase0: float | None = None):
    """Baseband chirp amplitude at time t (pulse centered at t=0)."""
    t = np.asarray(t, dtype=float)
    ph0 = cfg.phase0 if phase0 is None else phase0
    phase = (math.pi * cfg.f_s / cfg.t_pul * t + 2 * math.pi * cfg.delta_f_r) * t + ph0
    out = math.sqrt(cfg.p_rad) * np.exp(1j * phase)
    out = np.where(np.abs(t) <= cfg.t_pul / 2, out, 0.0 + 0.0j)
    return complex(out) if np.ndim(t) == 0 else out


def lfm_spectrum_approx(f, cfg: RadarConfig, phase0: float | None = None):
    """Stationary-phase spectrum sqrt(P T/f_s) exp(-j(pi T (f-df)^2/f_s + pi/4)).

    Constant magnitude across the sweep band; accurate only for large
    time-bandwidth product (warns below the validity threshold).
    """
    if not cfg.spectrum_approx_valid:
        warnings.warn(
            f"time-bandwidth product {cfg.time_bandwidth:.2f} below "
            f"{SPECTRUM_VALIDITY_TB}; stationary-phase spectrum is unreliable",
            SpectrumValidityWarning, stacklevel=2)
    f = np.asarray(f, dtype=float)
    ph0 = cfg.phase0 if phase0 is None else phase0
    mag = math.sqrt(cfg.p_rad * cfg.t_pul / cfg.f_s)
    phase = -(math.pi * cfg.t_pul * (f - cfg.delta_f_r) ** 2 / cfg.f_s + math.pi / 4) + ph0
    out = mag * np.exp(1j * phase)
    return complex(out) if np.ndim(f) == 0 else out


def re_interference_map(train: PulseTrain, geom, cfg: RadarConfig,
                        radar_gain=1.0) -> np.ndarray:
    """Per-RE interference symbols for one block of OFDM symbols.

    geom is a GridGeometry (see phy); its useful-symbol windows are sampled
    at the demodulator rate, the pulse waveform is evaluated at those
    instants with its true continuous-time offset, and the windowed segment
    passes through the same normalized DFT the demodulator applies. Overlap
    confined to a cyclic prefix therefore contributes nothing. radar_gain
    broadcasts against the (n_symbols, n_subcarriers) output.

    Symbol timing is relative to the block start; train arrivals are in the
    same time base.
    """
    if cfg.t_pul >= geom.t_useful:
        raise ConfigurationError(
            f"pulse width {cfg.t_pul:.3g}s is not shorter than the useful "
            f"symbol window {geom.t_useful:.3g}s")
    out = np.zeros((geom.n_symbols, geom.n_subcarriers), dtype=complex)
    if train.arrivals.size == 0 or cfg.p_rad == 0.0:
        return out * radar_gain

    n_dft = geom.n_dft
    t_sample = 1.0 / geom.sample_rate
    starts = geom.useful_start_times()
    for arrival, ph0 in zip(train.arrivals, train.phases):
        lo = arrival - cfg.t_pul / 2
        hi = arrival + cfg.t_pul / 2
        for n in range(geom.n_symbols):
            w0 = starts[n]
            w1 = w0 + geom.t_useful
            if hi <= w0 or lo >= w1:
                continue
            ts = w0 + np.arange(n_dft) * t_sample
            seg = lfm_pulse(ts - arrival, cfg, phase0=ph0)
            spec = np.fft.fft(seg) / n_dft
            out[n] += spec[geom.subcarrier_bins]
    return out * radar_gain


def square_law_phases(t_pul, f_s, delta_f, k, i):
    """Square-law phase terms pi*t_pul*((k+i)*delta_f)^2/f_s, modulo 2pi."""
    k = np.asarray(k, dtype=float)
    i = np.asarray(i, dtype=float)
    return np.mod(math.pi * t_pul * ((k + i) * delta_f) ** 2 / f_s, 2 * math.pi)
