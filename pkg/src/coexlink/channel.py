"""Fading channels: sum-of-sinusoids Rayleigh taps and per-RE realizations.

The serving link uses a tapped delay line with an Extended-Pedestrian-A
power-delay profile by default; each tap is a Clarke-style sum of sinusoids,
so realizations are deterministic per seed and the ensemble statistics are
Rayleigh with the classic Bessel temporal autocorrelation. The radar-to-user
link defaults to an independent single-tap Rayleigh process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InputError

# 3GPP EPA power-delay profile (the profile name fixes these values)
EPA_DELAYS_NS = (0.0, 30.0, 70.0, 90.0, 110.0, 190.0, 410.0)
EPA_POWERS_DB = (0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8)

DEFAULT_N_SINUSOIDS = 64


@dataclass
class FadingProcess:
    """Per-tap sum-of-sinusoids Rayleigh processes with unit total power."""

    delays: np.ndarray          # seconds
    powers: np.ndarray          # linear, sums to 1
    doppler: float              # Hz
    seed: int | None = None
    n_sinusoids: int = DEFAULT_N_SINUSOIDS
    _angles: np.ndarray = field(init=False, repr=False)
    _phases: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.doppler < 0:
            raise InputError("doppler must be nonnegative")
        self.delays = np.asarray(self.delays, dtype=float)
        powers = np.asarray(self.powers, dtype=float)
        self.powers = powers / powers.sum()
        rng = np.random.default_rng(self.seed)
        n_taps = len(self.delays)
        self._angles = rng.uniform(0.0, 2 * math.pi, (n_taps, self.n_sinusoids))
        self._phases = rng.uniform(0.0, 2 * math.pi, (n_taps, self.n_sinusoids))

    def tap_gains(self, t) -> np.ndarray:
        """Complex tap gains at times t; shape (n_taps,) + t.shape."""
        t = np.asarray(t, dtype=float)
        omega = 2 * math.pi * self.doppler * np.cos(self._angles)   # (taps, S)
        arg = omega[..., None] * t.ravel()[None, None, :] + self._phases[..., None]
        g = np.exp(1j * arg).sum(axis=1) / math.sqrt(self.n_sinusoids)
        g = g * np.sqrt(self.powers)[:, None]
        return g.reshape((len(self.delays),) + t.shape)

    def frequency_response(self, t, freqs) -> np.ndarray:
        """Response at times t (shape T) and frequencies freqs (shape F) -> (T, F).

        The response is the Fourier sum of the tapped delay line at each
        instant: H(t, f) = sum_taps g_tap(t) exp(-j 2 pi f tau_tap).
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
        g = self.tap_gains(t)                                       # (taps, T)
        steer = np.exp(-2j * math.pi * freqs[None, :] * self.delays[:, None])
        return np.einsum("pt,pf->tf", g, steer)


def epa_fading(doppler: float = 10.0, seed=None,
               delays_ns=EPA_DELAYS_NS, powers_db=EPA_POWERS_DB,
               n_sinusoids: int = DEFAULT_N_SINUSOIDS) -> FadingProcess:
    """EPA-profile fading process (configurable override of the tap table)."""
    delays = np.asarray(delays_ns, dtype=float) * 1e-9
    powers = 10.0 ** (np.asarray(powers_db, dtype=float) / 10.0)
    return FadingProcess(delays, powers, doppler, seed=seed, n_sinusoids=n_sinusoids)


def single_tap_fading(doppler: float = 10.0, seed=None,
                      n_sinusoids: int = DEFAULT_N_SINUSOIDS) -> FadingProcess:
    """Frequency-flat Rayleigh process (radar-link default)."""
    return FadingProcess(np.array([0.0]), np.array([1.0]), doppler,
                         seed=seed, n_sinusoids=n_sinusoids)


@dataclass(frozen=True)
class ChannelRealization:
    """Per-RE serving response, radar-link response, and noise variance."""

    h: np.ndarray               # (n_symbols, n_subcarriers) serving link
    h_r: np.ndarray             # (n_symbols, n_subcarriers) radar link
    sigma_w2: float

    def __post_init__(self):
        if self.h.shape != self.h_r.shape:
            raise ConfigurationError("serving and radar responses must share the grid shape")


def realize(fading: FadingProcess, geom, snr_db: float, seed=None,
            radar_fading: FadingProcess | None = None,
            radar_gain: complex | None = None,
            t_offset: float = 0.0) -> ChannelRealization:
    """Per-RE channel realization on one block of the grid geometry.

    sigma_w^2 is set from the target average SNR assuming unit signal power
    and unit average channel power. The radar link is an independent
    single-tap Rayleigh process unless a static `radar_gain` is given.
    Deterministic given the fading processes (seed feeds the radar link
    default when one has to be created).
    """
    times = t_offset + geom.useful_start_times()
    freqs = geom.subcarrier_freqs
    h = fading.frequency_response(times, freqs)
    if radar_gain is not None:
        h_r = np.full(h.shape, complex(radar_gain))
    else:
        if radar_fading is None:
            radar_fading = single_tap_fading(fading.doppler, seed=seed)
        h_r = radar_fading.frequency_response(times, freqs)
    sigma_w2 = 10.0 ** (-snr_db / 10.0)
    return ChannelRealization(h, h_r, sigma_w2)


def awgn(shape, sigma2: float, rng) -> np.ndarray:
    """Complex Gaussian noise CN(0, sigma2) of the given shape."""
    scale = math.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
