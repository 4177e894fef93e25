"""Limited CSI feedback: window quantization, dual reports, overhead accounting.

Conventional schemes feed back one statistic (min/median/max) of the window's
per-block CQIs. The dual report carries separate CQIs for the fading and the
interference-impaired channel states plus radar indicator bits predicting
which of the upcoming blocks will be hit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

SCHEMES = ("min", "median", "max")
BLOCK_DURATION_S = 1e-3


@dataclass(frozen=True)
class CsiReport:
    """Quantized channel state: CQI plus (trivial in SISO) precoder and rank."""

    cqi: int
    pmi: int = 0
    rank: int = 1

    def __post_init__(self):
        if not 0 <= self.cqi <= 15:
            raise InputError(f"CQI {self.cqi} out of range")
        if self.rank < 1:
            raise InputError("rank must be at least 1")


@dataclass(frozen=True)
class DualCsiReport:
    """Per-state CSI plus indicator bits for the next reporting window."""

    fading: CsiReport
    impaired: CsiReport | None
    radar_indicator: np.ndarray        # bool, one bit per upcoming block
    fading_fallback: bool = False      # no clean block seen; fading CQI used all blocks

    def __post_init__(self):
        ind = np.asarray(self.radar_indicator, dtype=bool)
        object.__setattr__(self, "radar_indicator", ind)


def quantize_window(cqi_vector, scheme: str) -> int:
    """Window statistic of per-block CQIs; even-count median takes the lower middle."""
    v = np.asarray(cqi_vector, dtype=int)
    if v.size == 0:
        raise InputError("empty CQI window")
    if scheme == "min":
        return int(v.min())
    if scheme == "max":
        return int(v.max())
    if scheme == "median":
        return int(np.sort(v)[(v.size - 1) // 2])
    raise InputError(f"unknown quantization scheme {scheme!r}")


def dual_csi_report(cqis, impaired_flags, indicator,
                    fading_stat: str = "median", impaired_stat: str = "min") -> DualCsiReport:
    """Dual-state report over one estimation window.

    The fading CQI summarizes interference-free blocks, the impaired CQI the
    hit blocks (absent when the window saw none); with no clean block the
    fading CQI falls back to the all-blocks statistic and is flagged.
    """
    cqis = np.asarray(cqis, dtype=int)
    flags = np.asarray(impaired_flags, dtype=bool)
    if cqis.shape != flags.shape:
        raise InputError("CQI vector and impairment flags must align")
    clean = cqis[~flags]
    fallback = clean.size == 0
    fading_cqi = quantize_window(cqis if fallback else clean, fading_stat)
    impaired = None
    if flags.any():
        impaired = CsiReport(quantize_window(cqis[flags], impaired_stat))
    return DualCsiReport(CsiReport(fading_cqi), impaired, indicator, fallback)


def feedback_overhead(n_act: int, n_int: int, b_rad: int,
                      t_csi: float, block_duration: float = BLOCK_DURATION_S
                      ) -> tuple[int, float]:
    """Additional dual-feedback bits per window and the rate they consume.

    b_int = n_act * n_int + b_rad bits per reporting interval; r_int is that
    divided by the interval. b_rad must lie between ceil(log2(T_CSI)) (a
    fully compressed single-position index) and T_CSI (a raw bitmap).
    """
    if n_act < 0 or n_int <= 0 or t_csi <= 0:
        raise InputError("overhead inputs must be positive (n_act may be zero)")
    t_csi_blocks = int(round(t_csi / block_duration))
    if t_csi_blocks < 1:
        raise InputError("reporting interval shorter than one block")
    lo = math.ceil(math.log2(t_csi_blocks)) if t_csi_blocks > 1 else 1
    if not lo <= b_rad <= t_csi_blocks:
        raise InputError(
            f"b_rad={b_rad} outside [{lo}, {t_csi_blocks}] for T_CSI={t_csi_blocks} blocks")
    b_int = n_act * n_int + b_rad
    return b_int, b_int / t_csi
