"""CQI quantization, MCS selection, and the parametric block-error abstraction.

Decoding is abstracted by a logistic BLER curve per MCS (in dB, slope per dB,
midpoint gamma50) with CRC outcomes drawn per block; the shipped table pairs
one MCS with each 4-bit CQI level and places gamma50 so modeled BLER is the
0.1 target exactly at the CQI threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigurationError, InputError

TARGET_BLER = 0.1


@dataclass(frozen=True)
class McsEntry:
    index: int
    modulation: int
    efficiency: float           # information bits per data RE
    gamma50_db: float           # logistic midpoint


@dataclass(frozen=True)
class McsTable:
    version: str
    entries: tuple[McsEntry, ...]
    cqi_thresholds_db: tuple[float, ...]
    slope_per_db: float

    def __post_init__(self):
        eff = [e.efficiency for e in self.entries]
        g50 = [e.gamma50_db for e in self.entries]
        if not all(b > a for a, b in zip(eff, eff[1:])):
            raise ConfigurationError("MCS efficiencies must be strictly increasing")
        if not all(b > a for a, b in zip(g50, g50[1:])):
            raise ConfigurationError("MCS gamma50 values must be strictly increasing")
        thr = self.cqi_thresholds_db
        if not all(b > a for a, b in zip(thr, thr[1:])):
            raise ConfigurationError("CQI thresholds must be strictly increasing")
        if len(thr) != len(self.entries):
            raise ConfigurationError("need one MCS entry per CQI level")

    @classmethod
    def from_dict(cls, d: dict) -> "McsTable":
        entries = tuple(McsEntry(e["index"], e["modulation"], e["efficiency"],
                                 e["gamma50_db"]) for e in d["mcs"])
        return cls(d["version"], entries, tuple(d["cqi_thresholds_db"]),
                   d["bler_slope_per_db"])

    @classmethod
    def default(cls) -> "McsTable":
        text = resources.files("coexlink.data").joinpath("lte_mcs_v1.json").read_text()
        return cls.from_dict(json.loads(text))

    def entry(self, mcs_index: int) -> McsEntry:
        for e in self.entries:
            if e.index == mcs_index:
                return e
        raise InputError(f"unknown MCS index {mcs_index}")

    @property
    def max_efficiency(self) -> float:
        return self.entries[-1].efficiency


def cqi_from_sinr(gamma: float, table: McsTable) -> int:
    """Largest CQI whose threshold is at or below the wideband SINR (linear)."""
    if gamma <= 0:
        return 0
    g_db = 10.0 * math.log10(gamma)
    cqi = int(np.searchsorted(np.asarray(table.cqi_thresholds_db), g_db, side="right"))
    return min(cqi, len(table.cqi_thresholds_db))


def bler_model(gamma, mcs: McsEntry, table: McsTable):
    """Logistic block error rate in dB: 1/(1 + exp(slope*(gamma_dB - gamma50)))."""
    g = np.asarray(gamma, dtype=float)
    with np.errstate(divide="ignore"):
        g_db = np.where(g > 0, 10.0 * np.log10(np.maximum(g, 1e-300)), -np.inf)
    arg = np.clip(table.slope_per_db * (g_db - mcs.gamma50_db), -700, 700)
    out = 1.0 / (1.0 + np.exp(arg))
    return float(out) if np.ndim(gamma) == 0 else out


def select_mcs(gamma: float, table: McsTable, target_bler: float = TARGET_BLER) -> int:
    """Highest-efficiency MCS whose modeled BLER at gamma (linear) meets the
    target; the lowest MCS if none does."""
    best = table.entries[0].index
    for e in table.entries:
        if bler_model(gamma, e, table) <= target_bler:
            best = e.index
    return best


def select_mcs_from_cqi(cqi: int, table: McsTable) -> int:
    """MCS for a reported CQI; CQI 0 (out of range) maps to the lowest MCS."""
    if cqi <= 0:
        return table.entries[0].index
    return table.entries[min(cqi, len(table.entries)) - 1].index


def crc_outcome(gamma_eff: float, mcs: McsEntry, table: McsTable, rng) -> bool:
    """Bernoulli decode outcome: True = CRC pass. Deterministic per rng state."""
    return bool(rng.random() >= bler_model(gamma_eff, mcs, table))
