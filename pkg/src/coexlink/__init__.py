"""OFDM downlink / pulsed-radar coexistence: link simulation and analysis."""

__version__ = "0.1.0"

from .constellation import Constellation, DecisionRegion, build_qam, nearest_neighbor
from .dmax_dist import (InterferenceModel, PhaseModel, accuracy_prob, cdf_dmax_iid,
                        cdf_dmax_known_phase, cond_cdf_d, marginal_cdf_d,
                        mc_sample_dmax, overestimation_prob)
from .heuristic import CoherenceBlock, d_max, sinr_from_dmax
from .marcum import marcum_q1

__all__ = [
    "Constellation", "DecisionRegion", "build_qam", "nearest_neighbor",
    "InterferenceModel", "PhaseModel", "accuracy_prob", "cdf_dmax_iid",
    "cdf_dmax_known_phase", "cond_cdf_d", "marginal_cdf_d", "mc_sample_dmax",
    "overestimation_prob", "CoherenceBlock", "d_max", "sinr_from_dmax",
    "marcum_q1", "__version__",
]
