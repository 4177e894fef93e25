"""Max-min amplitude heuristic over coherence blocks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coexlink.constellation import build_qam
from coexlink.dmax_dist import InterferenceModel, cdf_dmax_iid, comparison_grid, ecdf_sup_gap
from coexlink.errors import InputError
from coexlink.heuristic import CoherenceBlock, d_max, d_max_per_block, sinr_from_dmax


@pytest.fixture(scope="module")
def qam16():
    return build_qam(16)


class TestDmax:
    def test_on_constellation_points_is_zero(self, qam16):
        block = CoherenceBlock(qam16.points[:12].copy(), 12)
        assert d_max(block, qam16) == 0.0

    def test_constant_interference_amplitude(self, qam16):
        # below d_c/2 the transmitted point stays nearest, any phases
        rng = np.random.default_rng(3)
        x = qam16.points[rng.integers(0, 16, 12)]
        phases = rng.uniform(0, 2 * math.pi, 12)
        block = CoherenceBlock(x + 0.2 * np.exp(1j * phases), 12)
        assert d_max(block, qam16) == pytest.approx(0.2, abs=1e-12)

    def test_empty_block_rejected(self, qam16):
        with pytest.raises(InputError):
            CoherenceBlock(np.array([]), 0)

    def test_nonfinite_rejected(self, qam16):
        block = CoherenceBlock(np.array([0j] * 11 + [complex("nan")]), 12)
        with pytest.raises(InputError):
            d_max(block, qam16)

    @given(st.integers(1, 8), st.integers(1, 6))
    @settings(max_examples=50, deadline=None)
    def test_monotone_under_append(self, n1, n2):
        c = build_qam(16)
        rng = np.random.default_rng(n1 * 31 + n2)
        s1 = rng.normal(size=n1) + 1j * rng.normal(size=n1)
        s2 = rng.normal(size=n2) + 1j * rng.normal(size=n2)
        a = d_max(CoherenceBlock(s1, n1), c)
        b = d_max(CoherenceBlock(np.concatenate([s1, s2]), n1 + n2), c)
        assert b >= a

    @given(st.floats(0.05, 20.0))
    @settings(max_examples=50, deadline=None)
    def test_scale_covariance(self, alpha):
        c = build_qam(16)
        rng = np.random.default_rng(11)
        s = rng.normal(size=12) + 1j * rng.normal(size=12)
        base = d_max(CoherenceBlock(s, 12), c)
        scaled = d_max(CoherenceBlock(alpha * s, 12), c.scaled(alpha))
        assert scaled == pytest.approx(alpha * base, rel=1e-9)

    def test_distribution_matches_analytic(self, qam16):
        # Monte Carlo blocks against the analytic block-max CDF
        m = InterferenceModel(1e-2, 1e-3, qam16, 12)
        rng = np.random.default_rng(5)
        n = 30000
        x = qam16.points[rng.integers(0, 16, (n, 12))]
        phi = rng.uniform(0, 2 * math.pi, (n, 12))
        noise = (rng.standard_normal((n, 12)) + 1j * rng.standard_normal((n, 12)))
        y = x + math.sqrt(m.p_r) * np.exp(1j * phi) + noise * math.sqrt(m.sigma_n2 / 2)
        samples = np.sort(d_max_per_block(y, qam16, 12).ravel())
        grid = comparison_grid(samples, 60)
        gap = ecdf_sup_gap(samples, grid, cdf_dmax_iid(grid, m))
        assert gap <= 0.02

    def test_overestimation_trend_in_k_rb(self, qam16):
        # empirical P[D_max >= sqrt(P_r + sigma^2)] grows with block length
        rng = np.random.default_rng(9)
        p_r, s2 = 1e-2, 1e-3
        thr = math.sqrt(p_r + s2)
        n = 20000
        probs = []
        for k in (2, 6, 12):
            x = qam16.points[rng.integers(0, 16, (n, k))]
            phi = rng.uniform(0, 2 * math.pi, (n, k))
            noise = (rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k)))
            y = x + math.sqrt(p_r) * np.exp(1j * phi) + noise * math.sqrt(s2 / 2)
            probs.append(np.mean(d_max_per_block(y, qam16, k) >= thr))
        assert probs[0] <= probs[1] + 0.01
        assert probs[1] <= probs[2] + 0.01


class TestSinrFromDmax:
    def test_power_ratio(self):
        assert sinr_from_dmax(0.1, 1.0) == pytest.approx(100.0)

    def test_zero_dmax_hits_ceiling(self):
        assert sinr_from_dmax(0.0, 1.0) == pytest.approx(1e4)
        assert sinr_from_dmax(0.0, 1.0, ceiling_db=30.0) == pytest.approx(1e3)

    def test_unity(self):
        assert sinr_from_dmax(1.0, 1.0) == pytest.approx(1.0)

    def test_negative_rejected(self):
        with pytest.raises(InputError):
            sinr_from_dmax(-0.5, 1.0)
        with pytest.raises(InputError):
            sinr_from_dmax(0.5, -1.0)
