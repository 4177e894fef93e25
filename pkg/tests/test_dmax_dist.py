"""Analytic nearest-neighbor distance distribution vs oracles."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import i0e
from scipy.stats import ncx2

from coexlink.constellation import build_qam, nearest_lattice
from coexlink.dmax_dist import (InterferenceModel, PhaseModel, _cond_grid_radial,
                                accuracy_prob, cdf_dmax_iid, cdf_dmax_known_phase,
                                comparison_grid, cond_cdf_d, ecdf_sup_gap,
                                marginal_cdf_d, mc_sample_dmax, overestimation_prob,
                                square_law_phase_relation)
from coexlink.errors import InputError
from coexlink.marcum import marcum_q1

S10 = math.sqrt(10.0)


@pytest.fixture(scope="module")
def qam16():
    return build_qam(16)


@pytest.fixture(scope="module")
def qpsk():
    return build_qam(4)


class TestMarcumQ1:
    def test_b_zero_is_one(self):
        for a in (0.0, 0.3, 2.0, 50.0):
            assert marcum_q1(a, 0.0) == 1.0

    def test_a_zero_rayleigh_tail(self):
        for b in (0.1, 1.0, 3.0):
            assert marcum_q1(0.0, b) == pytest.approx(math.exp(-b * b / 2), abs=1e-14)

    def test_reference_value_against_quadrature_oracle(self):
        def oracle(a, b):
            f = lambda z: z * i0e(a * z) * np.exp(-0.5 * (z - a) ** 2)
            v, _ = quad(f, b, max(a, b) + 16, epsabs=1e-13, epsrel=1e-13, limit=400)
            return v

        assert marcum_q1(1.0, 1.0) == pytest.approx(oracle(1.0, 1.0), abs=1e-10)
        assert marcum_q1(1.0, 1.0) == pytest.approx(0.7328798038, abs=1e-9)
        for a, b in [(0.5, 3.0), (10.0, 9.0), (100.0, 101.0), (3.0, 0.2)]:
            assert marcum_q1(a, b) == pytest.approx(oracle(a, b), abs=1e-10)

    def test_against_noncentral_chi2(self):
        rng = np.random.default_rng(1)
        a = rng.uniform(0, 20, 200)
        b = rng.uniform(0, 20, 200)
        ref = ncx2.sf(b ** 2, 2, a ** 2)
        np.testing.assert_allclose(marcum_q1(a, b), ref, atol=1e-9)

    def test_range_and_vectorization(self):
        out = marcum_q1(np.linspace(0, 30, 50)[:, None], np.linspace(0, 30, 40)[None, :])
        assert out.shape == (50, 40)
        assert np.all(out >= 0) and np.all(out <= 1)

    def test_negative_rejected(self):
        with pytest.raises(InputError):
            marcum_q1(-1.0, 1.0)
        with pytest.raises(InputError):
            marcum_q1(1.0, -1.0)


class TestCondCdf:
    def test_zero_distance(self, qam16):
        m = InterferenceModel(1e-2, 1e-3, qam16, 12)
        assert cond_cdf_d(0.0, qam16.points[10], 0.3, m) == 0.0

    def test_large_distance_saturates(self, qam16):
        m = InterferenceModel(1e-2, 1e-2, qam16, 12)
        val = cond_cdf_d(50 * qam16.d_c, qam16.points[10], 1.1, m)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_against_mc_conditional_oracle(self, qam16):
        m = InterferenceModel(1e-2, 1e-3, qam16, 12)
        x = (1 + 1j) / S10
        rng = np.random.default_rng(17)
        n = 10 ** 6
        noise = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(m.sigma_n2 / 2)
        y = x + math.sqrt(m.p_r) + noise           # phi = 0
        _, dist = nearest_lattice(y, qam16)
        dist = np.sort(dist)
        grid = comparison_grid(dist, 80)
        vals = cond_cdf_d(grid, x, 0.0, m)
        assert ecdf_sup_gap(dist, grid, vals) <= 0.01

    def test_piecewise_and_radial_evaluators_agree(self, qam16):
        # two independently derived evaluators; also covers both case seams
        for p_r, s2 in [(1e-2, 1e-3), (0.3, 0.05), (1.0, 1.0)]:
            m = InterferenceModel(p_r, s2, qam16, 12)
            x = qam16.points[6]
            phi = 0.7
            grid = np.linspace(0.0, 2.2, 40)
            a = cond_cdf_d(grid, x, phi, m)
            mu = x + math.sqrt(p_r) * np.exp(1j * phi)
            b = _cond_grid_radial(grid, np.array([mu]), m)[0]
            np.testing.assert_allclose(a, b, atol=1e-3)

    def test_negative_distance_rejected(self, qam16):
        m = InterferenceModel(1e-2, 1e-3, qam16, 12)
        with pytest.raises(InputError):
            cond_cdf_d(-0.1, qam16.points[0], 0.0, m)


class TestMarginalCdf:
    def test_zero(self, qam16):
        m = InterferenceModel(1e-2, 1e-3, qam16, 12)
        assert marginal_cdf_d(0.0, m) == 0.0

    def test_no_interference_matches_pure_noise_mc(self, qam16):
        m = InterferenceModel(0.0, 1e-2, qam16, 12)
        rng = np.random.default_rng(23)
        n = 10 ** 5
        x = qam16.points[rng.integers(0, 16, n)]
        noise = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(m.sigma_n2 / 2)
        _, dist = nearest_lattice(x + noise, qam16)
        dist = np.sort(dist)
        grid = comparison_grid(dist, 60)
        assert ecdf_sup_gap(dist, grid, marginal_cdf_d(grid, m)) <= 0.01

    def test_seam_continuity(self, qam16):
        m = InterferenceModel(0.05, 0.02, qam16, 12)
        eps = 1e-9
        for seam in (qam16.d_c / 2, qam16.d_c / math.sqrt(2)):
            lo, hi = marginal_cdf_d(np.array([seam - eps, seam + eps]), m)
            assert abs(hi - lo) <= 1e-6

    def test_monotone_in_d(self, qam16):
        m = InterferenceModel(0.1, 0.05, qam16, 12)
        grid = np.linspace(0.0, 2.5, 200)
        vals = marginal_cdf_d(grid, m)
        assert np.all(np.diff(vals) >= -1e-8)
        assert np.all((vals >= 0) & (vals <= 1))


class TestCdfDmax:
    def test_k1_reduces_to_marginal(self, qam16):
        m1 = InterferenceModel(1e-2, 1e-3, qam16, 1)
        m12 = InterferenceModel(1e-2, 1e-3, qam16, 12)
        d = 0.12
        assert cdf_dmax_iid(d, m1) == pytest.approx(marginal_cdf_d(d, m1), abs=1e-12)
        assert cdf_dmax_iid(d, m12) == pytest.approx(marginal_cdf_d(d, m12) ** 12, abs=1e-12)

    def test_strictly_decreasing_in_k(self, qam16):
        d = 0.11
        vals = [cdf_dmax_iid(d, InterferenceModel(1e-2, 1e-3, qam16, k)) for k in (1, 4, 12)]
        assert 0 < vals[2] < vals[1] < vals[0] < 1

    def test_matches_mc_three_operating_points(self, qam16):
        for p_r, s2 in [(1e-2, 1e-3), (1e-2, 1.0), (1.0, 1e-3)]:
            m = InterferenceModel(p_r, s2, qam16, 12)
            samples = mc_sample_dmax(m, None, 30000, seed=101)
            grid = comparison_grid(samples, 44)
            gap = ecdf_sup_gap(samples, grid, cdf_dmax_iid(grid, m))
            assert gap <= 0.02, (p_r, s2, gap)


class TestKnownPhase:
    def test_constant_relation_k1_equals_marginal(self, qpsk):
        pm = PhaseModel.known(lambda p: np.atleast_1d(p)[None, :])
        m = InterferenceModel(0.05, 0.01, qpsk, 1)
        for d in (0.3, 0.7, 1.1):
            a = cdf_dmax_known_phase(d, m, pm)
            b = marginal_cdf_d(d, m)
            assert a == pytest.approx(b, abs=2e-3)

    def test_zero_distance(self, qpsk):
        pm = square_law_phase_relation(5e-6, 5e6, 15e3, 40, 12)
        m = InterferenceModel(0.05, 0.01, qpsk, 12)
        assert cdf_dmax_known_phase(0.0, m, pm) == 0.0

    def test_square_law_matches_mc(self, qpsk):
        pm = square_law_phase_relation(5e-6, 5e6, 15e3, 40, 12)
        m = InterferenceModel(0.05, 0.01, qpsk, 12)
        samples = mc_sample_dmax(m, pm, 30000, seed=77)
        grid = comparison_grid(samples, 40)
        vals = cdf_dmax_known_phase(grid, m, pm)
        assert ecdf_sup_gap(samples, grid, vals) <= 0.02

    def test_requires_known_relation(self, qpsk):
        m = InterferenceModel(0.05, 0.01, qpsk, 12)
        with pytest.raises(InputError):
            cdf_dmax_known_phase(0.5, m, PhaseModel.iid())


class TestMetrics:
    def test_overestimation_k_monotone(self, qpsk):
        p1 = overestimation_prob(InterferenceModel(0.1, 0.01, qpsk, 1))
        p12 = overestimation_prob(InterferenceModel(0.1, 0.01, qpsk, 12))
        assert p1 <= p12 + 1e-12

    def test_qpsk_robustness_spot_checks(self, qpsk):
        for p_r in (1e-3, 3e-2, 1.0):
            for s2 in (1e-3, 3e-2, 1.0):
                m = InterferenceModel(p_r, s2, qpsk, 12)
                assert overestimation_prob(m) >= 0.9, (p_r, s2)

    def test_modulation_ordering_via_mc(self):
        p_r, s2 = 1e-1, 1e-2
        probs = []
        for order in (4, 16, 64):
            m = InterferenceModel(p_r, s2, build_qam(order), 12)
            samples = mc_sample_dmax(m, None, 20000, seed=5)
            probs.append(np.mean(samples >= math.sqrt(p_r + s2)))
        se = math.sqrt(0.25 / 20000) * 2
        assert probs[0] >= probs[1] - 2 * se
        assert probs[1] >= probs[2] - 2 * se

    def test_accuracy_limits(self, qam16):
        m = InterferenceModel(1e-2, 1e-3, qam16, 12)
        assert accuracy_prob(m, 200.0) == pytest.approx(1.0, abs=1e-6)
        assert accuracy_prob(m, 0.0) == 0.0

    @staticmethod
    def _accuracy_vs_k(p_r, s2, order=16, delta_db=5.0):
        vals = []
        for k in (4, 8, 12, 16):
            m = InterferenceModel(p_r, s2, build_qam(order), k)
            s = mc_sample_dmax(m, None, 40000, seed=9)
            ratio_db = 10 * np.log10(s ** 2 / m.total_power)
            vals.append(float(np.mean(np.abs(ratio_db) <= delta_db)))
        return vals

    def test_accuracy_not_monotone_in_k(self):
        # noise-limited operating point: accuracy peaks at an interior K_RB
        vals = self._accuracy_vs_k(1e-2, 1.0)
        print(f"accuracy vs K_RB in (4,8,12,16) at (1e-2, 1.0): {vals}")
        diffs = np.diff(vals)
        assert diffs.max() > 0 and diffs.min() < 0, vals

    def test_accuracy_interference_limited_favors_high_k(self):
        # interference-limited point: high K_RB maximizes accuracy
        vals = self._accuracy_vs_k(1.0, 1e-3)
        print(f"accuracy vs K_RB in (4,8,12,16) at (1.0, 1e-3): {vals}")
        assert np.argmax(vals) == 3
        assert vals[3] > 0.99

    def test_accuracy_analytic_matches_mc(self, qam16):
        m = InterferenceModel(1.0, 1e-3, qam16, 12)
        s = mc_sample_dmax(m, None, 40000, seed=9)
        ratio_db = 10 * np.log10(s ** 2 / m.total_power)
        emp = float(np.mean(np.abs(ratio_db) <= 5.0))
        assert accuracy_prob(m, 5.0) == pytest.approx(emp, abs=0.015)


class TestMcSampler:
    def test_deterministic(self, qam16):
        m = InterferenceModel(1e-2, 1e-3, qam16, 12)
        a = mc_sample_dmax(m, None, 500, seed=3)
        b = mc_sample_dmax(m, None, 500, seed=3)
        np.testing.assert_array_equal(a, b)

    def test_no_interference_low_noise_collapses(self, qam16):
        m = InterferenceModel(0.0, 1e-8, qam16, 12)
        s = mc_sample_dmax(m, None, 2000, seed=4)
        assert s.max() < 1e-3

    def test_second_moment_matches_analytic(self, qam16):
        m = InterferenceModel(1e-2, 1e-3, qam16, 12)
        s = mc_sample_dmax(m, None, 40000, seed=11)
        # E[D^2] = integral of 2 d (1 - F(d)) via the analytic CDF
        grid = np.linspace(0.0, float(s.max()) * 1.5, 400)
        F = cdf_dmax_iid(grid, m)
        analytic = np.trapezoid(2 * grid * (1 - F), grid)
        emp = float(np.mean(s ** 2))
        se = float(np.std(s ** 2) / math.sqrt(len(s)))
        assert abs(emp - analytic) <= 3 * se

    def test_bad_args(self, qam16):
        m = InterferenceModel(1e-2, 1e-3, qam16, 12)
        with pytest.raises(InputError):
            mc_sample_dmax(m, None, 0, seed=1)
        with pytest.raises(InputError):
            InterferenceModel(-0.1, 1e-3, qam16, 12)
        with pytest.raises(InputError):
            InterferenceModel(0.1, 0.0, qam16, 12)
