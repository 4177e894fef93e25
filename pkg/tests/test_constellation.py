"""Constellation geometry: point sets, nearest neighbor, decision regions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coexlink.constellation import (build_qam, decision_region, nearest_distances,
                                    nearest_lattice, nearest_neighbor, region_index_of)
from coexlink.errors import ConfigurationError, InputError

S10 = math.sqrt(10.0)


@pytest.fixture(scope="module")
def qam16():
    return build_qam(16)


@pytest.fixture(scope="module")
def qpsk():
    return build_qam(4)


def brute_force_min_distance(points):
    d = np.abs(points[:, None] - points[None, :])
    return d[d > 0].min()


class TestBuildQam:
    def test_unsupported_order(self):
        for bad in (2, 8, 32, 256, 0):
            with pytest.raises(ConfigurationError):
                build_qam(bad)

    @pytest.mark.parametrize("order", [4, 16, 64])
    def test_unit_average_power(self, order):
        c = build_qam(order)
        assert abs(np.mean(np.abs(c.points) ** 2) - 1.0) < 1e-12

    @pytest.mark.parametrize("order", [4, 16, 64])
    def test_min_distance_matches_brute_force(self, order):
        c = build_qam(order)
        assert c.d_c == pytest.approx(brute_force_min_distance(c.points), abs=1e-15)

    def test_16qam_first_quadrant_points(self, qam16):
        expected = {(1 + 1j) / S10, (1 + 3j) / S10, (3 + 1j) / S10, (3 + 3j) / S10}
        got = {p for p in qam16.points if p.real > 0 and p.imag > 0}
        for e in expected:
            assert any(abs(g - e) < 1e-12 for g in got)

    def test_16qam_min_distance_value(self, qam16):
        assert qam16.d_c == pytest.approx(2.0 / S10, abs=1e-12)

    def test_qpsk_interior_empty(self, qpsk):
        assert qpsk.interior_set == frozenset()

    @pytest.mark.parametrize("order", [4, 16, 64])
    def test_boundary_interior_partition(self, order):
        c = build_qam(order)
        assert c.boundary_set | c.interior_set == frozenset(range(order))
        assert c.boundary_set & c.interior_set == frozenset()

    def test_d_c_ordering_across_orders(self):
        assert build_qam(4).d_c > build_qam(16).d_c > build_qam(64).d_c

    def test_row_major_ordering(self, qam16):
        # most negative first, imag rows ascending, real within row
        assert qam16.points[0] == pytest.approx((-3 - 3j) / S10)
        assert qam16.points[3] == pytest.approx((3 - 3j) / S10)
        assert qam16.points[15] == pytest.approx((3 + 3j) / S10)


class TestNearestNeighbor:
    def test_exact_point(self, qam16):
        idx, dist = nearest_neighbor((1 + 1j) / S10, qam16)
        assert dist == 0.0
        assert qam16.points[idx] == pytest.approx((1 + 1j) / S10)

    def test_origin_four_way_tie(self, qam16):
        # brute force: four inner points equidistant; lowest index wins
        d = np.abs(0 - qam16.points)
        ties = np.flatnonzero(np.isclose(d, d.min()))
        assert len(ties) == 4
        idx, dist = nearest_neighbor(0j, qam16)
        assert idx == ties.min() == 5
        assert dist == pytest.approx(math.sqrt(0.2), abs=1e-12)

    def test_qpsk_example(self, qpsk):
        y = 0.9 + 0.1j
        d = np.abs(y - qpsk.points)
        j = int(np.argmin(d))
        idx, dist = nearest_neighbor(y, qpsk)
        assert idx == j
        assert qpsk.points[idx] == pytest.approx((1 + 1j) / math.sqrt(2))
        assert dist == pytest.approx(d[j], abs=1e-12)
        assert dist == pytest.approx(0.6370, abs=5e-4)

    def test_nonfinite_rejected(self, qam16):
        with pytest.raises(InputError):
            nearest_neighbor(complex(float("nan"), 0.0), qam16)
        with pytest.raises(InputError):
            nearest_neighbor(complex(float("inf"), 1.0), qam16)

    @pytest.mark.parametrize("order", [4, 16, 64])
    def test_lattice_path_matches_brute_force(self, order):
        c = build_qam(order)
        rng = np.random.default_rng(7)
        y = rng.normal(size=4000) * 1.5 + 1j * rng.normal(size=4000) * 1.5
        idx, dist = nearest_lattice(y, c)
        ref = nearest_distances(y, c)
        np.testing.assert_allclose(dist, ref, atol=1e-12)
        np.testing.assert_allclose(np.abs(y - c.points[idx]), ref, atol=1e-12)


class TestDecisionRegions:
    def test_16qam_inner_point_offsets(self, qam16):
        idx, _ = nearest_neighbor((1 + 1j) / S10, qam16)
        r = decision_region(idx, qam16)
        assert (r.d_lr, r.d_ur, r.d_li, r.d_ui) == pytest.approx(
            (-1 / S10, 1 / S10, -1 / S10, 1 / S10))

    def test_16qam_corner_point_offsets(self, qam16):
        idx, _ = nearest_neighbor((3 + 3j) / S10, qam16)
        r = decision_region(idx, qam16)
        assert r.d_ur == math.inf and r.d_ui == math.inf
        assert r.d_lr == pytest.approx(-1 / S10)
        assert r.d_li == pytest.approx(-1 / S10)

    def test_16qam_edge_point_offsets(self, qam16):
        idx, _ = nearest_neighbor((1 + 3j) / S10, qam16)
        r = decision_region(idx, qam16)
        assert r.d_ui == math.inf
        assert (r.d_lr, r.d_ur, r.d_li) == pytest.approx((-1 / S10, 1 / S10, -1 / S10))

    def test_qpsk_two_finite_offsets(self, qpsk):
        for i in range(4):
            r = decision_region(i, qpsk)
            finite = [v for v in (r.d_lr, r.d_ur, r.d_li, r.d_ui) if math.isfinite(v)]
            assert len(finite) == 2

    def test_point_interior_to_own_region(self):
        for order in (4, 16, 64):
            c = build_qam(order)
            for r in c.regions:
                assert r.d_lr < 0 < r.d_ur
                assert r.d_li < 0 < r.d_ui

    @given(st.floats(-2, 2), st.floats(-2, 2))
    @settings(max_examples=200, deadline=None)
    def test_partition_matches_nearest_neighbor(self, re, im):
        c = build_qam(16)
        y = complex(re, im)
        idx, _ = nearest_neighbor(y, c)
        assert region_index_of(y, c) == idx

    def test_partition_on_boundary_ties(self, qam16):
        # midpoint between two points: both rules pick the lower index
        y = (qam16.points[5] + qam16.points[6]) / 2
        idx, _ = nearest_neighbor(y, qam16)
        assert idx == 5
        assert region_index_of(y, qam16) == 5

    def test_interior_distance_bound_attained_at_corner(self, qam16):
        # region corner of an interior point is at distance d_c/sqrt(2)
        interior = sorted(qam16.interior_set)[0]
        p = qam16.points[interior]
        corner = p + (qam16.d_c / 2) * (1 + 1j)
        _, dist = nearest_neighbor(corner, qam16)
        assert dist <= qam16.d_c / math.sqrt(2) + 1e-12
        assert dist == pytest.approx(qam16.d_c / math.sqrt(2), abs=1e-12)

    @given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
    @settings(max_examples=100, deadline=None)
    def test_interior_nearest_distance_bound(self, re, im):
        c = build_qam(16)
        idx, dist = nearest_neighbor(complex(re, im), c)
        if idx in c.interior_set:
            assert dist <= c.d_c / math.sqrt(2) + 1e-12
