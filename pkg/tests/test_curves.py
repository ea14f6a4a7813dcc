"""Entropy and information curves: exact values, shape laws, estimators."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import unmasking as um

from .conftest import product_pmf, random_pmf


@st.composite
def small_pmfs(draw):
    n = draw(st.integers(min_value=1, max_value=5))
    q = draw(st.integers(min_value=2, max_value=3))
    seed = draw(st.integers(min_value=0, max_value=2**31))
    alpha = draw(st.sampled_from([0.3, 1.0, 3.0]))
    return random_pmf(n, q, seed, alpha)


class TestCurveContainers:
    def test_entropy_curve_requires_zero_start(self):
        with pytest.raises(um.HanViolation):
            um.EntropyCurve(np.array([0.5, 1.0]))

    def test_shape_violation_detects_nonmonotone(self):
        bad = um.EntropyCurve(np.array([0.0, 1.0, 0.5]))
        assert bad.shape_violation() is not None
        good = um.EntropyCurve(np.array([0.0, 1.0, 1.5]))
        assert good.shape_violation() is None

    def test_shape_violation_detects_convex_increments(self):
        bad = um.EntropyCurve(np.array([0.0, 0.5, 1.5]))
        assert "increment" in bad.shape_violation()

    def test_info_curve_rejects_decreasing(self):
        with pytest.raises(um.HanViolation):
            um.InfoCurve(np.array([0.0, 1.0, 0.5]))

    def test_info_curve_rejects_nonzero_start(self):
        with pytest.raises(um.HanViolation):
            um.InfoCurve(np.array([0.5, 1.0]))

    def test_info_transform_clamps_float_dust(self):
        H = um.EntropyCurve(np.array([0.0, 0.5, 1.0 + 1e-13]))
        Z = um.info_curve_from_entropy(H)
        assert Z.values[1] == 0.0

    def test_info_transform_rejects_real_violations(self):
        H = um.EntropyCurve(np.array([0.0, 1.0, 1.0, 3.0]))
        with pytest.raises(um.HanViolation):
            um.info_curve_from_entropy(H)

    def test_correlation_summary_rejects_negative(self):
        with pytest.raises(um.HanViolation):
            um.CorrelationSummary(tc=-1.0, dtc=0.5, z_n=0.5)


class TestExactCurves:
    def test_product_curve_is_linear(self):
        p = product_pmf([[0.75, 0.25], [0.5, 0.5], [0.9, 0.1]])
        H = um.entropy_curve_exact(p)
        per_site = [
            um.entropy_bits(np.array(r)) for r in ([0.75, 0.25], [0.5, 0.5], [0.9, 0.1])
        ]
        assert H.values[1] == pytest.approx(sum(per_site) / 3)
        assert H.values[3] == pytest.approx(sum(per_site))
        Z = um.info_curve_from_entropy(H)
        assert Z.values == pytest.approx(np.zeros(3), abs=1e-12)

    def test_correlated_pair_curve(self):
        p = um.JointPMF(2, 2, np.array([0.5, 0.0, 0.0, 0.5]))
        Z = um.info_curve_exact(p)
        assert Z.values == pytest.approx(np.array([0.0, 1.0]))

    def test_endpoints_match_direct_quantities(self):
        p = random_pmf(4, 2, seed=5)
        H = um.entropy_curve_exact(p)
        assert H.values[p.n] == pytest.approx(um.entropy_bits(p))
        singles = [um.entropy_bits(um.marginalize(p, (i,))) for i in range(p.n)]
        assert H.values[1] == pytest.approx(float(np.mean(singles)))

    @given(small_pmfs())
    @settings(max_examples=25, deadline=None)
    def test_memoized_curve_agrees(self, p):
        a = um.entropy_curve_exact(p).values
        b = um.entropy_curve_exact(p, memoize=True).values
        assert a == pytest.approx(b, abs=1e-12)

    @given(small_pmfs())
    @settings(max_examples=25, deadline=None)
    def test_han_shape_laws(self, p):
        H = um.entropy_curve_exact(p)
        assert H.shape_violation(tol=1e-9) is None
        Z = um.info_curve_from_entropy(H)
        assert np.all(np.diff(Z.values) >= -1e-9)
        assert Z.values[0] == pytest.approx(0.0, abs=1e-9)

    def test_large_n_guard(self):
        with pytest.raises(um.InfeasibleEnumeration):
            um.entropy_curve_exact(um.uniform_dist(2, 21))


class TestTcDtc:
    @given(small_pmfs())
    @settings(max_examples=25, deadline=None)
    def test_direct_matches_curve(self, p):
        Z = um.info_curve_exact(p)
        summ = um.tc_dtc_from_curve(Z)
        assert um.tc_direct(p) == pytest.approx(summ.tc, abs=1e-8)
        assert um.dtc_direct(p) == pytest.approx(summ.dtc, abs=1e-8)

    def test_tc_is_kl_to_product(self):
        p = random_pmf(3, 2, seed=21)
        rows = [um.marginalize(p, (i,)).probs for i in range(p.n)]
        prod = product_pmf([list(r) for r in rows])
        assert um.tc_direct(p) == pytest.approx(um.kl_bits(p, prod), abs=1e-10)

    def test_single_coordinate_has_no_correlation(self):
        p = um.JointPMF(1, 3, np.array([0.2, 0.3, 0.5]))
        assert um.tc_direct(p) == 0.0
        assert um.dtc_direct(p) == 0.0

    def test_summary_from_simple_curve(self):
        summ = um.tc_dtc_from_curve(um.InfoCurve(np.array([0.0, 1.0])))
        assert summ.tc == pytest.approx(1.0)
        assert summ.dtc == pytest.approx(1.0)
        assert summ.z_n == pytest.approx(1.0)


class TestMonteCarlo:
    def test_exhaustive_dedup_matches_exact(self):
        p = random_pmf(4, 2, seed=3)
        exact = um.entropy_curve_exact(p)
        mc = um.entropy_curve_mc(p, samples_per_level=10**6, seed=0, dedup=True)
        assert mc.values == pytest.approx(exact.values, abs=1e-12)
        assert mc.method == "monte_carlo"
        assert np.all(mc.stderr == 0.0)

    def test_estimates_within_stderr_band(self):
        p = random_pmf(6, 2, seed=9)
        exact = um.entropy_curve_exact(p)
        mc = um.entropy_curve_mc(p, samples_per_level=40, seed=4)
        gap = np.abs(mc.values - exact.values)
        assert np.all(gap <= 6.0 * mc.stderr + 1e-9)

    def test_endpoint_levels_are_exact(self):
        p = random_pmf(5, 2, seed=2)
        mc = um.entropy_curve_mc(p, samples_per_level=3, seed=1)
        exact = um.entropy_curve_exact(p)
        assert mc.values[0] == 0.0
        assert mc.values[p.n] == pytest.approx(exact.values[p.n], abs=1e-12)
        assert mc.stderr[0] == 0.0 and mc.stderr[p.n] == 0.0

    def test_seed_determinism(self):
        p = random_pmf(5, 2, seed=8)
        a = um.entropy_curve_mc(p, samples_per_level=7, seed=42)
        b = um.entropy_curve_mc(p, samples_per_level=7, seed=42)
        assert np.array_equal(a.values, b.values)

    def test_stderr_propagates_to_info_curve(self):
        p = random_pmf(4, 2, seed=6)
        mc = um.entropy_curve_mc(p, samples_per_level=5, seed=0)
        Z = um.info_curve_from_entropy(mc)
        j = 3
        want = math.sqrt(mc.stderr[1] ** 2 + mc.stderr[j - 1] ** 2 + mc.stderr[j] ** 2)
        assert Z.stderr[j - 1] == pytest.approx(want)
