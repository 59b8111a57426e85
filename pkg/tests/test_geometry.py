import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gausscp import (
    InvalidInputError,
    NearPurityError,
    bkm_displacement_metric,
    bures_displacement_metric,
    c_geom,
    endpoint_bound,
    lambda_ratio,
    metric_ratio,
    squeezed_thermal_cov,
)
from gausscp.gaussian import random_symplectic

from strategies import seeds


class TestMetricRatio:
    def test_removable_limit(self):
        assert metric_ratio(1.0) == 0.25
        assert metric_ratio(1.0 + 1e-9) == pytest.approx(0.25, abs=1e-9)

    def test_inversion_symmetry(self):
        assert metric_ratio(0.37) == pytest.approx(metric_ratio(1 / 0.37), rel=1e-14)

    def test_half(self):
        # 50-digit mpmath value of (t - 1)/(2 (t + 1) ln t) at t = 1/2.
        assert metric_ratio(0.5) == pytest.approx(0.2404491734814939, rel=1e-14)
        assert metric_ratio(0.5) == pytest.approx(0.25 / (1.5 * math.log(2)), rel=1e-14)

    @given(st.floats(1e-6, 1e6))
    def test_bounded_by_quarter(self, t):
        assert 0.0 < metric_ratio(t) <= 0.25 + 1e-16

    def test_nonpositive(self):
        with pytest.raises(InvalidInputError):
            metric_ratio(0.0)


class TestLambdaRatio:
    def test_values(self):
        assert lambda_ratio(1.0) == 0.0
        assert lambda_ratio(3.0) == 0.5

    def test_monotone_to_one(self):
        lam = [lambda_ratio(nu) for nu in np.geomspace(1.0, 1e8, 200)]
        assert np.all(np.diff(lam) > 0) and lam[-1] < 1.0

    def test_sub_vacuum(self):
        with pytest.raises(InvalidInputError):
            lambda_ratio(0.99)


class TestCGeom:
    def test_nu_three(self):
        assert c_geom(3.0) == pytest.approx(1 / (6 * math.log(2)), rel=1e-14)
        assert c_geom(3.0) == pytest.approx(metric_ratio(0.5), rel=1e-14)

    def test_large_nu(self):
        assert abs(c_geom(1e3) - 0.25) < 1e-6
        assert c_geom(1e9) == pytest.approx(0.25, abs=1e-15)

    def test_near_purity(self):
        assert 0.0 < c_geom(1 + 1e-6) < 0.1

    def test_purity_raises(self):
        with pytest.raises(NearPurityError):
            c_geom(1.0)

    @given(st.floats(1.0 + 1e-9, 1e7))
    def test_chain(self, nu):
        c = c_geom(nu)
        assert 0.0 < c <= 0.25
        assert c == pytest.approx(metric_ratio(lambda_ratio(nu)), rel=1e-9, abs=1e-12)

    def test_monotone(self):
        c = [c_geom(nu) for nu in np.geomspace(1.001, 1e4, 300)]
        assert np.all(np.diff(c) > 0)


class TestDisplacementMetrics:
    def test_thermal_bkm(self):
        assert np.allclose(bkm_displacement_metric(3 * np.eye(2)), math.log(2) * np.eye(2), rtol=1e-14)

    def test_squeezed_bkm(self):
        j = bkm_displacement_metric(squeezed_thermal_cov((1.2, 0.6)))
        expected = math.log(2.2 / 0.2) * np.diag([math.exp(-1.2), math.exp(1.2)])
        assert np.allclose(j, expected, rtol=1e-13)

    @pytest.mark.parametrize("nu", [1.5, 2.0, 3.0, 4.0])
    def test_ratio_is_c_geom(self, nu):
        g = nu * np.eye(2)
        ratio = bures_displacement_metric(g) @ np.linalg.inv(bkm_displacement_metric(g))
        assert np.allclose(ratio, c_geom(nu) * np.eye(2), rtol=1e-13)

    @given(seeds, st.floats(1.05, 4.0), st.sampled_from([1, 2]))
    def test_symplectic_covariance(self, seed, nu, n):
        rng = np.random.default_rng(seed)
        s = random_symplectic(rng, n)
        nus = nu * np.linspace(1.0, 1.5, n)
        g = np.diag(np.repeat(nus, 2))
        s_inv = np.linalg.inv(s)
        lhs = bkm_displacement_metric(s @ g @ s.T)
        rhs = s_inv.T @ bkm_displacement_metric(g) @ s_inv
        assert np.allclose(lhs, rhs, rtol=1e-8, atol=1e-9)

    def test_two_mode_block_diagonal(self):
        g = np.diag([2.0, 2.0, 3.0, 3.0])
        j = bkm_displacement_metric(g)
        expected = np.diag(np.repeat([math.log(3.0), math.log(2.0)], 2))
        assert np.allclose(j, expected, atol=1e-12)

    def test_pure_raises(self):
        with pytest.raises(NearPurityError):
            bkm_displacement_metric(np.eye(2))


class TestEndpointBound:
    def test_one(self):
        assert endpoint_bound(1.0) == (0.0, 0.0)

    def test_strict(self):
        log_side, angle_side = endpoint_bound(0.9)
        assert log_side == pytest.approx(-2 * math.log(0.9))
        assert angle_side == pytest.approx(2 * math.acos(math.sqrt(0.9)) ** 2)
        assert log_side > angle_side

    def test_zero(self):
        log_side, angle_side = endpoint_bound(0.0)
        assert log_side == math.inf and angle_side == pytest.approx(math.pi**2 / 2)

    @given(st.floats(1e-6, 1.0))
    def test_dominance(self, f):
        log_side, angle_side = endpoint_bound(f)
        assert log_side >= angle_side - 1e-15

    def test_out_of_range(self):
        with pytest.raises(InvalidInputError):
            endpoint_bound(1.5)
