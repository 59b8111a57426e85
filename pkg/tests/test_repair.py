import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gausscp import (
    FastPathError,
    InvalidInputError,
    attenuator,
    bayes_cp_matrix,
    bayes_reverse_generator,
    bkm_displacement_metric,
    brute_force_repair_oracle,
    cp_matrix,
    generator_cp_matrix,
    isotropic_repair_closed_form,
    minimal_repair,
    squeezed_thermal_cov,
    symplectic_form,
)
from gausscp.linalg import hermitian_eigvalsh

from strategies import random_hermitian, random_pd, seeds

ISIG = 1j * symplectic_form(1)
M_BAYES = bayes_cp_matrix(1.0, (1.2, 0.6)).M
LAM_MIN = 4 * (1 - math.cosh(1.2) / 1.2)


def assert_feasible(m, res, tol=1e-10):
    assert hermitian_eigvalsh(res.delta_d)[0] >= -tol
    assert hermitian_eigvalsh(m + res.delta_d)[0] >= -tol


def random_bayes_problem(rng):
    nu = rng.uniform(1.0, 3.0)
    r = rng.uniform(0.0, 1.2)
    m = bayes_cp_matrix(rng.uniform(0.2, 2.0), (nu, r)).M
    return m, random_pd(rng, 2)


class TestExamples:
    def test_forward_attenuator_needs_nothing(self):
        m = 2 * (np.eye(2) - ISIG)
        res = minimal_repair(m, np.diag([3.0, 0.5]))
        assert res.cost == 0.0 and np.array_equal(res.delta_d, np.zeros((2, 2)))

    def test_bayes_identity_weight(self):
        res = minimal_repair(M_BAYES, np.eye(2))
        assert np.allclose(res.delta_d, -LAM_MIN * np.eye(2), atol=1e-9)
        assert res.cost == pytest.approx(-2 * LAM_MIN, abs=1e-9)
        assert res.cost == pytest.approx(4.0710, abs=1e-4)

    @pytest.mark.parametrize("method", ["exact", "barrier"])
    def test_decoupled_real(self, method):
        res = minimal_repair(np.diag([-1.0, 3.0]), np.eye(2), method=method)
        assert np.allclose(res.delta_d, np.diag([1.0, 0.0]), atol=1e-7)
        assert res.cost == pytest.approx(1.0, abs=1e-7)

    def test_unknown_method(self):
        with pytest.raises(InvalidInputError):
            minimal_repair(M_BAYES, np.eye(2), method="simplex")

    def test_exact_needs_one_mode(self):
        with pytest.raises(InvalidInputError):
            minimal_repair(-np.eye(4), np.eye(4), method="exact")

    @pytest.mark.parametrize(
        "w", [np.diag([1.0, -1.0]), np.diag([1.0, 1e-10]), np.array([[1.0, 0.5], [0.0, 1.0]])]
    )
    def test_bad_weight(self, w):
        with pytest.raises(InvalidInputError):
            minimal_repair(M_BAYES, w)

    def test_non_hermitian(self):
        with pytest.raises(InvalidInputError):
            minimal_repair(np.array([[1.0, 1.0], [0.0, 1.0]]), np.eye(2))


class TestClosedForm:
    def test_already_cp(self):
        assert isotropic_repair_closed_form(2 * np.eye(2)).cost == 0.0

    def test_bayes(self):
        b = 4 * math.cosh(1.2) / 1.2 - 2
        res = isotropic_repair_closed_form(2 * np.eye(2) + b * ISIG)
        assert np.allclose(res.delta_d, (b - 2) * np.eye(2), rtol=1e-14)
        assert b - 2 == pytest.approx(-LAM_MIN, rel=1e-13)

    def test_boundary(self):
        assert isotropic_repair_closed_form(np.eye(2) + ISIG).cost == 0.0

    def test_structural_mismatch(self):
        with pytest.raises(FastPathError):
            isotropic_repair_closed_form(np.diag([1.0, 2.0]))
        with pytest.raises(FastPathError):
            isotropic_repair_closed_form(M_BAYES, np.diag([2.0, 1.0]))
        with pytest.raises(FastPathError):
            isotropic_repair_closed_form(np.eye(4))

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 5.0))
    def test_solver_agrees_with_closed_form(self, a, b, w):
        m = a * np.eye(2) + b * ISIG
        closed = isotropic_repair_closed_form(m, w * np.eye(2))
        res = minimal_repair(m, w * np.eye(2))
        assert res.cost == pytest.approx(closed.cost, abs=1e-7)

    @given(seeds)
    def test_phase_covariant_cost(self, seed):
        rng = np.random.default_rng(seed)
        g, nu, r, w = rng.uniform(0.1, 2), rng.uniform(1, 4), rng.uniform(0, 1.5), rng.uniform(0.1, 5)
        cp = bayes_cp_matrix(g, (nu, r))
        res = minimal_repair(cp.M, w * np.eye(2))
        assert res.cost == pytest.approx(2 * max(0.0, -cp.lambda_min) * w, abs=1e-7)


class TestInvariants:
    @given(seeds, st.sampled_from([2, 4]))
    def test_zero_cost_iff_cp(self, seed, dim):
        rng = np.random.default_rng(seed)
        m = random_hermitian(rng, dim) + rng.uniform(-1, 4) * np.eye(dim)
        res = minimal_repair(m, random_pd(rng, dim))
        cp = hermitian_eigvalsh(m)[0] >= -1e-10
        assert (res.cost == 0.0) == cp

    @given(seeds, st.sampled_from([2, 4]))
    def test_always_feasible(self, seed, dim):
        rng = np.random.default_rng(seed)
        m = random_hermitian(rng, dim)
        res = minimal_repair(m, random_pd(rng, dim))
        assert_feasible(m, res)

    @given(seeds, st.floats(0.01, 100.0))
    def test_weight_scaling(self, seed, c):
        rng = np.random.default_rng(seed)
        m, w = random_bayes_problem(rng)
        base = minimal_repair(m, w)
        scaled = minimal_repair(m, c * w)
        assert np.allclose(scaled.delta_d, base.delta_d, atol=1e-8 * (1 + np.abs(base.delta_d).max()))
        assert scaled.cost == pytest.approx(c * base.cost, rel=1e-8, abs=1e-12)

    @given(seeds)
    def test_exact_matches_barrier(self, seed):
        rng = np.random.default_rng(seed)
        m, w = random_bayes_problem(rng)
        exact = minimal_repair(m, w, method="exact")
        barrier = minimal_repair(m, w, method="barrier")
        assert exact.optimality_gap <= 1e-9 * max(1.0, exact.cost)
        assert exact.cost <= barrier.cost + 1e-12
        assert barrier.cost - exact.cost <= barrier.optimality_gap + 1e-9

    def test_two_mode_barrier_certificate(self, rng):
        for _ in range(20):
            m = random_hermitian(rng, 4)
            res = minimal_repair(m, random_pd(rng, 4))
            assert res.optimality_gap <= 1e-9 * (1.0 + res.cost)
            assert_feasible(m, res)

    def test_two_mode_product_is_additive(self):
        # Block-diagonal problem: the optimum is the sum of the one-mode optima.
        m1, m2 = M_BAYES, bayes_cp_matrix(1.0, (1.5, 0.8)).M
        w1, w2 = np.diag([2.0, 1.0]), np.diag([0.7, 1.3])
        z = np.zeros((2, 2))
        m = np.block([[m1, z], [z, m2]])
        w = np.block([[w1, z], [z, w2]])
        two = minimal_repair(m, w)
        one = minimal_repair(m1, w1).cost + minimal_repair(m2, w2).cost
        assert two.cost == pytest.approx(one, rel=1e-8)


class TestOracle:
    def test_cp_input(self):
        assert brute_force_repair_oracle(2 * (np.eye(2) - ISIG), np.eye(2)).cost == 0.0

    def test_bayes_identity_weight(self):
        oracle = brute_force_repair_oracle(M_BAYES, np.eye(2))
        closed = isotropic_repair_closed_form(M_BAYES)
        assert oracle.cost == pytest.approx(closed.cost, abs=2e-5)

    def test_anisotropic_weight_tilts(self):
        oracle = brute_force_repair_oracle(M_BAYES, np.diag([2.0, 1.0]))
        iso_cost = float(np.trace(isotropic_repair_closed_form(M_BAYES).delta_d @ np.diag([2.0, 1.0])))
        assert oracle.cost <= iso_cost
        assert oracle.cost < iso_cost - 1e-2

    @pytest.mark.parametrize("seed", range(8))
    def test_agrees_with_solver(self, seed):
        m, w = random_bayes_problem(np.random.default_rng(seed))
        oracle = brute_force_repair_oracle(m, w)
        res = minimal_repair(m, w)
        assert abs(oracle.cost - res.cost) <= max(1e-4, 2 * oracle.optimality_gap)
        assert oracle.cost >= res.cost - 1e-12
        assert_feasible(m, oracle)

    def test_rejects_two_mode(self):
        with pytest.raises(InvalidInputError):
            brute_force_repair_oracle(np.eye(4), np.eye(4))


def test_bkm_weighted_bayes_repair_is_rank_one():
    # At the reference itself the BKM weight makes the repair a single direction.
    tau = squeezed_thermal_cov((1.2, 0.6))
    m = generator_cp_matrix(bayes_reverse_generator(attenuator(1.0), tau)).M
    res = minimal_repair(m, bkm_displacement_metric(tau))
    ev = np.linalg.eigvalsh(res.delta_d)
    assert ev[0] == pytest.approx(0.0, abs=1e-10) and ev[1] > 0
    assert hermitian_eigvalsh(m + res.delta_d)[0] == pytest.approx(0.0, abs=1e-10)


def test_cp_matrix_matches_generator_route():
    g = bayes_reverse_generator(attenuator(0.4), squeezed_thermal_cov((1.3, 0.2)))
    assert np.allclose(cp_matrix(g.K, g.D), generator_cp_matrix(g).M)
