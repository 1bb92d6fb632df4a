"""Unit tests for the statistics and conjugate-gradient primitives."""

import math

import numpy as np
import pytest

from dcgnet import core
from dcgnet.core import (
    CgParams,
    DegenerateDirectionError,
    NormalEquationsError,
    RegressionSample,
    SecondOrderState,
    beta_fletcher_reeves,
    beta_polak_ribiere,
    ccg_inner_solve,
    direction_update,
    mcg_gradient_update,
    residual_gradient,
    solve_normal_equations,
    step_size_alpha,
    update_statistics,
)


def random_vector(rng, m):
    return rng.standard_normal(m) + 1j * rng.standard_normal(m)


def random_pd(rng, m, load=1.0):
    G = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return G @ G.conj().T + load * np.eye(m)


def fsum_vdot(a, b):
    """Extended-precision a^H b via compensated summation of parts."""
    terms = [np.conj(ai) * bi for ai, bi in zip(a, b)]
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


class TestUpdateStatistics:
    def test_forgetting_and_rank_one(self):
        state = SecondOrderState(R=np.eye(2, dtype=complex), b=np.zeros(2, dtype=complex), lambda_f=0.25)
        out = update_statistics(state, RegressionSample(np.array([1.0, 0.0]), 0.0))
        assert np.allclose(out.R, [[1.25, 0.0], [0.0, 0.25]])
        assert np.allclose(out.b, [0.0, 0.0])

    def test_single_sample_outer_product(self):
        state = SecondOrderState(R=np.zeros((2, 2), dtype=complex), b=np.zeros(2, dtype=complex), lambda_f=1.0)
        out = update_statistics(state, RegressionSample(np.array([1.0, 1.0j]), 1.0))
        assert np.allclose(out.R, [[1.0, -1.0j], [1.0j, 1.0]])
        assert np.allclose(out.b, [1.0, 1.0j])

    def test_unweighted_sum_matches_accumulation_oracle(self):
        rng = np.random.default_rng(11)
        m = 4
        state = SecondOrderState(R=np.zeros((m, m), dtype=complex), b=np.zeros(m, dtype=complex), lambda_f=1.0)
        acc_R = np.zeros((m, m), dtype=complex)
        acc_b = np.zeros(m, dtype=complex)
        for _ in range(50):
            x = random_vector(rng, m)
            d = complex(rng.standard_normal() + 1j * rng.standard_normal())
            state = update_statistics(state, RegressionSample(x, d))
            # independent accumulation oracle
            for i in range(m):
                acc_b[i] += np.conj(d) * x[i]
                for j in range(m):
                    acc_R[i, j] += x[i] * np.conj(x[j])
        assert np.max(np.abs(state.R - acc_R)) < 1e-10
        assert np.max(np.abs(state.b - acc_b)) < 1e-10

    def test_dimension_mismatch_rejected(self):
        state = SecondOrderState.initial(3, 0.5, 1e-2)
        with pytest.raises(ValueError, match="mismatch"):
            update_statistics(state, RegressionSample(np.ones(4), 0.0))

    def test_hermitian_preserved_over_stream(self):
        rng = np.random.default_rng(5)
        state = SecondOrderState.initial(6, 0.7, 1e-2)
        for _ in range(200):
            state = update_statistics(state, RegressionSample(random_vector(rng, 6), 1.0))
            assert np.max(np.abs(state.R - state.R.conj().T)) < 1e-12

    def test_positive_semidefinite_probes(self):
        rng = np.random.default_rng(6)
        state = SecondOrderState.initial(5, 0.3, 1e-2)
        for _ in range(100):
            state = update_statistics(state, RegressionSample(random_vector(rng, 5), 0.5))
        for _ in range(100):
            v = random_vector(rng, 5)
            assert np.real(np.vdot(v, state.R @ v)) >= -1e-10


class TestResidualGradient:
    def test_exact_solution_gives_zero(self):
        g = residual_gradient(np.eye(2), [1.0, 2.0], [1.0, 2.0])
        assert np.allclose(g, 0.0)

    def test_zero_start_returns_b(self):
        g = residual_gradient(np.eye(2), [1.0, 2.0], [0.0, 0.0])
        assert np.allclose(g, [1.0, 2.0])

    def test_matches_triple_loop_oracle(self):
        rng = np.random.default_rng(3)
        m = 4
        R = random_pd(rng, m)
        b = random_vector(rng, m)
        w = random_vector(rng, m)
        got = residual_gradient(R, b, w)
        want = np.array([b[i] - sum(R[i, j] * w[j] for j in range(m)) for i in range(m)])
        assert np.max(np.abs(got - want)) < 1e-12


class TestStepSizeAlpha:
    def test_hand_value(self):
        assert step_size_alpha([1.0, 0.0], [2.0, 0.0], np.eye(2), 0.15) == pytest.approx(0.3)

    def test_identity_rayleigh_quotient(self):
        rng = np.random.default_rng(4)
        p = random_vector(rng, 5)
        assert step_size_alpha(p, p, np.eye(5), 1.0) == pytest.approx(1.0)

    def test_matches_extended_precision_oracle(self):
        rng = np.random.default_rng(9)
        m = 5
        R = random_pd(rng, m)
        p = random_vector(rng, m)
        g = random_vector(rng, m)
        eta = 0.4
        got = step_size_alpha(p, g, R, eta)
        Rp = np.array([fsum_vdot(np.conj(R[i]), p) for i in range(m)])
        want = eta * fsum_vdot(p, g) / fsum_vdot(p, Rp)
        assert abs(got - want) < 1e-10

    def test_degenerate_direction_raises(self):
        with pytest.raises(DegenerateDirectionError):
            step_size_alpha(np.zeros(3), np.ones(3), np.eye(3), 1.0)


class TestBetas:
    def test_fletcher_reeves_ratio(self):
        g_prev = np.array([2.0, 0.0])  # squared norm 4
        g_new = np.array([1.0, 0.0])
        assert beta_fletcher_reeves(g_new, g_prev) == pytest.approx(0.25)

    def test_fletcher_reeves_zero_numerator(self):
        assert beta_fletcher_reeves(np.zeros(3), np.ones(3)) == 0.0

    def test_fletcher_reeves_scalar_oracle(self):
        rng = np.random.default_rng(12)
        g_new, g_prev = random_vector(rng, 6), random_vector(rng, 6)
        want = sum(abs(v) ** 2 for v in g_new) / sum(abs(v) ** 2 for v in g_prev)
        assert beta_fletcher_reeves(g_new, g_prev) == pytest.approx(want, abs=1e-12)

    def test_fletcher_reeves_nonnegative(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            m = rng.integers(1, 8)
            beta = beta_fletcher_reeves(random_vector(rng, m), random_vector(rng, m))
            assert beta >= 0.0

    def test_polak_ribiere_hand_value(self):
        assert beta_polak_ribiere([0.0, 1.0], [1.0, 0.0]) == pytest.approx(1.0)

    def test_polak_ribiere_equal_gradients(self):
        g = np.array([1.0 + 1.0j, 2.0])
        assert beta_polak_ribiere(g, g) == pytest.approx(0.0)

    def test_polak_ribiere_scalar_oracle(self):
        rng = np.random.default_rng(14)
        g_new, g_prev = random_vector(rng, 5), random_vector(rng, 5)
        want = fsum_vdot(g_new - g_prev, g_new) / fsum_vdot(g_prev, g_prev).real
        assert abs(beta_polak_ribiere(g_new, g_prev) - want) < 1e-12

    def test_vanished_previous_gradient(self):
        with pytest.raises(DegenerateDirectionError):
            beta_fletcher_reeves(np.ones(2), np.zeros(2))
        with pytest.raises(DegenerateDirectionError):
            beta_polak_ribiere(np.ones(2), np.zeros(2))


class TestDirectionUpdate:
    def test_first_direction(self):
        g = np.array([1.0, 2.0j])
        assert np.array_equal(direction_update(g, 0.0, np.zeros(2)), g)

    def test_hand_value(self):
        assert np.allclose(direction_update([1.0, 0.0], 2.0, [0.0, 1.0]), [1.0, 2.0])

    def test_data_reuse_term(self):
        # x=[1,0], d=1, psi_prev=0: term reduces to x*d
        x = np.array([1.0, 0.0])
        term = x * (np.conj(1.0) - np.vdot(x, np.zeros(2)))
        out = direction_update(np.zeros(2), 0.0, np.zeros(2), term)
        assert np.allclose(out, [1.0, 0.0])


class TestMcgGradientUpdate:
    def test_fixed_point_real_data(self):
        # alpha=0, lambda_f=1 and a consistent desired sample leave g unchanged
        rng = np.random.default_rng(15)
        x = rng.standard_normal(4)  # real data: conj(d) == d
        psi = rng.standard_normal(4)
        d = complex(np.vdot(x, psi))
        g_prev = random_vector(rng, 4)
        out = mcg_gradient_update(g_prev, 0.0, np.eye(4), np.zeros(4), RegressionSample(x, d), psi, 1.0)
        assert np.max(np.abs(out - g_prev)) < 1e-12

    def test_direction_term_only(self):
        out = mcg_gradient_update(
            np.zeros(2), 1.0, np.eye(2), np.array([1.0, 0.0]),
            RegressionSample(np.zeros(2), 0.0), np.zeros(2), 0.5,
        )
        assert np.allclose(out, [-1.0, 0.0])

    def test_matches_term_oracle(self):
        rng = np.random.default_rng(16)
        m = 4
        R = random_pd(rng, m)
        g_prev, p, x, psi = (random_vector(rng, m) for _ in range(4))
        d = complex(rng.standard_normal() + 1j * rng.standard_normal())
        alpha = 0.3 + 0.1j
        lam = 0.6
        got = mcg_gradient_update(g_prev, alpha, R, p, RegressionSample(x, d), psi, lam)
        Rp = np.array([sum(R[i, j] * p[j] for j in range(m)) for i in range(m)])
        err = np.conj(d) - sum(np.conj(x[j]) * psi[j] for j in range(m))
        want = lam * g_prev - alpha * Rp + x * err
        assert np.max(np.abs(got - want)) < 1e-12

    def test_residual_identity(self):
        # the recursive gradient stays equal to b - R psi exactly
        rng = np.random.default_rng(17)
        m = 5
        params = CgParams(eta=0.4, lambda_f=0.8, delta=1e-2)
        state = SecondOrderState.initial(m, params.lambda_f, params.delta)
        psi = np.zeros(m, dtype=complex)
        g = state.b.copy()
        p = g.copy()
        for _ in range(60):
            x = random_vector(rng, m)
            d = complex(rng.standard_normal() + 1j * rng.standard_normal())
            sample = RegressionSample(x, d)
            state = update_statistics(state, sample)
            try:
                alpha = step_size_alpha(p, g, state.R, params.eta)
            except DegenerateDirectionError:
                alpha = 0.0
            psi_prev = psi
            psi = psi + alpha * p
            g_new = mcg_gradient_update(g, alpha, state.R, p, sample, psi_prev, params.lambda_f)
            try:
                beta = beta_polak_ribiere(g_new, g)
            except DegenerateDirectionError:
                beta = 0.0
            err = np.conj(d) - np.vdot(x, psi_prev)
            p = direction_update(g_new, beta, p, x * err)
            g = g_new
            assert np.max(np.abs(g - (state.b - state.R @ psi))) < 1e-9


class TestSolveNormalEquations:
    def test_diagonal(self):
        assert np.allclose(solve_normal_equations(np.diag([2.0, 4.0]), [2.0, 4.0]), [1.0, 1.0])

    def test_identity(self):
        rng = np.random.default_rng(18)
        b = random_vector(rng, 6)
        assert np.allclose(solve_normal_equations(np.eye(6), b), b)

    def test_random_pd_against_elimination_oracle(self):
        rng = np.random.default_rng(19)
        m = 8
        R = random_pd(rng, m)
        b = random_vector(rng, m)
        w = solve_normal_equations(R, b)
        assert np.linalg.norm(R @ w - b) < 1e-8 * np.linalg.norm(b)
        assert np.max(np.abs(w - gaussian_elimination(R, b))) < 1e-8

    def test_indefinite_rejected(self):
        with pytest.raises(NormalEquationsError):
            solve_normal_equations(np.diag([1.0, -1.0]), [1.0, 1.0])

    def test_singular_rejected(self):
        with pytest.raises(NormalEquationsError):
            solve_normal_equations(np.zeros((2, 2)), [1.0, 1.0])


def gaussian_elimination(A, b):
    """Independent dense solve: Gaussian elimination with partial pivoting."""
    A = np.array(A, dtype=complex)
    b = np.array(b, dtype=complex)
    n = A.shape[0]
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(A[col:, col])))
        if pivot != col:
            A[[col, pivot]] = A[[pivot, col]]
            b[[col, pivot]] = b[[pivot, col]]
        for row in range(col + 1, n):
            f = A[row, col] / A[col, col]
            A[row, col:] -= f * A[col, col:]
            b[row] -= f * b[col]
    x = np.zeros(n, dtype=complex)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - A[row, row + 1:] @ x[row + 1:]) / A[row, row]
    return x


class TestCcgInnerSolve:
    def test_fixed_point(self):
        rng = np.random.default_rng(20)
        m = 4
        R = random_pd(rng, m)
        w = random_vector(rng, m)
        stats = SecondOrderState(R=R, b=R @ w, lambda_f=1.0)
        for J in (1, 3, 10):
            out = ccg_inner_solve(stats, w, CgParams(eta=1.0, lambda_f=1.0, inner_iterations=J))
            assert np.max(np.abs(out - w)) < 1e-12

    def test_identity_single_step(self):
        rng = np.random.default_rng(21)
        b = random_vector(rng, 5)
        stats = SecondOrderState(R=np.eye(5, dtype=complex), b=b, lambda_f=1.0)
        out = ccg_inner_solve(stats, np.zeros(5), CgParams(eta=1.0, lambda_f=1.0, inner_iterations=1))
        assert np.max(np.abs(out - b)) < 1e-12

    def test_finite_termination_matches_direct_solve(self):
        rng = np.random.default_rng(22)
        m = 6
        R = random_pd(rng, m)
        b = random_vector(rng, m)
        stats = SecondOrderState(R=R, b=b, lambda_f=1.0)
        out = ccg_inner_solve(stats, np.zeros(m), CgParams(eta=1.0, lambda_f=1.0, inner_iterations=m))
        want = solve_normal_equations(R, b)
        assert np.linalg.norm(out - want) < 1e-6

    @pytest.mark.parametrize("m", [2, 4, 8, 16])
    def test_exact_cg_equivalence(self, m):
        # moderate conditioning: finite termination is exact-arithmetic only,
        # so ill-conditioned systems need more than m iterations in floats
        rng = np.random.default_rng(100 + m)
        for _ in range(5):
            G = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            R = G @ G.conj().T / m + np.eye(m)
            b = random_vector(rng, m)
            stats = SecondOrderState(R=R, b=b, lambda_f=1.0)
            got = ccg_inner_solve(stats, np.zeros(m), CgParams(eta=1.0, lambda_f=1.0, inner_iterations=m))
            want = solve_normal_equations(R, b)
            assert np.linalg.norm(got - want) < 1e-6 * np.linalg.norm(want)

    def test_classic_alpha_mode_also_terminates(self):
        rng = np.random.default_rng(23)
        m = 5
        R = random_pd(rng, m)
        b = random_vector(rng, m)
        stats = SecondOrderState(R=R, b=b, lambda_f=1.0)
        got = ccg_inner_solve(
            stats, np.zeros(m),
            CgParams(eta=1.0, lambda_f=1.0, inner_iterations=m, alpha_mode="classic"),
        )
        assert np.linalg.norm(got - solve_normal_equations(R, b)) < 1e-6

    def test_scale_covariance(self):
        rng = np.random.default_rng(24)
        m = 5
        R = random_pd(rng, m)
        b = random_vector(rng, m)
        params = CgParams(eta=0.8, lambda_f=1.0, inner_iterations=3)
        base = ccg_inner_solve(SecondOrderState(R=R, b=b, lambda_f=1.0), np.zeros(m), params)
        for c in (4.0, 3.0):
            scaled = ccg_inner_solve(SecondOrderState(R=c * R, b=c * b, lambda_f=1.0), np.zeros(m), params)
            assert np.max(np.abs(scaled - base)) < 1e-12
        assert np.max(np.abs(
            solve_normal_equations(3.0 * R, 3.0 * b) - solve_normal_equations(R, b)
        )) < 1e-10


class TestCgParams:
    def test_band_enforced(self):
        with pytest.raises(ValueError, match=r"\[-0.25, 0.25\]"):
            CgParams(eta=0.9, lambda_f=0.25)
        with pytest.raises(ValueError):
            CgParams(eta=-0.3, lambda_f=0.25)

    def test_band_boundaries_accepted(self):
        CgParams(eta=0.25, lambda_f=0.25)
        CgParams(eta=-0.25, lambda_f=0.25)
        CgParams(eta=1.0, lambda_f=1.0)

    def test_other_validation(self):
        with pytest.raises(ValueError):
            CgParams(eta=0.5, lambda_f=1.5)
        with pytest.raises(ValueError):
            CgParams(eta=0.6, lambda_f=0.8, inner_iterations=0)
        with pytest.raises(ValueError):
            CgParams(eta=0.6, lambda_f=0.8, delta=0.0)
        with pytest.raises(ValueError):
            CgParams(eta=0.6, lambda_f=0.8, alpha_mode="bogus")
