"""Primal solver: free energy, gradients, updates, fixed-point iteration."""

import numpy as np
import pytest

from garrote.data import Dataset, SufficientStats, center, sufficient_stats
from garrote.generate import example1_spec, gen_instance
from garrote.orthogonal import univariate_fixed_points
from garrote.path import gamma_min
from garrote.solver import (
    SingularSystemError,
    SolveOptions,
    VgSolution,
    beta_update,
    clip_m,
    free_energy,
    free_energy_grad,
    m_proposal,
    predict,
    quad_form,
    solve_primal,
    stationarity_norm,
    w_update,
)
from tests.conftest import random_dataset, random_state


def orthogonal_stats(b, sigma_y2, p):
    b = np.asarray(b, dtype=float)
    n = b.size
    return SufficientStats(b=b, chi_diag=np.ones(n), sigma_y2=float(sigma_y2),
                           p=p, n=n, chi=np.eye(n))


class TestSolveOptions:
    def test_defaults(self):
        o = SolveOptions()
        assert o.tol == 1e-7 and o.max_iter == 10000 and o.m_clip == 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            SolveOptions(tol=0.0)
        with pytest.raises(ValueError):
            SolveOptions(m_clip=0.7)


class TestFreeEnergy:
    def test_term_by_term_oracle(self, rng):
        # [DERIVED] independent summation of every term on a random n=2 state
        stats, _, m, w, beta = random_state(rng, 12, 2)
        gamma = -3.0
        chi = stats.chi
        q_ref = 0.0
        for i in range(2):
            for j in range(2):
                q_ref += m[i] * m[j] * w[i] * w[j] * chi[i, j]
        for i in range(2):
            q_ref += m[i] * (1 - m[i]) * w[i] ** 2 * chi[i, i]
            q_ref -= 2 * m[i] * w[i] * stats.b[i]
        q_ref += stats.sigma_y2
        ent = sum(mi * np.log(mi) + (1 - mi) * np.log(1 - mi) for mi in m)
        f_ref = (0.5 * beta * stats.p * q_ref - gamma * m.sum() + ent
                 - 0.5 * stats.p * np.log(beta / (2 * np.pi)))
        assert quad_form(m, w, stats) == pytest.approx(q_ref, abs=1e-12)
        assert free_energy(m, w, beta, gamma, stats) == pytest.approx(f_ref, abs=1e-10)

    def test_all_off_limit(self):
        # m at the clip floor: every m-dependent term is O(m_clip log m_clip)
        stats = orthogonal_stats([0.5, -0.2], sigma_y2=2.0, p=10)
        m = np.full(2, 1e-12)
        f = free_energy(m, np.array([1.0, 1.0]), 1.0, -1.0, stats)
        f_ref = 0.5 * 10 * 2.0 - 0.5 * 10 * np.log(1.0 / (2 * np.pi))
        assert f == pytest.approx(f_ref, abs=1e-6)

    def test_rejects_unclipped_m(self, rng):
        stats, _, _, w, beta = random_state(rng, 10, 3)
        with pytest.raises(ValueError):
            free_energy(np.array([0.0, 0.5, 0.5]), w, beta, -1.0, stats)

    def test_design_matrix_path_matches_chi_path(self, rng):
        stats, data, m, w, beta = random_state(rng, 15, 4)
        stats_nochi = sufficient_stats(data, full_chi=False)
        f_chi = free_energy(m, w, beta, -2.0, stats)
        f_x = free_energy(m, w, beta, -2.0, stats_nochi, x_c=data.x_c)
        assert f_x == pytest.approx(f_chi, rel=1e-12)

    def test_quad_form_needs_chi_or_design(self, rng):
        stats, data, m, w, _ = random_state(rng, 10, 3)
        stats_nochi = sufficient_stats(data, full_chi=False)
        with pytest.raises(ValueError):
            quad_form(m, w, stats_nochi)


class TestGradient:
    def test_finite_differences(self, rng):
        # [DERIVED] central finite differences on every coordinate
        for _ in range(10):
            stats, _, m, w, beta = random_state(rng, 12, 4)
            gamma = float(rng.uniform(-10, 0))
            g_m, g_w, g_beta = free_energy_grad(m, w, beta, gamma, stats)
            h = 1e-6

            def f(mv, wv, bv):
                return free_energy(mv, wv, bv, gamma, stats)

            for i in range(4):
                dm = np.zeros(4)
                dm[i] = h
                fd = (f(m + dm, w, beta) - f(m - dm, w, beta)) / (2 * h)
                assert g_m[i] == pytest.approx(fd, rel=1e-5, abs=1e-5)
                dw = np.zeros(4)
                dw[i] = h
                fd = (f(m, w + dw, beta) - f(m, w - dw, beta)) / (2 * h)
                assert g_w[i] == pytest.approx(fd, rel=1e-5, abs=1e-5)
            fd = (f(m, w, beta + h) - f(m, w, beta - h)) / (2 * h)
            assert g_beta == pytest.approx(fd, rel=1e-5, abs=1e-5)


class TestWUpdate:
    def test_all_on_gives_ols(self, rng):
        # m = 1 (up to clipping) reduces chi' to chi: the OLS solution
        stats, _, _, _, _ = random_state(rng, 20, 4)
        m = np.full(4, 1.0 - 1e-12)
        w = w_update(m, stats)
        w_ols = np.linalg.solve(stats.chi, stats.b)
        assert np.allclose(w, w_ols, rtol=1e-9, atol=1e-11)

    def test_orthogonal_gives_b(self, rng):
        stats = orthogonal_stats(rng.standard_normal(5), sigma_y2=50.0, p=30)
        m = rng.uniform(0.05, 0.95, 5)
        assert np.allclose(w_update(m, stats), stats.b, atol=1e-12)

    def test_residual(self, rng):
        # [DERIVED] residual check on the effective system
        stats, _, m, _, _ = random_state(rng, 10, 3)
        w = w_update(m, stats)
        chi_p = stats.chi * m[None, :] + np.diag((1 - m) * stats.chi_diag)
        assert np.max(np.abs(chi_p @ w - stats.b)) <= 1e-10

    def test_singular_system_raises(self):
        # duplicated feature at m = 1 makes chi' exactly singular
        x = np.random.default_rng(0).standard_normal((6, 1))
        x = np.hstack([x, x])
        y = x[:, 0]
        stats = sufficient_stats(center(Dataset(x=x, y=y)), full_chi=True)
        with pytest.raises(SingularSystemError):
            w_update(np.ones(2), stats)


class TestBetaUpdate:
    def test_all_off(self, rng):
        stats, _, _, w, _ = random_state(rng, 10, 3)
        beta, capped = beta_update(np.zeros(3), w, stats)
        assert beta == pytest.approx(1.0 / stats.sigma_y2) and not capped

    def test_orthogonal_formula(self, rng):
        stats = orthogonal_stats(rng.standard_normal(4) * 0.3, sigma_y2=3.0, p=20)
        m = rng.uniform(0.1, 0.9, 4)
        beta, capped = beta_update(m, stats.b, stats)
        assert 1.0 / beta == pytest.approx(3.0 - np.sum(m * stats.b**2), rel=1e-12)
        assert not capped

    def test_cap(self):
        # explained variance exceeds sigma_y^2: beta pins at the relative
        # interpolation floor and the solution is flagged
        stats = orthogonal_stats([2.0], sigma_y2=1.0, p=10)
        beta, capped = beta_update(np.array([1.0]), np.array([2.0]), stats)
        assert capped and beta == pytest.approx(1e8 / stats.sigma_y2)


class TestMProposal:
    def test_gamma_zero_w_zero(self, rng):
        stats, _, m, _, _ = random_state(rng, 10, 3)
        prop = m_proposal(m, np.zeros(3), 1.0, 0.0, stats)
        assert np.allclose(prop, 0.5)

    def test_large_negative_gamma(self, rng):
        stats, _, m, w, _ = random_state(rng, 10, 3)
        prop = m_proposal(m, w, 1.0, -1e6, stats)
        assert np.all(prop == 1e-12)

    def test_logistic_evaluation(self):
        # gamma=-10, p=100, beta=1, w^2 chi = 1 -> sigma(40)
        stats = orthogonal_stats([1.0], sigma_y2=100.0, p=100)
        prop = m_proposal(np.array([0.5]), np.array([1.0]), 1.0, -10.0, stats)
        assert prop[0] == pytest.approx(1.0 / (1.0 + np.exp(-40.0)), rel=1e-12)


class TestSolvePrimal:
    def test_univariate_cross_check(self):
        # [DERIVED] the one-feature orthogonal fixed point must match the
        # closed-form univariate root in the unique-solution region
        p, rho, gamma = 100, 0.15, -10.0
        sigma_y2 = 2.0
        b = np.array([np.sqrt(rho * sigma_y2)])
        stats = orthogonal_stats(b, sigma_y2, p)
        sol = solve_primal(stats, gamma, np.array([0.5]))
        roots = univariate_fixed_points(rho, gamma, p)
        assert len(roots) == 1
        assert sol.converged
        assert sol.m[0] == pytest.approx(roots[0][0], abs=1e-6)

    def test_gamma_min_keeps_m_small(self):
        # [DERIVED] by construction of the schedule floor: starting the solve
        # at m = eps with gamma = gamma_min(eps) leaves every m_i <= 2 eps
        inst = gen_instance(example1_spec(seed=0))
        stats = sufficient_stats(center(inst.train), full_chi=True)
        g = gamma_min(stats, 0.001)
        sol = solve_primal(stats, g, np.full(stats.n, 0.001))
        assert sol.converged and np.all(sol.m <= 0.002)

    def test_converged_solution_is_local_minimum_in_m(self, rng):
        # [DERIVED] perturbation probe: F does not decrease under small
        # single-coordinate m moves (F is convex in each m_i at fixed w, beta)
        data = center(random_dataset(rng, 30, 6, k_active=2))
        stats = sufficient_stats(data, full_chi=True)
        sol = solve_primal(stats, -5.0, np.full(6, 0.5))
        assert sol.converged
        f0 = free_energy(sol.m, sol.w, sol.beta, sol.gamma, stats)
        h = 1e-4
        for i in range(6):
            for sign in (+1, -1):
                m2 = sol.m.copy()
                m2[i] = np.clip(m2[i] + sign * h, 1e-12, 1 - 1e-12)
                if m2[i] == sol.m[i]:
                    continue
                f2 = free_energy(m2, sol.w, sol.beta, sol.gamma, stats)
                assert f2 >= f0 - 1e-8

    def test_converged_stationarity(self, rng):
        # converged solutions are stationary to within 100 tol
        opts = SolveOptions()
        data = center(random_dataset(rng, 40, 10, k_active=2))
        stats = sufficient_stats(data, full_chi=True)
        sol = solve_primal(stats, -8.0, np.full(10, 0.001), opts)
        assert sol.converged
        norm = stationarity_norm(sol.m, sol.w, sol.beta, sol.gamma, stats)
        assert norm <= 100 * opts.tol

    def test_requires_full_chi(self, rng):
        data = center(random_dataset(rng, 10, 3))
        stats = sufficient_stats(data, full_chi=False)
        with pytest.raises(ValueError):
            solve_primal(stats, -1.0, np.full(3, 0.5))

    def test_deterministic(self, rng):
        data = center(random_dataset(rng, 25, 8, k_active=2))
        stats = sufficient_stats(data, full_chi=True)
        a = solve_primal(stats, -4.0, np.full(8, 0.001))
        b = solve_primal(stats, -4.0, np.full(8, 0.001))
        assert np.array_equal(a.m, b.m) and np.array_equal(a.w, b.w)
        assert a.beta == b.beta and a.free_energy == b.free_energy


class TestPredict:
    def test_null_model_returns_mean(self, rng):
        sol = VgSolution(m=np.zeros(3), w=np.ones(3), beta=1.0, gamma=0.0,
                         free_energy=0.0, converged=True, iterations=1)
        x = rng.standard_normal((5, 3))
        assert np.allclose(predict(sol, x, np.zeros(3), 2.5), 2.5)

    def test_mean_input_returns_mean_output(self):
        sol = VgSolution(m=np.ones(2), w=np.array([3.0, -1.0]), beta=1.0,
                         gamma=0.0, free_energy=0.0, converged=True, iterations=1)
        x_mean = np.array([1.0, 2.0])
        assert predict(sol, x_mean[None, :], x_mean, 4.0)[0] == pytest.approx(4.0)

    def test_exact_recovery_identity(self, rng):
        w_true = np.array([1.0, 0.0, -2.0])
        x = rng.standard_normal((6, 3))
        y = x @ w_true
        sol = VgSolution(m=np.array([1.0, 0.0, 1.0]), w=np.array([1.0, 9.9, -2.0]),
                         beta=1.0, gamma=0.0, free_energy=0.0,
                         converged=True, iterations=1)
        assert np.allclose(predict(sol, x, np.zeros(3), 0.0), y)


class TestSerialization:
    def test_json_round_trip(self, rng):
        sol = VgSolution(m=rng.uniform(0, 1, 4), w=rng.standard_normal(4),
                         beta=2.5, gamma=-3.0, free_energy=1.25,
                         converged=True, iterations=17, beta_capped=False)
        sol2 = VgSolution.from_json(sol.to_json())
        assert np.array_equal(sol.m, sol2.m) and np.array_equal(sol.w, sol2.w)
        assert sol2.beta == sol.beta and sol2.iterations == 17

    def test_clip_m(self):
        m = np.array([-1.0, 0.5, 2.0])
        assert np.allclose(clip_m(m, 1e-12), [1e-12, 0.5, 1 - 1e-12])
