"""Penalized-regression solver: closed-form oracles, KKT checks, paths, CV."""

import numpy as np
import pytest

from sparsevine import (ContractError, LassoProblem, NumericError,
                        cross_validate, lambda_grid)
from sparsevine.lasso import path, solve


def soft(a, t):
    return np.sign(a) * np.maximum(np.abs(a) - t, 0.0)


def orthonormal_problem(n, p, seed, weights=None):
    """Columns with X'X = n*I, so the minimizer is coordinate-wise."""
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(n, p)))
    X = q * np.sqrt(n)
    beta = rng.normal(scale=2.0, size=p)
    y = X @ beta + rng.normal(scale=0.5, size=n)
    return LassoProblem(X, y, weights), X, y


class TestClosedFormOracle:
    def test_soft_threshold_on_orthonormal_designs(self):
        for seed in range(25):
            rng = np.random.default_rng(1000 + seed)
            p = int(rng.integers(1, 6))
            problem, X, y = orthonormal_problem(200, p, seed)
            a = X.T @ y / 200
            for lam in (0.0, 0.05, 0.2, 1.0):
                got = solve(problem, lam)
                assert np.allclose(got, soft(a, lam), atol=1e-8), (seed, lam)

    def test_penalty_weights_scale_the_threshold(self):
        w = np.array([0.0, 1.0, 2.5, np.inf])
        problem, X, y = orthonormal_problem(200, 4, 7, weights=w)
        a = X.T @ y / 200
        lam = 0.1
        got = solve(problem, lam)
        assert np.isclose(got[0], a[0], atol=1e-8)          # unpenalized
        assert np.isclose(got[1], soft(a[1], lam), atol=1e-8)
        assert np.isclose(got[2], soft(a[2], 2.5 * lam), atol=1e-8)
        assert got[3] == 0.0                                 # excluded


def kkt_violation(problem, phi, lam):
    """Largest violation of the stationarity conditions at ``phi``."""
    r = problem.y - problem.X @ phi
    g = problem.X.T @ r / problem.n
    worst = 0.0
    for j, w in enumerate(problem.penalty_weights):
        if not np.isfinite(w):
            worst = max(worst, abs(phi[j]))
        elif phi[j] != 0.0:
            worst = max(worst, abs(g[j] - lam * w * np.sign(phi[j])))
        else:
            worst = max(worst, max(0.0, abs(g[j]) - lam * w))
    return worst


class TestKktConditions:
    def test_correlated_designs_satisfy_kkt(self):
        for seed in range(30):
            rng = np.random.default_rng(seed)
            n, p = 150, int(rng.integers(2, 9))
            base = rng.normal(size=(n, p))
            X = base + 0.6 * rng.normal(size=(n, 1))  # shared factor
            beta = np.zeros(p)
            beta[: max(1, p // 2)] = rng.normal(scale=1.5, size=max(1, p // 2))
            y = X @ beta + rng.normal(scale=0.7, size=n)
            problem = LassoProblem(X, y)
            for lam in (0.02, 0.1, 0.5):
                phi = solve(problem, lam)
                assert kkt_violation(problem, phi, lam) < 1e-6, (seed, lam)

    def test_whitelist_blacklist_kkt(self):
        rng = np.random.default_rng(99)
        X = rng.normal(size=(120, 5))
        y = X @ np.array([1.0, -2.0, 0.0, 0.5, 3.0]) + rng.normal(size=120)
        w = np.array([1.0, 0.0, np.inf, 1.0, 1.0])
        problem = LassoProblem(X, y, w)
        phi = solve(problem, 0.15)
        assert phi[2] == 0.0
        assert kkt_violation(problem, phi, 0.15) < 1e-6


class TestLambdaGrid:
    def test_grid_head_zeroes_every_penalized_coefficient(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            X = rng.normal(size=(80, 6))
            y = X @ rng.normal(size=6) + rng.normal(size=80)
            problem = LassoProblem(X, y)
            grid = lambda_grid(problem)
            assert np.all(np.diff(grid) < 0)
            phi = solve(problem, grid[0])
            assert np.allclose(phi, 0.0, atol=1e-9)
            # Fractionally below the head, something must activate.
            phi = solve(problem, grid[0] * 0.99)
            assert np.any(phi != 0.0)

    def test_whitelist_shifts_lambda_max_to_partial_residual(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(100, 3))
        y = X @ np.array([2.0, 1.0, 0.0]) + rng.normal(size=100)
        w = np.array([0.0, 1.0, 1.0])
        problem = LassoProblem(X, y, w)
        grid = lambda_grid(problem)
        phi = solve(problem, grid[0])
        assert phi[0] != 0.0 and np.allclose(phi[1:], 0.0, atol=1e-9)


class TestRegularizationPath:
    def test_orthonormal_entry_values_match_closed_form(self):
        problem, X, y = orthonormal_problem(200, 5, 42)
        a = np.abs(X.T @ y / 200)
        rp = path(problem)
        lams = rp.entry_lambdas
        # Coefficient j activates once lam < |a_j|: the recorded grid entry
        # is the largest grid value below |a_j|.
        for j in range(5):
            below = rp.lambda_grid[rp.lambda_grid < a[j]]
            assert lams[j] == pytest.approx(below[0])
        # Activation order is by descending |a|.
        assert rp.order == tuple(np.argsort(-a))

    def test_entries_partition_and_ordering(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(90, 6))
        y = X @ np.array([3.0, 0.0, -2.0, 0.0, 1.0, 0.0]) + rng.normal(size=90)
        w = np.array([1.0, 1.0, 0.0, np.inf, 1.0, 1.0])
        rp = path(LassoProblem(X, y, w))
        idx = [i for i, _ in rp.entries]
        assert 3 not in idx                  # excluded coefficient is absent
        assert idx[0] == 2                   # whitelisted heads the path
        assert rp.entry_lambdas[2] == np.inf
        vals = [lam for _, lam in rp.entries]
        assert vals == sorted(vals, reverse=True)

    def test_active_set_grows_monotonically_on_benign_designs(self):
        for seed in range(10):
            problem, _, _ = orthonormal_problem(150, 5, 200 + seed)
            rp = path(problem)
            counts = rp.active_counts()
            assert np.all(np.diff(counts) >= 0)


class TestCrossValidation:
    def test_planted_support_recovered_at_cv_minimum(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(200, 8))
        beta = np.zeros(8)
        beta[[0, 3, 6]] = [2.0, -1.5, 1.0]
        y = X @ beta + rng.normal(scale=0.5, size=200)
        problem = LassoProblem(X, y)
        cv = cross_validate(problem, k=5, seed=0)
        assert cv.lambda_1se >= cv.lambda_min > 0
        assert cv.mean_mse.shape == cv.lambda_grid.shape
        active_min = np.flatnonzero(solve(problem, cv.lambda_min))
        assert {0, 3, 6} <= set(active_min)
        active_1se = np.flatnonzero(solve(problem, cv.lambda_1se))
        assert set(active_1se) <= set(active_min)

    def test_fold_count_guards(self):
        rng = np.random.default_rng(0)
        problem = LassoProblem(rng.normal(size=(30, 3)), rng.normal(size=30))
        with pytest.raises(ContractError):
            cross_validate(problem, k=1, seed=0)
        with pytest.raises(ContractError):
            cross_validate(problem, k=31, seed=0)


class TestGuards:
    def test_problem_validation(self):
        X = np.ones((10, 2))
        with pytest.raises(ContractError):
            LassoProblem(X, np.ones(9))
        with pytest.raises(NumericError):
            LassoProblem(np.array([[1.0, np.nan]] * 10), np.ones(10))
        with pytest.raises(ContractError):
            LassoProblem(X, np.ones(10), np.array([-1.0, 1.0]))
        with pytest.raises(ContractError):
            LassoProblem(X, np.ones(10), np.array([np.inf, np.inf]))

    def test_solve_rejects_bad_penalty(self):
        problem = LassoProblem(np.eye(4), np.ones(4))
        with pytest.raises(ContractError):
            solve(problem, -0.1)
        with pytest.raises(ContractError):
            solve(problem, np.inf)
