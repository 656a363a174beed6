"""Dual (sample-space) solver for the n > p regime.

Instead of the n x n system chi' w = b, each iteration solves the p x p
system A yhat = y with

    A_mu_nu = delta_mu_nu + (1/p) sum_i [m_i / (1 - m_i)] x_i^mu x_i^nu / chi_ii

and recovers beta, the multipliers lambda = beta * yhat, and

    w_i = (1 / (beta p chi_ii (1 - m_i))) sum_mu lambda^mu x_i^mu.

A = I + (weighted Gram) is symmetric positive definite, so a Cholesky solve
applies; the free energy is evaluated through O(np) products without ever
forming chi.

Features with m_i near 1 give the Gram term a weight m_i / (1 - m_i) that can
reach ~1/m_clip, making A arbitrarily ill-conditioned and putting a roundoff
floor on the fixed-point gap well above tol.  Those features are therefore
split out and handled through a Woodbury (matrix inversion lemma) correction
with a small, well-conditioned capacitance system; their coefficients come out
as w_i = u_i / m_i with no cancellation.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .data import CenteredDataset, SufficientStats
from .solver import (
    DEGENERATE_RESIDUAL,
    SolveOptions,
    VgSolution,
    _smoothed_iteration,
)


# Features with m / (1 - m) above this go through the Woodbury correction.
SATURATION_ODDS = 1e4


def _dual_weights(m: np.ndarray, chi_diag: np.ndarray) -> np.ndarray:
    safe = np.where(chi_diag > 0.0, chi_diag, 1.0)
    return np.where(chi_diag > 0.0, m / (1.0 - m) / safe, 0.0)


def dual_matrix(m: np.ndarray, x_c: np.ndarray, chi_diag: np.ndarray) -> np.ndarray:
    p = x_c.shape[0]
    weights = _dual_weights(m, chi_diag)
    a = (x_c * weights[None, :]) @ x_c.T / p
    a[np.diag_indices_from(a)] += 1.0
    return a


def dual_solve(
    stats: SufficientStats, x_c: np.ndarray, y_c: np.ndarray, m: np.ndarray,
    beta_cap: float = 1e12,
) -> tuple[float, np.ndarray, np.ndarray, bool]:
    """Returns (beta, lambda, w, capped) at fixed m."""
    p = stats.p
    weights = _dual_weights(m, stats.chi_diag)
    sat = stats.mask & (m / (1.0 - m) > SATURATION_ODDS)
    base = weights.copy()
    base[sat] = 0.0
    b_mat = (x_c * base[None, :]) @ x_c.T / p
    b_mat[np.diag_indices_from(b_mat)] += 1.0
    cho = scipy.linalg.cho_factor(b_mat, lower=True)
    z = scipy.linalg.cho_solve(cho, y_c)
    u = np.zeros(0)
    if np.any(sat):
        v = x_c[:, sat]
        w_cols = scipy.linalg.cho_solve(cho, v)
        cap = v.T @ w_cols
        cap[np.diag_indices_from(cap)] += p / weights[sat]
        u = scipy.linalg.solve(cap, v.T @ z, assume_a="pos")
        y_hat = z - w_cols @ u
        # exact identity: x_i . y_hat = (p / weights_i) u_i for saturated i
        inv_beta = (float(y_c @ z) - float(u @ (v.T @ z))) / p
    else:
        y_hat = z
        inv_beta = float(y_hat @ y_c) / p
    # same relative interpolation floor as beta_update: pinning beta keeps the
    # activation update free of the residual-cancellation roundoff
    inv_floor = max(1.0 / beta_cap, DEGENERATE_RESIDUAL * stats.sigma_y2)
    capped = inv_beta <= inv_floor
    beta = 1.0 / inv_floor if capped else 1.0 / inv_beta
    lam = beta * y_hat
    denom = beta * p * stats.chi_diag * (1.0 - m)
    w = np.where(stats.mask, (x_c.T @ lam) / np.where(stats.mask, denom, 1.0), 0.0)
    if np.any(sat):
        w[sat] = u / m[sat]
    return beta, lam, w, capped


def solve_dual(
    data: CenteredDataset, stats: SufficientStats, gamma: float,
    m_init: np.ndarray, opts: SolveOptions = SolveOptions(),
) -> VgSolution:
    """Same smoothing and convergence contract as solve_primal, in sample space."""

    def step(m):
        beta, _lam, w, capped = dual_solve(stats, data.x_c, data.y_c, m, opts.beta_cap)
        return w, beta, capped

    return _smoothed_iteration(step, m_init, gamma, stats, opts, x_c=data.x_c)
