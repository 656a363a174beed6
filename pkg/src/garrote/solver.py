"""Primal fixed-point solver.

Minimizes the variational free energy

    F = (beta p / 2) * Q(m, w) - gamma * sum(m) + H(m) - (p/2) log(beta / 2 pi)

with Q(m, w) = sum_ij m_i m_j w_i w_j chi_ij + sum_i m_i (1 - m_i) w_i^2 chi_ii
             - 2 sum_i m_i w_i b_i + sigma_y^2

by alternating the stationarity updates for w (linear system), beta (residual
variance) and m (logistic), with a damped (eta-smoothed) m step.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import expit

from .data import SufficientStats

# Residual variance below this fraction of sigma_y^2 marks an interpolating
# (degenerate) solution: beta is pinned there, and the annealing driver
# excludes such solutions from free-energy branch selection.
DEGENERATE_RESIDUAL = 1e-8


class SingularSystemError(np.linalg.LinAlgError):
    """The effective covariance chi' is numerically singular."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-7
    max_iter: int = 10000
    m_clip: float = 1e-12
    eta_jump_threshold: float = 0.1
    beta_cap: float = 1e12

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if not 0.0 < self.m_clip < 0.5:
            raise ValueError("m_clip must be in (0, 0.5)")


@dataclass(frozen=True)
class VgSolution:
    m: np.ndarray
    w: np.ndarray
    beta: float
    gamma: float
    free_energy: float
    converged: bool
    iterations: int
    beta_capped: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {
                "m": self.m.tolist(),
                "w": self.w.tolist(),
                "beta": self.beta,
                "gamma": self.gamma,
                "free_energy": self.free_energy,
                "converged": self.converged,
                "iterations": self.iterations,
                "beta_capped": self.beta_capped,
            },
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "VgSolution":
        d = json.loads(text)
        return cls(
            m=np.array(d["m"]),
            w=np.array(d["w"]),
            beta=d["beta"],
            gamma=d["gamma"],
            free_energy=d["free_energy"],
            converged=d["converged"],
            iterations=d["iterations"],
            beta_capped=d.get("beta_capped", False),
        )


def clip_m(m: np.ndarray, m_clip: float) -> np.ndarray:
    return np.clip(m, m_clip, 1.0 - m_clip)


def quad_form(m, w, stats: SufficientStats, x_c: np.ndarray | None = None) -> float:
    """The likelihood bracket Q(m, w); uses chi if present, else O(np) products."""
    mw = m * w
    if stats.chi is not None:
        cross = mw @ stats.chi @ mw
    elif x_c is not None:
        z = x_c @ mw
        cross = float(z @ z) / stats.p
    else:
        raise ValueError("need either full chi or the centered design matrix")
    diag = np.sum(m * (1.0 - m) * w**2 * stats.chi_diag)
    return float(cross + diag - 2.0 * np.sum(mw * stats.b) + stats.sigma_y2)


def free_energy(
    m, w, beta: float, gamma: float, stats: SufficientStats,
    x_c: np.ndarray | None = None, m_clip: float = 1e-12,
) -> float:
    m = np.asarray(m, dtype=float)
    if np.any(m < m_clip - 1e-300) or np.any(m > 1.0 - m_clip + 1e-300):
        raise ValueError("m outside [m_clip, 1 - m_clip]; entropy undefined at 0/1")
    q = quad_form(m, w, stats, x_c)
    entropy = np.sum(m * np.log(m) + (1.0 - m) * np.log(1.0 - m))
    return float(
        0.5 * beta * stats.p * q
        - gamma * np.sum(m)
        + entropy
        - 0.5 * stats.p * np.log(beta / (2.0 * np.pi))
    )


def free_energy_grad(
    m, w, beta: float, gamma: float, stats: SufficientStats,
    x_c: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Analytic partials (dF/dm, dF/dw, dF/dbeta)."""
    m = np.asarray(m, dtype=float)
    w = np.asarray(w, dtype=float)
    mw = m * w
    if stats.chi is not None:
        chi_mw = stats.chi @ mw
    elif x_c is not None:
        chi_mw = x_c.T @ (x_c @ mw) / stats.p
    else:
        raise ValueError("need either full chi or the centered design matrix")
    bp2 = 0.5 * beta * stats.p
    g_m = (
        bp2 * (2.0 * w * chi_mw + (1.0 - 2.0 * m) * w**2 * stats.chi_diag - 2.0 * w * stats.b)
        - gamma
        + np.log(m / (1.0 - m))
    )
    g_w = beta * stats.p * (
        m * chi_mw + m * (1.0 - m) * w * stats.chi_diag - m * stats.b
    )
    q = quad_form(m, w, stats, x_c)
    g_beta = 0.5 * stats.p * q - 0.5 * stats.p / beta
    return g_m, g_w, float(g_beta)


def effective_chi(m: np.ndarray, chi: np.ndarray, chi_diag: np.ndarray) -> np.ndarray:
    """chi'_ij = chi_ij m_j + (1 - m_j) chi_jj delta_ij (not symmetric in general)."""
    chi_p = chi * m[None, :]
    idx = np.arange(chi.shape[0])
    chi_p[idx, idx] += (1.0 - m) * chi_diag
    return chi_p


def w_update(m: np.ndarray, stats: SufficientStats) -> np.ndarray:
    """Solve chi' w = b by dense LU with partial pivoting."""
    if stats.chi is None:
        raise ValueError("w_update needs the full chi (primal path)")
    active = stats.mask
    w = np.zeros(stats.n)
    chi_p = effective_chi(m[active], stats.chi[np.ix_(active, active)],
                          stats.chi_diag[active])
    try:
        with warnings.catch_warnings():
            # exact singularity surfaces as a warning; the pivot check below
            # turns it into SingularSystemError
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(chi_p)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError("chi' is singular", np.inf) from exc
    diag_u = np.abs(np.diag(lu))
    if diag_u.min() <= 1e-14 * max(diag_u.max(), 1.0):
        cond = diag_u.max() / max(diag_u.min(), 1e-300)
        raise SingularSystemError("chi' is numerically singular", cond)
    w[active] = scipy.linalg.lu_solve((lu, piv), stats.b[active])
    return w


def beta_update(
    m: np.ndarray, w: np.ndarray, stats: SufficientStats, beta_cap: float = 1e12
) -> tuple[float, bool]:
    """1/beta = sigma_y^2 - sum m_i w_i b_i (valid when w solves chi' w = b).

    Returns (beta, capped); capped marks an interpolating solution whose
    residual variance fell below the relative floor (or the absolute cap).
    Pinning beta there keeps the activation update free of the roundoff in
    the near-total cancellation of sigma_y^2.
    """
    inv_beta = stats.sigma_y2 - float(np.sum(m * w * stats.b))
    inv_floor = max(1.0 / beta_cap, DEGENERATE_RESIDUAL * stats.sigma_y2)
    if inv_beta <= inv_floor:
        return 1.0 / inv_floor, True
    return 1.0 / inv_beta, False


def m_proposal(
    m: np.ndarray, w: np.ndarray, beta: float, gamma: float,
    stats: SufficientStats, m_clip: float = 1e-12,
) -> np.ndarray:
    """sigma(gamma + (beta p / 2) w_i^2 chi_ii), clipped into the open unit interval."""
    logits = gamma + 0.5 * beta * stats.p * w**2 * stats.chi_diag
    prop = clip_m(expit(logits), m_clip)
    return np.where(stats.mask, prop, m_clip)


def stationarity_norm(
    m, w, beta: float, gamma: float, stats: SufficientStats,
    x_c: np.ndarray | None = None, m_clip: float = 1e-12,
) -> float:
    """Max-norm stationarity of F at (m, w, beta).

    The m-block is measured in the mean parameterization, i.e. scaled by
    m(1-m) (the natural metric of the logistic link), so it stays comparable
    with the fixed-point gap even when components sit near 0 or 1.  Components
    pinned at the clip boundary with an outward-pointing gradient contribute
    zero (projected stationarity).
    """
    g_m, g_w, g_beta = free_energy_grad(m, w, beta, gamma, stats, x_c)
    m = np.asarray(m, dtype=float)
    scaled = m * (1.0 - m) * g_m
    at_lo = (m <= m_clip * (1 + 1e-9)) & (g_m > 0)
    at_hi = (m >= 1 - m_clip * (1 + 1e-9)) & (g_m < 0)
    scaled[at_lo | at_hi] = 0.0
    parts = [np.max(np.abs(scaled)) if scaled.size else 0.0,
             np.max(np.abs(g_w)) if g_w.size else 0.0,
             abs(g_beta)]
    return float(max(parts))


def _smoothed_iteration(step_w_beta, m_init, gamma, stats, opts, x_c=None):
    """Shared damped fixed-point loop for the primal and dual paths.

    ``step_w_beta(m) -> (w, beta, capped)`` supplies the inner linear solve.
    eta starts at 1 and halves whenever the damped step |m' - m| exceeds the
    jump threshold (self-limiting: once steps are small, eta stays put);
    convergence is measured on the undamped proposal gap so damping cannot
    fake a fixed point.
    """
    m = clip_m(np.asarray(m_init, dtype=float).copy(), opts.m_clip)
    m[~stats.mask] = opts.m_clip
    eta_jump = 1.0   # monotone: halved whenever the smoothed step is too large
    eta_osc = 1.0    # oscillation brake: halved on reversals, recovers when aligned
    w = np.zeros(stats.n)
    beta = 1.0
    capped = False
    converged = False
    iterations = 0
    prev_step = None
    reversals = 0
    aligned = 0
    for iterations in range(1, opts.max_iter + 1):
        w, beta, capped = step_w_beta(m)
        prop = m_proposal(m, w, beta, gamma, stats, opts.m_clip)
        gap = float(np.max(np.abs(prop - m)))
        if gap <= opts.tol:
            converged = True
            break
        eta = eta_jump * eta_osc
        m_new = (1.0 - eta) * m + eta * prop
        if eta * gap > opts.eta_jump_threshold:
            eta_jump *= 0.5
        # the parallel update can settle into a small-amplitude period-2 cycle
        # instead of contracting; persistent reversal of the step direction is
        # the signature, and extra damping breaks the cycle.  Conversely, a
        # long run of aligned steps means the brake is only slowing a monotone
        # crawl, so it recovers -- but never beyond the jump-rule level.
        step = m_new - m
        if prev_step is not None:
            if float(step @ prev_step) < 0.0:
                reversals += 1
                aligned = 0
                if reversals >= 5 and eta_osc > 2.0**-8:
                    eta_osc *= 0.5
                    reversals = 0
            else:
                reversals = 0
                aligned += 1
                if aligned >= 10 and eta_osc < 1.0:
                    eta_osc = min(1.0, 2.0 * eta_osc)
                    aligned = 0
        prev_step = step
        m = clip_m(m_new, opts.m_clip)
    # re-evaluate w, beta at the final m so the stored triple is self-consistent
    w, beta, capped = step_w_beta(m)
    f = free_energy(m, w, beta, gamma, stats, x_c=x_c, m_clip=opts.m_clip)
    return VgSolution(
        m=m, w=w, beta=beta, gamma=gamma, free_energy=f,
        converged=converged, iterations=iterations, beta_capped=capped,
    )


def solve_primal(
    stats: SufficientStats, gamma: float, m_init: np.ndarray,
    opts: SolveOptions = SolveOptions(),
) -> VgSolution:
    """Damped fixed-point iteration in feature space (needs full chi)."""
    if stats.chi is None:
        raise ValueError("solve_primal needs full chi; use the dual path otherwise")

    def step(m):
        w = w_update(m, stats)
        beta, capped = beta_update(m, w, stats, opts.beta_cap)
        return w, beta, capped

    return _smoothed_iteration(step, m_init, gamma, stats, opts)


def predict(
    solution: VgSolution, x_new: np.ndarray, x_mean: np.ndarray, y_mean: float
) -> np.ndarray:
    """y_hat = sum_i m_i w_i (x_i - xbar_i) + ybar."""
    v = solution.m * solution.w
    return (np.asarray(x_new) - x_mean) @ v + y_mean
