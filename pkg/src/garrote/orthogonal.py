"""Closed-form analysis for orthogonal designs (chi = I).

With orthogonal inputs the exact MAP over the selector bits reduces to a
one-dimensional scan over the support size on sorted squared covariances
b_i^2, and the single-feature
variational fixed-point equation

    m = sigma(gamma + (p/2) rho / (1 - rho m - delta)) = f(m)

with rho = b^2 / sigma_y^2 admits one or three roots.  This module computes
the exact MAP, the fixed-point roots with stability labels, and the phase
boundaries (rho*, the tangency gamma-range, gamma*) of the bistable region.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

M_CLIP = 1e-12
_BRACKETS = 10_000


@dataclass(frozen=True)
class OrthogonalSolution:
    s: np.ndarray  # binary selector per feature
    k: int
    beta: float
    log_score: float
    saturated: bool = False


def exact_map_orthogonal(
    b: np.ndarray, sigma_y2: float, gamma: float, p: int, beta_cap: float = 1e12
) -> OrthogonalSolution:
    """Exact MAP over the selector bits.

    The score of a support depends on it only through its size k and the
    explained variance sum(b_i^2 over the support), which is maximized by the
    k largest b_i^2.  So the global optimum is found by scanning k = 0..n
    over cumulative sums of the sorted b_i^2 -- equivalent to exhaustive
    support enumeration, in O(n log n).  (A purely greedy threshold stop can
    end at a local optimum in k; the scan cannot.)
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    b2 = b**2
    order = np.argsort(-b2, kind="stable")
    explained = np.concatenate([[0.0], np.cumsum(b2[order])])
    inv_betas = np.maximum(sigma_y2 - explained, 1.0 / beta_cap)
    scores = -0.5 * p * np.log(inv_betas) + gamma * np.arange(n + 1)
    k = int(np.argmax(scores))
    s = np.zeros(n, dtype=int)
    s[order[:k]] = 1
    saturated = sigma_y2 - explained[k] <= 1.0 / beta_cap
    beta = 1.0 / inv_betas[k]
    log_score = (
        0.5 * p * np.log(beta)
        + float(np.sum(s * (0.5 * beta * p * b2 + gamma)))
        - 0.5 * beta * p * sigma_y2
    )
    return OrthogonalSolution(s=s, k=k, beta=beta, log_score=log_score, saturated=saturated)


def _f(m, rho, gamma, p, delta):
    return expit(gamma + 0.5 * p * rho / (1.0 - rho * m - delta))


def _f_prime(m, rho, gamma, p, delta):
    fm = _f(m, rho, gamma, p, delta)
    return fm * (1.0 - fm) * 0.5 * p * rho**2 / (1.0 - rho * m - delta) ** 2


def univariate_fixed_points(
    rho: float, gamma: float, p: int, delta: float = 0.0
) -> list[tuple[float, bool]]:
    """All roots of f(m) = m in (0, 1), each tagged stable (f'(m) < 1) or not.

    Dense sign-change bracketing over 1e4 subintervals followed by bisection;
    f is smooth with at most three roots, so this is exhaustive.
    """
    if not 0.0 <= rho < 1.0 or not 0.0 <= delta < 1.0 or rho + delta >= 1.0:
        raise ValueError("need rho, delta in [0, 1) with rho + delta < 1")
    grid = np.linspace(M_CLIP, 1.0 - M_CLIP, _BRACKETS + 1)
    g = _f(grid, rho, gamma, p, delta) - grid
    roots: list[tuple[float, bool]] = []
    for lo, hi, g_lo, g_hi in zip(grid[:-1], grid[1:], g[:-1], g[1:]):
        if g_lo == 0.0:
            roots.append((float(lo), _f_prime(lo, rho, gamma, p, delta) < 1.0))
            continue
        if g_lo * g_hi < 0.0:
            a, fb = lo, hi
            for _ in range(200):
                mid = 0.5 * (a + fb)
                if fb - a < 1e-12:
                    break
                if (_f(mid, rho, gamma, p, delta) - mid) * g_lo > 0:
                    a = mid
                else:
                    fb = mid
            root = 0.5 * (a + fb)
            roots.append((float(root), _f_prime(root, rho, gamma, p, delta) < 1.0))
    if g[-1] == 0.0:
        roots.append((float(grid[-1]), _f_prime(grid[-1], rho, gamma, p, delta) < 1.0))
    # f(m) - m is negative at 1 and positive at 0 in exact arithmetic, so a
    # nonzero boundary sign means a root sits closer to 0 or 1 than float
    # resolution; report it at the clipped boundary (always stable there)
    if g[-1] > 0.0:
        roots.append((float(grid[-1]), True))
    if g[0] < 0.0:
        roots.insert(0, (float(grid[0]), True))
    return roots


def univariate_free_energy(m: float, rho: float, gamma: float, p: int,
                           delta: float = 0.0) -> float:
    """Single-feature restriction of the free energy, up to an m-independent
    constant: -gamma m + H(m) + (p/2) log(1 - rho m - delta)."""
    ent = m * np.log(m) + (1.0 - m) * np.log(1.0 - m) if 0.0 < m < 1.0 else 0.0
    return float(-gamma * m + ent + 0.5 * p * np.log(1.0 - rho * m - delta))


def rho_star(p: int, delta: float = 0.0) -> float:
    """Smallest squared correlation at which two stable roots can coexist."""
    return 4.0 / p * (1.0 - delta) * (np.sqrt(1.0 + 0.5 * p) - 1.0)


def bistable_gamma_range(rho: float, p: int, delta: float = 0.0) -> tuple[float, float]:
    """(gamma_2, gamma_1) with gamma_2 < gamma_1 bounding the two-solution band.

    From the tangency condition f(m) = m, f'(m) = 1: the quadratic
    a m^2 - b m + (1-delta)^2 = 0 with a = (1 + p/2) rho^2 and
    b = 2 rho (1-delta) + (p/2) rho^2 gives the tangency points m_1 < m_2,
    and gamma_i = logit(m_i) - (p/2) rho / (1 - rho m_i - delta).
    """
    a = (1.0 + 0.5 * p) * rho**2
    bq = 2.0 * rho * (1.0 - delta) + 0.5 * p * rho**2
    disc = bq**2 - 4.0 * a * (1.0 - delta) ** 2
    # at rho = rho* the discriminant is zero up to roundoff and the band
    # collapses to a single tangency point (gamma_2 = gamma_1)
    if disc < -1e-12 * bq**2:
        raise ValueError(
            f"no bistable band: rho={rho} is not above rho*={rho_star(p, delta):.6g}"
        )
    sqrt_d = np.sqrt(max(disc, 0.0))
    gammas = []
    for m_i in ((bq - sqrt_d) / (2.0 * a), (bq + sqrt_d) / (2.0 * a)):
        gammas.append(
            float(np.log(m_i / (1.0 - m_i)) - 0.5 * p * rho / (1.0 - rho * m_i - delta))
        )
    return min(gammas), max(gammas)


def gamma_star(p: int, delta: float = 0.0) -> float:
    """Large-p approximation of the critical sparsity log-odds."""
    return -np.sqrt(2.0 * p) * (1.0 - delta)


@dataclass(frozen=True)
class PhaseDiagram:
    rho_grid: np.ndarray
    gamma_grid: np.ndarray
    labels: np.ndarray  # (len(rho), len(gamma)) of {unique-low, unique-high, bistable}
    rho_star_exact: float
    rho_star_approx: float
    gamma_star: float
    half_line: np.ndarray      # gamma at which m = 1/2 (for rho < rho*), else nan
    gamma_upper: np.ndarray    # gamma_1(rho) for rho > rho*, else nan
    gamma_lower: np.ndarray    # gamma_2(rho) for rho > rho*, else nan
    exact_line: np.ndarray     # gamma = -p rho / 2

    def to_table(self) -> str:
        buf = io.StringIO()
        buf.write(
            f"# rho_star_exact={self.rho_star_exact:.10g}"
            f" rho_star_approx={self.rho_star_approx:.10g}"
            f" gamma_star={self.gamma_star:.10g}\n"
        )
        buf.write("# rho\tgamma\tlabel\n")
        for i, r in enumerate(self.rho_grid):
            for j, g in enumerate(self.gamma_grid):
                buf.write(f"{r:.10g}\t{g:.10g}\t{self.labels[i, j]}\n")
        return buf.getvalue()

    def boundaries_table(self) -> str:
        buf = io.StringIO()
        buf.write("# rho\tgamma_half\tgamma_lower\tgamma_upper\tgamma_exact\n")
        for i, r in enumerate(self.rho_grid):
            buf.write(
                f"{r:.10g}\t{self.half_line[i]:.10g}\t{self.gamma_lower[i]:.10g}"
                f"\t{self.gamma_upper[i]:.10g}\t{self.exact_line[i]:.10g}\n"
            )
        return buf.getvalue()


def phase_diagram(
    p: int, rho_grid: np.ndarray, gamma_grid: np.ndarray, delta: float = 0.0
) -> PhaseDiagram:
    """Classify each (rho, gamma) cell by its fixed-point root structure."""
    rho_grid = np.asarray(rho_grid, dtype=float)
    gamma_grid = np.asarray(gamma_grid, dtype=float)
    labels = np.empty((rho_grid.size, gamma_grid.size), dtype=object)
    for i, r in enumerate(rho_grid):
        for j, g in enumerate(gamma_grid):
            roots = univariate_fixed_points(r, g, p, delta)
            if len(roots) >= 3:
                labels[i, j] = "bistable"
            else:
                m = roots[0][0] if roots else 0.0
                labels[i, j] = "unique-high" if m > 0.5 else "unique-low"
    rs = rho_star(p, delta)
    half = np.full(rho_grid.size, np.nan)
    g_up = np.full(rho_grid.size, np.nan)
    g_lo = np.full(rho_grid.size, np.nan)
    for i, r in enumerate(rho_grid):
        if r <= 0.0:
            continue
        if r < rs:
            # gamma making m = 1/2 a fixed point: transition line in the unique regime
            half[i] = -0.5 * p * r / (1.0 - 0.5 * r - delta)
        else:
            try:
                g_lo[i], g_up[i] = bistable_gamma_range(r, p, delta)
            except ValueError:
                pass
    return PhaseDiagram(
        rho_grid=rho_grid, gamma_grid=gamma_grid, labels=labels,
        rho_star_exact=rs, rho_star_approx=2.0 * np.sqrt(2.0 / p),
        gamma_star=gamma_star(p, delta),
        half_line=half, gamma_upper=g_up, gamma_lower=g_lo,
        exact_line=-0.5 * p * rho_grid,
    )


def univariate_shrinkage_curves(
    w_grid: np.ndarray,
    gamma_vg: float = -10.0,
    p: int = 100,
    sigma_y2: float = 1.0,
    lambda_ridge: float = 0.5,
    gamma_lasso: float = 0.5,
    gamma_garrote: float = 0.25,
) -> dict[str, np.ndarray]:
    """Estimated-vs-true coefficient curves for the classic univariate setup
    y = w x + noise (unit input variance, noise variance sigma_y2).

    Returns columns w, ols, ridge, lasso, garrote, vg; the VG column uses
    m w with m the lowest-free-energy fixed-point root at
    rho = w^2 / (w^2 + sigma_y2).
    """
    w_grid = np.asarray(w_grid, dtype=float)
    ols = w_grid.copy()
    ridge = lambda_ridge * w_grid
    lasso = np.maximum(w_grid - gamma_lasso, 0.0)
    with np.errstate(divide="ignore"):
        garrote = np.where(
            w_grid > 0, np.maximum(1.0 - gamma_garrote / np.where(w_grid > 0, w_grid, 1.0) ** 2, 0.0) * w_grid, 0.0
        )
    vg = np.zeros_like(w_grid)
    for i, w in enumerate(w_grid):
        if w == 0.0:
            continue
        rho = w**2 / (w**2 + sigma_y2)
        roots = univariate_fixed_points(rho, gamma_vg, p)
        stable = [m for m, ok in roots if ok] or [m for m, _ in roots]
        best = min(stable, key=lambda m: univariate_free_energy(m, rho, gamma_vg, p))
        vg[i] = best * w
    return {
        "w": w_grid, "ols": ols, "ridge": ridge,
        "lasso": lasso, "garrote": garrote, "vg": vg,
    }


def shrinkage_table(curves: dict[str, np.ndarray]) -> str:
    cols = list(curves)
    buf = io.StringIO()
    buf.write("# " + "\t".join(cols) + "\n")
    for row in zip(*(curves[c] for c in cols)):
        buf.write("\t".join(f"{v:.10g}" for v in row) + "\n")
    return buf.getvalue()
