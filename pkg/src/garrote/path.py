"""Annealed sparsity-level sweep with cross-validated selection.

The sparsity log-odds gamma is swept over a grid twice: a forward pass with
warm starts from the all-off solution, and a backward pass warm-started from
the forward terminus.  Hysteresis between the two passes is resolved per
gamma by picking the lower free energy, and the final model is the one with
minimal validation MSE.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .data import CenteredDataset, Dataset, SufficientStats, center, sufficient_stats
from .dual import solve_dual
from .solver import (
    DEGENERATE_RESIDUAL,
    SolveOptions,
    VgSolution,
    predict,
    solve_primal,
)

DEFAULT_EPSILON = 0.001


def logit(x: float) -> float:
    return float(np.log(x / (1.0 - x)))


def gamma_min(stats: SufficientStats, epsilon: float) -> float:
    """Largest gamma at which every activation starts at about epsilon.

    At m -> 0 the single-feature weight is w_i = b_i / chi_ii, so the
    activation update exponent is gamma + p b_i^2 / (2 chi_ii sigma_y^2).
    Per feature the threshold is therefore
    -p b_i^2 / (2 chi_ii sigma_y^2) + logit(eps); taking the minimum over
    features makes the bound hold for all of them.
    """
    if not 0.0 < epsilon < 0.5:
        raise ValueError("epsilon must be in (0, 0.5)")
    if stats.sigma_y2 <= 0:
        raise ValueError("sigma_y2 must be positive")
    chi_safe = np.where(stats.mask, stats.chi_diag, 1.0)
    data_term = stats.p * stats.b**2 / (2.0 * chi_safe * stats.sigma_y2)
    data_term = data_term[stats.mask]
    if data_term.size == 0 or np.max(data_term) == 0.0:
        return logit(epsilon)
    return float(np.min(-data_term)) + logit(epsilon)


@dataclass(frozen=True)
class GammaSchedule:
    gamma_min: float
    gamma_max: float
    delta_gamma: float
    epsilon: float = DEFAULT_EPSILON
    fallback: bool = False

    def __post_init__(self):
        if self.delta_gamma <= 0:
            raise ValueError("delta_gamma must be positive")
        if self.gamma_min >= self.gamma_max:
            raise ValueError("gamma_min must be below gamma_max")

    @property
    def grid(self) -> np.ndarray:
        n_steps = int(np.ceil((self.gamma_max - self.gamma_min) / self.delta_gamma - 1e-12))
        return self.gamma_min + self.delta_gamma * np.arange(n_steps + 1)


def default_schedule(stats: SufficientStats, epsilon: float = DEFAULT_EPSILON) -> GammaSchedule:
    """gamma_max = 0.02 gamma_min, step -0.02 gamma_min (49 interior steps)."""
    g_min = gamma_min(stats, epsilon)
    if g_min >= 0:
        return GammaSchedule(
            gamma_min=-20.0, gamma_max=0.0, delta_gamma=0.4,
            epsilon=epsilon, fallback=True,
        )
    return GammaSchedule(
        gamma_min=g_min, gamma_max=0.02 * g_min, delta_gamma=-0.02 * g_min,
        epsilon=epsilon,
    )


@dataclass(frozen=True)
class GammaPath:
    grid: np.ndarray
    forward: list[VgSolution]
    backward: list[VgSolution]
    selected: list[VgSolution]
    train_error: np.ndarray
    val_error: np.ndarray
    best_index: int

    @property
    def best(self) -> VgSolution:
        return self.selected[self.best_index]

    def to_table(self) -> str:
        """Delimited text: gamma, F_forward, F_backward, F_selected, train/val MSE."""
        buf = io.StringIO()
        buf.write("# gamma\tF_forward\tF_backward\tF_selected\ttrain_mse\tval_mse\n")
        for i, g in enumerate(self.grid):
            buf.write(
                f"{g:.10g}\t{self.forward[i].free_energy:.10g}"
                f"\t{self.backward[i].free_energy:.10g}"
                f"\t{self.selected[i].free_energy:.10g}"
                f"\t{self.train_error[i]:.10g}\t{self.val_error[i]:.10g}\n"
            )
        return buf.getvalue()


def _solve(solver, data, stats, gamma, m_init, opts):
    if solver == "primal":
        return solve_primal(stats, gamma, m_init, opts)
    return solve_dual(data, stats, gamma, m_init, opts)


def run_path(
    train: CenteredDataset,
    val: Dataset,
    schedule: GammaSchedule,
    opts: SolveOptions = SolveOptions(),
    solver: str = "auto",
    random_init_seed: int | None = None,
) -> GammaPath:
    """Forward and backward warm-started sweeps over the gamma grid.

    ``solver='auto'`` picks the primal path when n < p, otherwise the dual.
    Deterministic unless ``random_init_seed`` asks for a random initial m.
    """
    if solver not in ("auto", "primal", "dual"):
        raise ValueError(f"unknown solver: {solver}")
    if solver == "auto":
        solver = "primal" if train.n < train.p else "dual"
    stats = sufficient_stats(train, full_chi=(solver == "primal"))
    grid = schedule.grid

    if random_init_seed is not None:
        rng = np.random.default_rng(random_init_seed)
        m = rng.uniform(opts.m_clip, 1.0 - opts.m_clip, size=train.n)
    else:
        m = np.full(train.n, schedule.epsilon)

    forward: list[VgSolution] = []
    for g in grid:
        sol = _solve(solver, train, stats, g, m, opts)
        forward.append(sol)
        m = sol.m

    backward_rev: list[VgSolution] = []
    m = forward[-1].m
    for g in grid[::-1]:
        sol = _solve(solver, train, stats, g, m, opts)
        backward_rev.append(sol)
        m = sol.m
    backward = backward_rev[::-1]

    # A solution whose residual variance 1/beta is (numerically) zero is an
    # interpolating fit: its free energy is unbounded below through the
    # -(p/2) log(beta) term, so comparing F against a non-degenerate branch is
    # meaningless.  Such branches lose the per-gamma comparison outright.
    def _degenerate(s: VgSolution) -> bool:
        return s.beta_capped or (1.0 / s.beta) <= DEGENERATE_RESIDUAL * stats.sigma_y2

    def _pick(f: VgSolution, b: VgSolution) -> VgSolution:
        f_deg, b_deg = _degenerate(f), _degenerate(b)
        if f_deg != b_deg:
            return b if f_deg else f
        return f if f.free_energy <= b.free_energy else b

    selected = [_pick(f, b) for f, b in zip(forward, backward)]
    train_error = np.array([
        float(np.mean((predict(s, train.x_c + train.x_mean, train.x_mean, train.y_mean)
                       - (train.y_c + train.y_mean)) ** 2))
        for s in selected
    ])
    val_error = np.array([
        float(np.mean((predict(s, val.x, train.x_mean, train.y_mean) - val.y) ** 2))
        for s in selected
    ])
    # ties break toward larger gamma (later grid index)
    best_index = len(grid) - 1 - int(np.argmin(val_error[::-1]))
    return GammaPath(
        grid=grid, forward=forward, backward=backward, selected=selected,
        train_error=train_error, val_error=val_error, best_index=best_index,
    )


def fit(
    train: Dataset,
    val: Dataset,
    opts: SolveOptions = SolveOptions(),
    epsilon: float = DEFAULT_EPSILON,
    schedule: GammaSchedule | None = None,
    solver: str = "auto",
) -> tuple[VgSolution, GammaPath, CenteredDataset]:
    """End-to-end: center, stats, schedule, sweep; returns the CV-best solution.

    The centered training set is returned as well since its stored means are
    needed to predict on new data.
    """
    centered = center(train)
    if schedule is None:
        use_primal = (solver == "primal") or (solver == "auto" and train.n < train.p)
        stats = sufficient_stats(centered, full_chi=use_primal)
        schedule = default_schedule(stats, epsilon)
    gamma_path = run_path(centered, val, schedule, opts, solver=solver)
    return gamma_path.best, gamma_path, centered
