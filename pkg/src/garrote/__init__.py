"""Variational Garrote sparse linear regression toolkit."""

from .baselines import BaselineSolution, baseline_cv, lasso_fit, ridge_fit
from .data import (
    CenteredDataset,
    DataError,
    Dataset,
    SufficientStats,
    center,
    load_dataset,
    save_dataset,
    split,
    sufficient_stats,
)
from .dual import dual_matrix, dual_solve, solve_dual
from .generate import (
    Covariance,
    GeneratedInstance,
    InstanceSpec,
    gen_instance,
    gen_zhao,
)
from .metrics import EvalReport, l1_error, mse, nonzero_count, roc_auc, solution_vector
from .orthogonal import (
    OrthogonalSolution,
    bistable_gamma_range,
    exact_map_orthogonal,
    gamma_star,
    phase_diagram,
    rho_star,
    univariate_fixed_points,
    univariate_shrinkage_curves,
)
from .path import GammaPath, GammaSchedule, default_schedule, fit, gamma_min, run_path
from .solver import (
    SolveOptions,
    VgSolution,
    beta_update,
    free_energy,
    free_energy_grad,
    m_proposal,
    predict,
    solve_primal,
    w_update,
)

__version__ = "0.1.0"
