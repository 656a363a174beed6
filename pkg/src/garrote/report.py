"""Figure rendering for the CLI report path.

Every figure is rendered next to the delimited table carrying the same data;
the tables remain the primary, diffable output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .orthogonal import PhaseDiagram
from .path import GammaPath

_LABEL_CODE = {"unique-low": 0, "bistable": 1, "unique-high": 2}


def path_figure(path: GammaPath, out_file) -> None:
    """Free energy (forward vs backward) and train/val error over the grid."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    f1 = [s.free_energy for s in path.forward]
    f2 = [s.free_energy for s in path.backward]
    ax1.plot(path.grid, f1, label="forward")
    ax1.plot(path.grid, f2, "--", label="backward")
    ax1.set_xlabel("gamma")
    ax1.set_ylabel("free energy")
    ax1.legend()
    ax2.plot(path.grid, path.train_error, label="train")
    ax2.plot(path.grid, path.val_error, label="validation")
    ax2.plot(path.grid[path.best_index], path.val_error[path.best_index], "k*",
             markersize=10, label="selected")
    ax2.set_xlabel("gamma")
    ax2.set_ylabel("MSE")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(out_file, dpi=150)
    plt.close(fig)


def solution_figure(v: np.ndarray, out_file, w_true: np.ndarray | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.stem(np.arange(1, v.size + 1), v, basefmt=" ")
    if w_true is not None:
        active = np.flatnonzero(w_true)
        ax.plot(active + 1, w_true[active], "rx", label="teacher")
        ax.legend()
    ax.set_xlabel("feature")
    ax.set_ylabel("coefficient m_i w_i")
    fig.tight_layout()
    fig.savefig(out_file, dpi=150)
    plt.close(fig)


def phase_figure(diagram: PhaseDiagram, out_file) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    codes = np.vectorize(_LABEL_CODE.get)(diagram.labels)
    ax.pcolormesh(
        diagram.rho_grid, diagram.gamma_grid, codes.T,
        cmap="coolwarm", shading="nearest", alpha=0.4,
    )
    ok = np.isfinite(diagram.half_line)
    ax.plot(diagram.rho_grid[ok], diagram.half_line[ok], "k-", label="m = 1/2 line")
    ok = np.isfinite(diagram.gamma_upper)
    ax.plot(diagram.rho_grid[ok], diagram.gamma_upper[ok], "k--", label="upper tangency")
    ax.plot(diagram.rho_grid[ok], diagram.gamma_lower[ok], "k-.", label="lower tangency")
    ax.plot(diagram.rho_grid, diagram.exact_line, "k:", label="exact switch")
    ax.axvline(diagram.rho_star_exact, color="gray", lw=0.8)
    ax.set_xlabel("rho")
    ax.set_ylabel("gamma")
    ax.set_ylim(float(diagram.gamma_grid.min()), float(diagram.gamma_grid.max()))
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_file, dpi=150)
    plt.close(fig)


def shrinkage_figure(curves: dict[str, np.ndarray], out_file) -> None:
    fig, ax = plt.subplots(figsize=(5, 4.5))
    w = curves["w"]
    for name in ("ols", "ridge", "lasso", "garrote", "vg"):
        ax.plot(w, curves[name], label=name)
    ax.set_xlabel("true coefficient")
    ax.set_ylabel("estimated coefficient")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_file, dpi=150)
    plt.close(fig)


def noise_sweep_figure(records: list[dict], out_file) -> None:
    zetas = sorted({r["zeta"] for r in records})
    fig, axes = plt.subplots(1, len(zetas), figsize=(4.5 * len(zetas), 3.5), squeeze=False)
    for ax, zeta in zip(axes[0], zetas):
        rows = [r for r in records if r["zeta"] == zeta]
        x = [r["noise_var"] for r in rows]
        for method in ("vg", "lasso", "ridge"):
            means = [r[method][0] for r in rows]
            errs = [r[method][1] for r in rows]
            ax.errorbar(x, means, yerr=errs, label=method, marker="o")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("noise variance")
        ax.set_ylabel("L1 reconstruction error")
        ax.set_title(f"zeta = {zeta}")
        ax.legend()
    fig.tight_layout()
    fig.savefig(out_file, dpi=150)
    plt.close(fig)


def scaling_figure(records: list[dict], out_file) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ns = [r["n"] for r in records]
    for method in ("vg", "lasso"):
        ax1.plot(ns, [r[method]["l1"][0] for r in records], marker="o", label=method)
        ax2.plot(ns, [r[method]["sec"][0] for r in records], marker="o", label=method)
    ax1.set_xlabel("features n")
    ax1.set_ylabel("L1 reconstruction error")
    ax1.legend()
    ax2.set_xlabel("features n")
    ax2.set_ylabel("seconds per fit")
    ax2.set_xscale("log")
    ax2.set_yscale("log")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(out_file, dpi=150)
    plt.close(fig)


def sample_sweep_figure(records: list[dict], out_file) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    x = [r["fraction"] for r in records]
    for method in ("vg", "lasso", "ridge"):
        ax1.plot(x, [r[method]["auc"][0] for r in records], marker="o", label=method)
        ax2.plot(x, [r[method]["l1"][0] for r in records], marker="o", label=method)
    ax1.set_xlabel("p / n")
    ax1.set_ylabel("ROC AUC")
    ax1.legend()
    ax2.set_xlabel("p / n")
    ax2.set_ylabel("L1 reconstruction error")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(out_file, dpi=150)
    plt.close(fig)
