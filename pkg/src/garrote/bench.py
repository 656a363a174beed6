"""Benchmark suites: repeated synthetic instances evaluated with VG, ridge
and Lasso, aggregated as mean +/- sample standard deviation."""

from __future__ import annotations

import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import baseline_cv
from .data import center
from .generate import (
    GeneratedInstance,
    example1_spec,
    example2_spec,
    gen_instance,
    gen_zhao,
    random_support_spec,
)
from .metrics import l1_error, mse, nonzero_count, roc_auc, solution_vector
from .path import fit
from .solver import SolveOptions, predict

SUITES = ("example1", "example2", "zhao", "noise_sweep", "sample_sweep", "dim_scaling")


@dataclass
class MethodResult:
    method: str
    train_mse: float
    val_mse: float
    test_mse: float
    l1: float
    nonzero: int | None
    auc: float | None
    v: np.ndarray
    seconds: float


def _predict_linear(w, centered, x):
    return (x - centered.x_mean) @ w + centered.y_mean


def evaluate_instance(
    inst: GeneratedInstance,
    opts: SolveOptions = SolveOptions(),
    solver: str = "auto",
    methods: tuple[str, ...] = ("vg", "ridge", "lasso"),
) -> dict[str, MethodResult]:
    """Fit every method on one instance and collect all metrics."""
    results: dict[str, MethodResult] = {}
    w_true = inst.w_true
    has_both_classes = bool(np.any(w_true != 0)) and bool(np.any(w_true == 0))
    if "vg" in methods:
        t0 = time.perf_counter()
        best, _path, centered = fit(inst.train, inst.val, opts=opts, solver=solver)
        dt = time.perf_counter() - t0
        v = solution_vector(best)
        results["vg"] = MethodResult(
            method="vg",
            train_mse=mse(predict(best, inst.train.x, centered.x_mean, centered.y_mean), inst.train.y),
            val_mse=mse(predict(best, inst.val.x, centered.x_mean, centered.y_mean), inst.val.y),
            test_mse=mse(predict(best, inst.test.x, centered.x_mean, centered.y_mean), inst.test.y),
            l1=l1_error(v, w_true),
            nonzero=nonzero_count(best),
            auc=roc_auc(v, w_true) if has_both_classes else None,
            v=v,
            seconds=dt,
        )
    for method in ("ridge", "lasso"):
        if method not in methods:
            continue
        t0 = time.perf_counter()
        sol, _errs = baseline_cv(inst.train, inst.val, method)
        dt = time.perf_counter() - t0
        centered = center(inst.train)
        v = solution_vector(sol)
        results[method] = MethodResult(
            method=method,
            train_mse=mse(_predict_linear(sol.w, centered, inst.train.x), inst.train.y),
            val_mse=mse(_predict_linear(sol.w, centered, inst.val.x), inst.val.y),
            test_mse=mse(_predict_linear(sol.w, centered, inst.test.x), inst.test.y),
            l1=l1_error(v, w_true),
            nonzero=nonzero_count(sol),
            auc=roc_auc(v, w_true) if has_both_classes else None,
            v=v,
            seconds=dt,
        )
    return results


def _mean_std(values):
    arr = np.array([v for v in values if v is not None], dtype=float)
    if arr.size == 0:
        return float("nan"), float("nan")
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


def _fmt(pair):
    return f"{pair[0]:.2f} +/- {pair[1]:.2f}"


def _run_one(args):
    kind, seed, solver = args
    if kind == "example1":
        inst = gen_instance(example1_spec(seed))
    else:
        inst = gen_instance(example2_spec(seed))
    return evaluate_instance(inst, solver=solver)


def _parallel_map(func, jobs, workers: int):
    if workers <= 1:
        return [func(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs))  # order preserved: instance-index merge


def table_suite(
    suite: str, instances: int = 20, seed: int = 0, solver: str = "auto",
    workers: int = 1,
) -> tuple[str, list[dict[str, MethodResult]]]:
    """example1 / example2: the single-teacher tables."""
    jobs = [(suite, seed + i, solver) for i in range(instances)]
    per_instance = _parallel_map(_run_one, jobs, workers)
    buf = io.StringIO()
    buf.write("# method\ttrain_mse\tval_mse\ttest_mse\tnonzero\tl1_error\n")
    for method in ("ridge", "lasso", "vg"):
        rows = [r[method] for r in per_instance]
        nz = _mean_std([r.nonzero for r in rows]) if method != "ridge" else None
        buf.write(
            f"{method}\t{_fmt(_mean_std([r.train_mse for r in rows]))}"
            f"\t{_fmt(_mean_std([r.val_mse for r in rows]))}"
            f"\t{_fmt(_mean_std([r.test_mse for r in rows]))}"
            f"\t{'-' if nz is None else _fmt(nz)}"
            f"\t{_fmt(_mean_std([r.l1 for r in rows]))}\n"
        )
    return buf.getvalue(), per_instance


def zhao_suite(
    instances: int = 100, seed: int = 0, p: int = 1000, workers: int = 1,
) -> tuple[str, dict]:
    """Consistency comparison on the correlated three-feature examples."""
    records: dict[str, dict[str, list]] = {}
    for variant in ("a", "b"):
        per_method: dict[str, dict[str, list]] = {
            m: {"l1": [], "v3": []} for m in ("ridge", "lasso", "vg")
        }
        for i in range(instances):
            inst = gen_zhao(variant, p=p, seed=seed + i)
            res = evaluate_instance(inst)
            for m in per_method:
                per_method[m]["l1"].append(res[m].l1)
                per_method[m]["v3"].append(abs(res[m].v[2]))
        records[variant] = per_method
    buf = io.StringIO()
    buf.write("# variant\tmethod\tl1_error\tmax_abs_v3\n")
    for variant, per_method in records.items():
        for m, vals in per_method.items():
            buf.write(
                f"{variant}\t{m}\t{_fmt(_mean_std(vals['l1']))}"
                f"\t{max(vals['v3']):.2f}\n"
            )
    return buf.getvalue(), records


def noise_sweep_suite(
    instances: int = 5, seed: int = 0,
    noise_vars: tuple[float, ...] = (1e-4, 1e-2, 1e-1, 1.0, 10.0),
    zetas: tuple[float, ...] = (0.5, 0.95),
    n: int = 100, p: int = 100, p_val: int = 20, k_active: int = 20,
) -> tuple[str, list[dict]]:
    """Reconstruction error as a function of the teacher noise variance."""
    records = []
    for zeta in zetas:
        for nv in noise_vars:
            l1s = {"vg": [], "lasso": [], "ridge": []}
            for i in range(instances):
                spec = random_support_spec(
                    n=n, p=p, p_val=p_val, p_test=2, k_active=k_active,
                    noise_sd=float(np.sqrt(nv)), zeta=zeta, seed=seed + i,
                )
                res = evaluate_instance(gen_instance(spec))
                for m in l1s:
                    l1s[m].append(res[m].l1)
            records.append({"zeta": zeta, "noise_var": nv,
                            **{m: _mean_std(v) for m, v in l1s.items()}})
    buf = io.StringIO()
    buf.write("# zeta\tnoise_var\tl1_vg\tl1_lasso\tl1_ridge\n")
    for r in records:
        buf.write(
            f"{r['zeta']}\t{r['noise_var']:.6g}\t{_fmt(r['vg'])}"
            f"\t{_fmt(r['lasso'])}\t{_fmt(r['ridge'])}\n"
        )
    return buf.getvalue(), records


def sample_sweep_suite(
    instances: int = 5, seed: int = 0, n: int = 200,
    fractions: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8),
    sparsity: float = 0.1,
) -> tuple[str, list[dict]]:
    """Recovery quality as a function of the sample fraction p/n."""
    records = []
    k_active = max(1, int(round(sparsity * n)))
    for frac in fractions:
        p = max(10, int(round(frac * n)))
        p_val = max(5, p // 10)
        agg = {"vg": {"auc": [], "l1": [], "test": []},
               "lasso": {"auc": [], "l1": [], "test": []},
               "ridge": {"auc": [], "l1": [], "test": []}}
        for i in range(instances):
            spec = random_support_spec(
                n=n, p=p, p_val=p_val, p_test=200, k_active=k_active,
                noise_sd=1.0, zeta=0.0, seed=seed + i,
            )
            res = evaluate_instance(gen_instance(spec))
            for m in agg:
                agg[m]["auc"].append(res[m].auc)
                agg[m]["l1"].append(res[m].l1)
                agg[m]["test"].append(res[m].test_mse)
        records.append({"fraction": frac, "p": p,
                        **{m: {k: _mean_std(v) for k, v in d.items()}
                           for m, d in agg.items()}})
    buf = io.StringIO()
    buf.write("# p_over_n\tp\tauc_vg\tauc_lasso\tl1_vg\tl1_lasso\ttest_vg\ttest_lasso\n")
    for r in records:
        buf.write(
            f"{r['fraction']}\t{r['p']}\t{_fmt(r['vg']['auc'])}\t{_fmt(r['lasso']['auc'])}"
            f"\t{_fmt(r['vg']['l1'])}\t{_fmt(r['lasso']['l1'])}"
            f"\t{_fmt(r['vg']['test'])}\t{_fmt(r['lasso']['test'])}\n"
        )
    return buf.getvalue(), records


def dim_scaling_suite(
    instances: int = 3, seed: int = 0,
    dims: tuple[int, ...] = (200, 400, 800, 1600),
    p: int = 100, p_val: int = 100, k_active: int = 5,
    noise_sd: float = float(1.0 / np.sqrt(2.0)),
) -> tuple[str, list[dict]]:
    """Quality and wall-clock timing as the feature count grows at fixed p.

    VG runs through the dual solver here (n > p throughout)."""
    records = []
    for n in dims:
        agg = {"vg": {"l1": [], "nz": [], "sec": []},
               "lasso": {"l1": [], "nz": [], "sec": []}}
        for i in range(instances):
            spec = random_support_spec(
                n=n, p=p, p_val=p_val, p_test=2, k_active=k_active,
                noise_sd=noise_sd, zeta=0.0, seed=seed + i,
            )
            res = evaluate_instance(gen_instance(spec), solver="dual",
                                    methods=("vg", "lasso"))
            for m in agg:
                agg[m]["l1"].append(res[m].l1)
                agg[m]["nz"].append(res[m].nonzero)
                agg[m]["sec"].append(res[m].seconds)
        records.append({"n": n,
                        **{m: {k: _mean_std(v) for k, v in d.items()}
                           for m, d in agg.items()}})
    buf = io.StringIO()
    buf.write("# n\tl1_vg\tl1_lasso\tnz_vg\tnz_lasso\tsec_vg\tsec_lasso\n")
    for r in records:
        buf.write(
            f"{r['n']}\t{_fmt(r['vg']['l1'])}\t{_fmt(r['lasso']['l1'])}"
            f"\t{_fmt(r['vg']['nz'])}\t{_fmt(r['lasso']['nz'])}"
            f"\t{r['vg']['sec'][0]:.3f}\t{r['lasso']['sec'][0]:.3f}\n"
        )
    return buf.getvalue(), records
