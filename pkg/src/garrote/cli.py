"""Command-line interface.

Subcommands: fit, gen, sweep, phase, bench.  All outputs are plain delimited
text with a commented reproducibility header (resolved configuration + seed);
matplotlib figures are rendered next to each table unless --no-figures.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench
from .data import DataError, Dataset, center, load_dataset, save_dataset, split, sufficient_stats
from .generate import InstanceSpec, example1_spec, example2_spec, gen_instance, gen_zhao
from .metrics import mse, nonzero_count
from .orthogonal import phase_diagram, shrinkage_table, univariate_shrinkage_curves
from .path import DEFAULT_EPSILON, GammaSchedule, default_schedule, fit
from .solver import SolveOptions, predict

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _header(args: argparse.Namespace, extra: dict | None = None) -> str:
    pairs = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    if extra:
        pairs.update(extra)
    return "".join(f"# {k}={v}\n" for k, v in pairs.items())


def _write(path: Path, header: str, body: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(header + body)


def _solve_options(args) -> SolveOptions:
    return SolveOptions(tol=args.tol, max_iter=args.max_iter)


def _schedule(args, train: Dataset) -> GammaSchedule | None:
    if args.gamma_min is None and args.gamma_max is None and args.gamma_step is None:
        return None
    centered = center(train)
    stats = sufficient_stats(centered)
    base = default_schedule(stats, args.epsilon)
    return GammaSchedule(
        gamma_min=args.gamma_min if args.gamma_min is not None else base.gamma_min,
        gamma_max=args.gamma_max if args.gamma_max is not None else base.gamma_max,
        delta_gamma=args.gamma_step if args.gamma_step is not None else base.delta_gamma,
        epsilon=args.epsilon,
    )


def cmd_fit(args) -> int:
    train = load_dataset(args.input)
    if args.val_input:
        val = load_dataset(args.val_input)
    else:
        p_val = max(2, int(round(args.val_fraction * train.p)))
        train, val, _ = split(train, train.p - p_val, p_val, 0, args.seed)
    opts = _solve_options(args)
    best, path, centered = fit(
        train, val, opts=opts, epsilon=args.epsilon,
        schedule=_schedule(args, train), solver=args.solver,
    )
    out = Path(args.output_dir)
    header = _header(args)
    _write(out / "gamma_path.tsv", header, path.to_table())
    (out / "solution.json").write_text(best.to_json())
    train_mse = mse(predict(best, train.x, centered.x_mean, centered.y_mean), train.y)
    val_mse = mse(predict(best, val.x, centered.x_mean, centered.y_mean), val.y)
    report = (
        "# gamma\tbeta\tnonzero\ttrain_mse\tval_mse\tconverged\n"
        f"{best.gamma:.10g}\t{best.beta:.10g}\t{nonzero_count(best)}"
        f"\t{train_mse:.10g}\t{val_mse:.10g}\t{best.converged}\n"
    )
    _write(out / "report.tsv", header, report)
    if not args.no_figures:
        from . import report as fig

        fig.path_figure(path, out / "gamma_path.png")
        fig.solution_figure(best.m * best.w, out / "solution.png")
    return EXIT_OK


def _spec_for(args) -> tuple:
    if args.config:
        spec = InstanceSpec.from_config(Path(args.config).read_text())
        return gen_instance(spec), spec
    if args.suite == "example1":
        spec = example1_spec(args.seed)
        return gen_instance(spec), spec
    if args.suite == "example2":
        spec = example2_spec(args.seed)
        return gen_instance(spec), spec
    if args.suite in ("zhao_a", "zhao_b"):
        inst = gen_zhao(args.suite[-1], p=1000, seed=args.seed)
        return inst, inst.spec
    raise UsageError(f"unknown generator suite: {args.suite}")


def cmd_gen(args) -> int:
    inst, spec = _spec_for(args)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_dataset(inst.train, out / "train.csv")
    save_dataset(inst.val, out / "val.csv")
    save_dataset(inst.test, out / "test.csv")
    (out / "instance.cfg").write_text(spec.to_config())
    np.savetxt(out / "w_true.csv", inst.w_true, header="w_true")
    return EXIT_OK


def cmd_phase(args) -> int:
    out = Path(args.output_dir)
    rho_grid = np.linspace(0.0, 0.99, args.grid_points)
    gamma_grid = np.linspace(args.gamma_min if args.gamma_min is not None else -50.0,
                             args.gamma_max if args.gamma_max is not None else 0.0,
                             args.grid_points)
    diagram = phase_diagram(args.p, rho_grid, gamma_grid)
    header = _header(args)
    _write(out / "phase_grid.tsv", header, diagram.to_table())
    _write(out / "phase_boundaries.tsv", header, diagram.boundaries_table())
    curves = univariate_shrinkage_curves(
        np.linspace(0.0, 3.0, 121), gamma_vg=-10.0, p=args.p, sigma_y2=1.0,
    )
    _write(out / "shrinkage.tsv", header, shrinkage_table(curves))
    if not args.no_figures:
        from . import report as fig

        fig.phase_figure(diagram, out / "phase.png")
        fig.shrinkage_figure(curves, out / "shrinkage.png")
    return EXIT_OK


def _run_bench(args) -> int:
    out = Path(args.output_dir)
    header = _header(args)
    suite = args.suite
    if suite not in bench.SUITES:
        raise UsageError(f"unknown suite: {suite} (choose from {', '.join(bench.SUITES)})")
    figures = not args.no_figures
    if suite in ("example1", "example2"):
        instances = args.instances or 20
        table, _ = bench.table_suite(suite, instances=instances, seed=args.seed,
                                     solver=args.solver, workers=args.workers)
        _write(out / f"{suite}.tsv", header, table)
    elif suite == "zhao":
        instances = args.instances or 100
        table, _ = bench.zhao_suite(instances=instances, seed=args.seed)
        _write(out / "zhao.tsv", header, table)
    elif suite == "noise_sweep":
        instances = args.instances or 5
        table, records = bench.noise_sweep_suite(instances=instances, seed=args.seed)
        _write(out / "noise_sweep.tsv", header, table)
        if figures:
            from . import report as fig

            fig.noise_sweep_figure(records, out / "noise_sweep.png")
    elif suite == "sample_sweep":
        instances = args.instances or 5
        table, records = bench.sample_sweep_suite(instances=instances, seed=args.seed)
        _write(out / "sample_sweep.tsv", header, table)
        if figures:
            from . import report as fig

            fig.sample_sweep_figure(records, out / "sample_sweep.png")
    elif suite == "dim_scaling":
        instances = args.instances or 3
        table, records = bench.dim_scaling_suite(instances=instances, seed=args.seed)
        _write(out / "dim_scaling.tsv", header, table)
        if figures:
            from . import report as fig

            fig.scaling_figure(records, out / "dim_scaling.png")
    return EXIT_OK


def cmd_bench(args) -> int:
    return _run_bench(args)


def cmd_sweep(args) -> int:
    if args.suite not in ("noise_sweep", "sample_sweep", "dim_scaling"):
        raise UsageError("sweep suites: noise_sweep, sample_sweep, dim_scaling")
    return _run_bench(args)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output-dir", default="out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-figures", action="store_true")


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", choices=("auto", "primal", "dual"), default="auto")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--gamma-min", type=float, default=None)
    p.add_argument("--gamma-max", type=float, default=None)
    p.add_argument("--gamma-step", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", type=int, default=10000)


def build_parser() -> _Parser:
    parser = _Parser(prog="garrote", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one dataset and emit path/solution/report")
    p_fit.add_argument("--input", required=True)
    p_fit.add_argument("--val-input", default=None)
    p_fit.add_argument("--val-fraction", type=float, default=0.25)
    _add_common(p_fit)
    _add_solver(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_gen = sub.add_parser("gen", help="generate a synthetic instance")
    p_gen.add_argument("--config", default=None, help="InstanceSpec key=value file")
    p_gen.add_argument("--suite", default="example1",
                       choices=("example1", "example2", "zhao_a", "zhao_b"))
    _add_common(p_gen)
    p_gen.set_defaults(func=cmd_gen)

    p_phase = sub.add_parser("phase", help="phase diagram and shrinkage curves")
    p_phase.add_argument("--p", type=int, default=100)
    p_phase.add_argument("--grid-points", type=int, default=40)
    p_phase.add_argument("--gamma-min", type=float, default=None)
    p_phase.add_argument("--gamma-max", type=float, default=None)
    _add_common(p_phase)
    p_phase.set_defaults(func=cmd_phase)

    for name, func in (("bench", cmd_bench), ("sweep", cmd_sweep)):
        p_b = sub.add_parser(name, help="run a benchmark suite")
        p_b.add_argument("--suite", required=True)
        p_b.add_argument("--instances", type=int, default=None)
        p_b.add_argument("--workers", type=int, default=1)
        _add_common(p_b)
        _add_solver(p_b)
        p_b.set_defaults(func=func)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
