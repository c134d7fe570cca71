"""Command-line harness wiring problems, solvers, schedules, and I/O into
reproducible experiments.

Subcommands: solve (one solver), compare (several solvers into one CSV,
optionally with the convergence figure), bench (built-in correctness checks),
plot (re-render a figure from an existing trace CSV).
"""

import argparse
import sys

from .baselines import run_dseg, run_frb, run_ps, run_tseng
from .bench import run_all_checks
from .data_io import parse_libsvm, write_manifest, write_trace_csv
from .errors import (
    DivergenceError,
    InvalidParameterError,
    ManifestError,
    ParseError,
)
from .plotting import PlotSpec, render_convergence_plot
from .problems import DrslrProblem, make_bilinear_game, make_drslr_instance
from .sps import StepSchedule, run_sps

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIVERGED = 3

SPS_IDS = ("sps", "sps-decay", "sps-fixed")
ALL_SOLVER_IDS = SPS_IDS + ("ps", "tseng", "frb", "dseg")
STOCHASTIC_SOLVER_IDS = SPS_IDS + ("dseg",)

CONFIG_DEFAULTS = {
    "problem": "bilinear",
    "data": None,
    "delta": 1.0,
    "kappa": 1.0,
    "c": 1e-3,
    "dim_x": 1,
    "dim_y": 1,
    "scale": 1.0,
    "sigma": 0.0,
    "lipschitz": None,
    "schedule": {"kind": "decay", "cd": 1.0, "cf": 1.0},
    "tau": 1.0,
    "batch_size": 100,
    "iterations": 1000,
    "trace_every": 10,
    "seeds": list(range(10)),
    "out": None,
    "manifest": None,
    "plot": None,
    "solvers": [],
}


def full_config(partial):
    """Explicit configuration with every default filled in; this exact dict is
    what the manifest records."""
    config = {key: value for key, value in CONFIG_DEFAULTS.items()}
    config["schedule"] = dict(CONFIG_DEFAULTS["schedule"])
    for key, value in partial.items():
        if key == "schedule":
            config["schedule"].update(value)
        else:
            config[key] = value
    return config


def validate_config(config):
    if config["problem"] not in ("drslr", "bilinear"):
        raise InvalidParameterError(f"unknown problem {config['problem']!r}")
    if config["problem"] == "drslr" and not config["data"]:
        raise InvalidParameterError("drslr requires --data")
    if config["problem"] == "bilinear" and config["data"]:
        raise InvalidParameterError("bilinear is synthetic; do not pass --data")
    if config["iterations"] < 1:
        raise InvalidParameterError("iterations must be >= 1")
    if config["trace_every"] < 1:
        raise InvalidParameterError("trace-every must be >= 1")
    if config["batch_size"] < 1:
        raise InvalidParameterError("batch size must be >= 1")
    if not config["seeds"]:
        raise InvalidParameterError("at least one seed is required")
    for solver in config["solvers"]:
        if solver not in ALL_SOLVER_IDS:
            raise InvalidParameterError(f"unknown solver {solver!r}")
    if config["schedule"]["kind"] not in ("decay", "fixed"):
        raise InvalidParameterError(f"unknown schedule {config['schedule']['kind']!r}")


def build_problem(config):
    if config["problem"] == "bilinear":
        return make_bilinear_game(
            config["dim_x"], config["dim_y"], config["scale"], config["sigma"]
        )
    dataset = parse_libsvm(config["data"])
    drslr = DrslrProblem(
        dataset=dataset,
        delta=config["delta"],
        kappa=config["kappa"],
        l1_weight=config["c"],
    )
    return make_drslr_instance(
        drslr, batch_size=config["batch_size"], lipschitz=config["lipschitz"]
    )


def build_schedule(config, problem, kind=None):
    kind = kind or config["schedule"]["kind"]
    if kind == "decay":
        return StepSchedule.decay(config["schedule"]["cd"], tau=config["tau"])
    return StepSchedule.fixed(
        config["schedule"]["cf"],
        horizon=config["iterations"],
        lipschitz=problem.field.lipschitz_bound,
        tau=config["tau"],
    )


def _solver_label(solver_id, config):
    if solver_id == "sps":
        return f"sps-{config['schedule']['kind']}"
    return solver_id


def run_solver(solver_id, problem, config, seed):
    """Dispatch one (solver, seed) run and return its RunResult."""
    iters = config["iterations"]
    every = config["trace_every"]
    if solver_id in SPS_IDS:
        kind = {"sps-decay": "decay", "sps-fixed": "fixed"}.get(solver_id)
        schedule = build_schedule(config, problem, kind=kind)
        return run_sps(problem, schedule, iters, seed, trace_every=every,
                       label=_solver_label(solver_id, config))
    if solver_id == "ps":
        return run_ps(problem, iters, seed, tau=config["tau"], trace_every=every)
    if solver_id == "tseng":
        return run_tseng(problem, iters, seed, trace_every=every)
    if solver_id == "frb":
        return run_frb(problem, iters, seed, trace_every=every)
    if solver_id == "dseg":
        schedule = build_schedule(config, problem)
        return run_dseg(problem, schedule, iters, seed, trace_every=every)
    raise InvalidParameterError(f"unknown solver {solver_id!r}")


def run_config(config):
    """Run every (solver, seed) combination of a validated config.

    Stochastic solvers run all seeds; deterministic ones run the first seed
    only. Returns (records, results).
    """
    validate_config(config)
    problem = build_problem(config)
    records = []
    results = []
    for solver_id in config["solvers"]:
        seeds = config["seeds"] if solver_id in STOCHASTIC_SOLVER_IDS else config["seeds"][:1]
        for seed in seeds:
            result = run_solver(solver_id, problem, config, seed)
            results.append(result)
            records.extend(result.trace)
    return records, results


def _persist(config, records):
    if config["out"]:
        write_trace_csv(records, config["out"])
    manifest_path = config["manifest"]
    if manifest_path is None and config["out"]:
        manifest_path = str(config["out"]) + ".manifest.json"
        config = dict(config, manifest=manifest_path)
    if manifest_path:
        write_manifest(config, manifest_path)


def cmd_solve(config):
    config["solvers"] = [config["solvers"][0]]
    try:
        records, results = run_config(config)
    except DivergenceError as err:
        # persist whatever was traced before the blow-up
        _persist(config, err.partial_trace)
        print(f"diverged: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    _persist(config, records)
    final = results[-1].trace[-1]
    print(f"{final.solver} seed={final.seed} iterations={final.iteration} "
          f"residual_R={final.residual_R:.6e}")
    return EXIT_OK


def cmd_compare(config):
    if len(config["solvers"]) < 2:
        raise InvalidParameterError("compare needs at least two solvers")
    try:
        records, results = run_config(config)
    except DivergenceError as err:
        _persist(config, err.partial_trace)
        print(f"diverged: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    _persist(config, records)
    for result in results:
        final = result.trace[-1]
        print(f"{result.label} seed={result.seed} residual_R={final.residual_R:.6e}")
    if config["plot"]:
        render_convergence_plot(PlotSpec(input_csv=config["out"], output_path=config["plot"]))
        print(f"figure written to {config['plot']}")
    return EXIT_OK


def cmd_bench(_config):
    checks = run_all_checks()
    failed = [c for c in checks if not c.passed]
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status} {check.name} ({check.seconds:.2f}s): {check.detail}")
    if failed:
        print(f"{len(failed)} check(s) failed: " + ", ".join(c.name for c in failed),
              file=sys.stderr)
        return 1
    return EXIT_OK


def cmd_plot(args):
    spec = PlotSpec(
        input_csv=args.input,
        output_path=args.out,
        solvers=tuple(args.solvers.split(",")) if args.solvers else (),
        log_y=not args.no_log_y,
        marker_every=args.marker_every,
    )
    render_convergence_plot(spec)
    print(f"figure written to {args.out}")
    return EXIT_OK


def _add_problem_flags(parser):
    parser.add_argument("--problem", choices=("drslr", "bilinear"), default="bilinear")
    parser.add_argument("--data", default=None, help="LIBSVM file for drslr")
    parser.add_argument("--delta", type=float, default=CONFIG_DEFAULTS["delta"])
    parser.add_argument("--kappa", type=float, default=CONFIG_DEFAULTS["kappa"])
    parser.add_argument("--c", type=float, default=CONFIG_DEFAULTS["c"])
    parser.add_argument("--dim-x", type=int, default=1)
    parser.add_argument("--dim-y", type=int, default=1)
    parser.add_argument("--scale", type=float, default=1.0)
    parser.add_argument("--sigma", type=float, default=0.0,
                        help="oracle noise for the bilinear game")
    parser.add_argument("--lipschitz", type=float, default=None,
                        help="override the estimated Lipschitz bound")
    parser.add_argument("--schedule", choices=("decay", "fixed"), default="decay")
    parser.add_argument("--cd", type=float, default=1.0)
    parser.add_argument("--cf", type=float, default=1.0)
    parser.add_argument("--iters", type=int, default=1000)
    parser.add_argument("--tau", type=float, default=1.0)
    parser.add_argument("--batch", type=int, default=100)
    parser.add_argument("--trace-every", type=int, default=10)
    parser.add_argument("--out", required=True, help="trace CSV path")
    parser.add_argument("--manifest", default=None, help="manifest path (defaults next to --out)")


def _config_from_args(args, solvers, seeds):
    return full_config({
        "problem": args.problem,
        "data": args.data,
        "delta": args.delta,
        "kappa": args.kappa,
        "c": args.c,
        "dim_x": args.dim_x,
        "dim_y": args.dim_y,
        "scale": args.scale,
        "sigma": args.sigma,
        "lipschitz": args.lipschitz,
        "schedule": {"kind": args.schedule, "cd": args.cd, "cf": args.cf},
        "tau": args.tau,
        "batch_size": args.batch,
        "iterations": args.iters,
        "trace_every": args.trace_every,
        "seeds": seeds,
        "out": args.out,
        "manifest": args.manifest,
        "plot": getattr(args, "plot", None),
        "solvers": solvers,
    })


def build_parser():
    parser = argparse.ArgumentParser(
        prog="projsplit",
        description="Operator-splitting solvers for monotone inclusions with stochastic oracles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one solver and write its trace")
    solve.add_argument("--solver", choices=ALL_SOLVER_IDS, required=True)
    solve.add_argument("--seed", type=int, default=0)
    _add_problem_flags(solve)

    compare = sub.add_parser("compare", help="run several solvers into one CSV")
    compare.add_argument("--solvers", required=True,
                         help="comma-separated ids, e.g. sps-decay,sps-fixed,ps,tseng,frb")
    compare.add_argument("--seeds", default=",".join(str(s) for s in range(10)),
                         help="comma-separated seeds for stochastic solvers")
    compare.add_argument("--plot", default=None, help="also render the figure to this path")
    _add_problem_flags(compare)

    sub.add_parser("bench", help="run the built-in correctness checks")

    plot = sub.add_parser("plot", help="render a convergence figure from a trace CSV")
    plot.add_argument("--input", required=True, help="trace CSV")
    plot.add_argument("--out", required=True, help="output image (png or svg)")
    plot.add_argument("--solvers", default=None, help="comma-separated subset to plot")
    plot.add_argument("--marker-every", type=int, default=10)
    plot.add_argument("--no-log-y", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            config = _config_from_args(args, [args.solver], [args.seed])
            return cmd_solve(config)
        if args.command == "compare":
            solvers = [s for s in args.solvers.split(",") if s]
            seeds = [int(s) for s in args.seeds.split(",") if s]
            config = _config_from_args(args, solvers, seeds)
            return cmd_compare(config)
        if args.command == "bench":
            return cmd_bench(None)
        if args.command == "plot":
            return cmd_plot(args)
        parser.error(f"unknown command {args.command!r}")
    except (InvalidParameterError, ManifestError, ParseError, FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
