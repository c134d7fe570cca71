"""Convergence figures from trace CSVs: median residual versus wall time with
min-to-max vertical bars and +/-1 std horizontal bars for stochastic solvers.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .data_io import read_trace_csv
from .errors import InvalidParameterError

# solver ids whose runs are seed-dependent; single-seed CSVs of these get a
# plain curve plus a warning that spread bars are omitted
STOCHASTIC_PREFIXES = ("sps", "dseg")


@dataclass(frozen=True)
class PlotSpec:
    input_csv: str
    output_path: str
    solvers: tuple = ()
    log_y: bool = True
    marker_every: int = 10


@dataclass
class SolverSeries:
    """Per-solver aggregate keyed by trace iteration index, never by time."""

    solver: str
    n_seeds: int
    iterations: np.ndarray
    residual_median: np.ndarray
    residual_min: np.ndarray
    residual_max: np.ndarray
    time_mean: np.ndarray
    time_std: np.ndarray

    @property
    def stochastic(self):
        return self.n_seeds >= 2


def is_stochastic_id(solver):
    return any(solver.startswith(p) for p in STOCHASTIC_PREFIXES)


def aggregate_traces(records):
    """Group rows per solver, then per iteration index across seeds.

    Residual spread is min-to-max around the median; wall time aggregates to
    mean and sample standard deviation (ddof=1). Seeds are expected to share
    the trace cadence; iterations missing from some seed are dropped.
    """
    by_solver = {}
    for rec in records:
        by_solver.setdefault(rec.solver, []).append(rec)
    series = {}
    for solver, rows in by_solver.items():
        seeds = sorted({r.seed for r in rows})
        per_seed = {
            s: {r.iteration: r for r in rows if r.seed == s} for s in seeds
        }
        common = sorted(set.intersection(*(set(d) for d in per_seed.values())))
        med, lo, hi, tmean, tstd = [], [], [], [], []
        for k in common:
            residuals = np.array([per_seed[s][k].residual_R for s in seeds])
            times = np.array([per_seed[s][k].wall_time_s for s in seeds])
            med.append(float(np.median(residuals)))
            lo.append(float(residuals.min()))
            hi.append(float(residuals.max()))
            tmean.append(float(times.mean()))
            tstd.append(float(times.std(ddof=1)) if len(seeds) >= 2 else 0.0)
        series[solver] = SolverSeries(
            solver=solver,
            n_seeds=len(seeds),
            iterations=np.asarray(common),
            residual_median=np.asarray(med),
            residual_min=np.asarray(lo),
            residual_max=np.asarray(hi),
            time_mean=np.asarray(tmean),
            time_std=np.asarray(tstd),
        )
    return series


def render_convergence_plot(spec):
    """Render the figure described by spec and return the output path."""
    records = read_trace_csv(spec.input_csv)
    if not records:
        raise InvalidParameterError(f"no trace rows in {spec.input_csv}")
    series = aggregate_traces(records)
    wanted = tuple(spec.solvers) if spec.solvers else tuple(sorted(series))
    missing = [s for s in wanted if s not in series]
    if missing:
        raise InvalidParameterError(
            f"solvers {missing} not present in {spec.input_csv}; have {sorted(series)}"
        )

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for solver in wanted:
        agg = series[solver]
        if agg.stochastic:
            yerr = np.vstack(
                (agg.residual_median - agg.residual_min, agg.residual_max - agg.residual_median)
            )
            ax.errorbar(
                agg.time_mean,
                agg.residual_median,
                yerr=yerr,
                xerr=agg.time_std,
                marker="o",
                markersize=3,
                markevery=spec.marker_every,
                errorevery=spec.marker_every,
                capsize=2,
                linewidth=1.2,
                label=solver,
            )
        else:
            if is_stochastic_id(solver):
                warnings.warn(
                    f"solver {solver!r} has fewer than 2 seeds; spread bars omitted"
                )
            ax.plot(
                agg.time_mean,
                agg.residual_median,
                marker="o",
                markersize=3,
                markevery=spec.marker_every,
                linewidth=1.2,
                label=solver,
            )
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel("wall time (s)")
    ax.set_ylabel("approximation residual")
    ax.legend()
    fig.tight_layout()
    if str(spec.output_path).endswith(".svg"):
        plt.rcParams["svg.hashsalt"] = "projsplit"
        fig.savefig(spec.output_path, metadata={"Date": None})
    else:
        fig.savefig(spec.output_path, dpi=120, metadata={"Software": "projsplit"})
    plt.close(fig)
    return spec.output_path
