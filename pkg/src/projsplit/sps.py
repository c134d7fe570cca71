"""Stochastic projective splitting: separating-hyperplane machinery, stepsize
schedules, residuals, and the run loops (plain and memory-saving).

The primal-dual iterate lives in the subspace where the dual blocks sum to
zero; every update moves along the hyperplane gradient, so the iterates stay
in that subspace up to roundoff.
"""

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DivergenceError, InvalidParameterError, ShapeError

DIVERGENCE_NORM_CAP = 1e12

# Exponent pair used in the decay schedule when none is given.
DEFAULT_DECAY_EXPONENTS = (0.51, 0.25)


@dataclass
class ExtendedPoint:
    """Primal iterate z plus the n+1 dual blocks, stacked as rows of w."""

    z: np.ndarray
    w: np.ndarray

    def copy(self):
        return ExtendedPoint(self.z.copy(), self.w.copy())

    @property
    def dim(self):
        return self.z.shape[0]

    @property
    def n_duals(self):
        return self.w.shape[0]

    def subspace_gap(self):
        """Norm of the dual-block sum; zero exactly on the solver subspace."""
        return float(np.linalg.norm(self.w.sum(axis=0)))

    def in_subspace(self, tol=1e-8):
        row_norms = np.linalg.norm(self.w, axis=1)
        biggest = float(row_norms.max()) if row_norms.size else 0.0
        return self.subspace_gap() <= tol * (1.0 + biggest)


@dataclass
class OperatorPairSet:
    """Graph points (x_i, y_i) with y_i in A_i(x_i) for i < n; the last row
    holds the forward-step probe for the Lipschitz term."""

    x: np.ndarray  # (n+1, d)
    y: np.ndarray  # (n+1, d)

    @property
    def n_ops(self):
        return self.x.shape[0] - 1


@dataclass(frozen=True)
class TraceRecord:
    """One benchmark row: residuals of the iterate after `iteration` steps."""

    solver: str
    seed: int
    iteration: int
    wall_time_s: float
    residual_R: float
    residual_O: Optional[float] = None

    def __post_init__(self):
        if self.residual_R < 0 or (self.residual_O is not None and self.residual_O < 0):
            raise InvalidParameterError("residuals must be nonnegative")


@dataclass
class RunResult:
    """Full trace of a run plus its final state."""

    label: str
    seed: int
    trace: list
    z: np.ndarray
    point: Optional[ExtendedPoint] = None
    iterations: int = 0
    storage_elements: Optional[int] = None


def validate_decay_exponents(alpha_exp, rho_exp):
    """Reject exponent pairs that violate the summability conditions.

    With alpha_k ~ k^-a and rho_k ~ k^-r, almost-sure convergence needs
    sum alpha^2 < inf (a > 1/2), sum alpha*rho = inf (a + r <= 1) and
    sum alpha*rho^2 < inf (a + 2r > 1); a is capped at 1.
    """
    a, r = alpha_exp, rho_exp
    if not (0.5 < a <= 1.0):
        raise InvalidParameterError(f"alpha exponent must lie in (0.5, 1], got {a}")
    if r < 0:
        raise InvalidParameterError(f"rho exponent must be nonnegative, got {r}")
    if a + r > 1.0:
        raise InvalidParameterError(
            f"exponents ({a}, {r}) make the step products summable (need a + r <= 1)"
        )
    if a + 2 * r <= 1.0:
        raise InvalidParameterError(
            f"exponents ({a}, {r}) leave alpha*rho^2 non-summable (need a + 2r > 1)"
        )


def schedule_decay(c_d, k, alpha_exp=DEFAULT_DECAY_EXPONENTS[0], rho_exp=DEFAULT_DECAY_EXPONENTS[1]):
    """Decaying stepsizes (alpha_k, rho_k) = (C_d k^-a, C_d k^-r)."""
    if c_d <= 0:
        raise InvalidParameterError(f"c_d must be positive, got {c_d}")
    if k < 1:
        raise InvalidParameterError(f"iteration index must be >= 1, got {k}")
    return c_d * k ** (-alpha_exp), c_d * k ** (-rho_exp)


def schedule_fixed(c_f, horizon, lipschitz, k=1):
    """Constant stepsizes for a fixed budget: rho = min(K^-1/4, 1/(2L)), alpha = C_f rho^2."""
    if c_f <= 0:
        raise InvalidParameterError(f"c_f must be positive, got {c_f}")
    if horizon < 1:
        raise InvalidParameterError(f"horizon must be >= 1, got {horizon}")
    if lipschitz <= 0:
        raise InvalidParameterError(f"lipschitz must be positive, got {lipschitz}")
    rho = min(horizon ** (-0.25), 1.0 / (2.0 * lipschitz))
    return c_f * rho * rho, rho


@dataclass(frozen=True)
class StepSchedule:
    """Deterministic stepsize sequence, decay or fixed, plus the resolvent stepsize tau."""

    kind: str
    tau: float = 1.0
    c_d: Optional[float] = None
    alpha_exp: float = DEFAULT_DECAY_EXPONENTS[0]
    rho_exp: float = DEFAULT_DECAY_EXPONENTS[1]
    c_f: Optional[float] = None
    horizon: Optional[int] = None
    lipschitz: Optional[float] = None

    @classmethod
    def decay(cls, c_d, alpha_exp=DEFAULT_DECAY_EXPONENTS[0], rho_exp=DEFAULT_DECAY_EXPONENTS[1], tau=1.0):
        if c_d <= 0:
            raise InvalidParameterError(f"c_d must be positive, got {c_d}")
        if tau <= 0:
            raise InvalidParameterError(f"tau must be positive, got {tau}")
        validate_decay_exponents(alpha_exp, rho_exp)
        return cls(kind="decay", tau=tau, c_d=c_d, alpha_exp=alpha_exp, rho_exp=rho_exp)

    @classmethod
    def fixed(cls, c_f, horizon, lipschitz, tau=1.0):
        if tau <= 0:
            raise InvalidParameterError(f"tau must be positive, got {tau}")
        # validates c_f / horizon / lipschitz
        schedule_fixed(c_f, horizon, lipschitz)
        return cls(kind="fixed", tau=tau, c_f=c_f, horizon=horizon, lipschitz=lipschitz)

    def stepsizes(self, k):
        if self.kind == "decay":
            return schedule_decay(self.c_d, k, self.alpha_exp, self.rho_exp)
        if self.kind == "fixed":
            return schedule_fixed(self.c_f, self.horizon, self.lipschitz, k)
        raise InvalidParameterError(f"unknown schedule kind {self.kind!r}")


def graph_pair(op, tau, z, w_i):
    """Resolvent step producing (x, y) with y in A(x): t = z + tau*w, x = J(tau, t)."""
    t = z + tau * w_i
    x = op.resolvent(tau, t)
    y = (t - x) / tau
    return x, y


def initial_point(problem, rng):
    """Random primal start scaled to unit expected norm; dual blocks zero."""
    d = problem.dim
    z = rng.standard_normal(d) / np.sqrt(d)
    w = np.zeros((len(problem.operators) + 1, d))
    return ExtendedPoint(z, w)


def _check_finite(point, k, trace=None):
    biggest = max(
        float(np.abs(point.z).max(initial=0.0)),
        float(np.abs(point.w).max(initial=0.0)),
    )
    if not np.isfinite(biggest) or biggest > DIVERGENCE_NORM_CAP:
        raise DivergenceError(
            f"iterate exceeded {DIVERGENCE_NORM_CAP:g} or became non-finite at iteration {k}",
            last_finite_iteration=k - 1,
            partial_trace=trace,
        )


def sps_iterate(point, problem, schedule, k, rng):
    """One update of the stochastic splitting iteration.

    Resolvent steps produce graph pairs for each set-valued operator, two
    stochastic oracle calls probe the Lipschitz term, and the iterate moves by
    -alpha_k times the hyperplane gradient. The dual update is associated as
    (w - alpha*x) + alpha*mean(x) so the memory-saving runner reproduces it
    bit-for-bit.
    """
    alpha, rho = schedule.stepsizes(k)
    tau = schedule.tau
    z, w = point.z, point.w
    n = len(problem.operators)
    d = z.shape[0]
    if w.shape != (n + 1, d):
        raise ShapeError(f"dual block shape {w.shape} does not match ({n + 1}, {d})")

    x = np.empty((n + 1, d))
    y = np.empty((n + 1, d))
    xbar = np.zeros(d)
    ybar = np.zeros(d)
    for i, op in enumerate(problem.operators):
        xi, yi = graph_pair(op, tau, z, w[i])
        x[i] = xi
        y[i] = yi
        xbar += xi
        ybar += yi

    r = problem.field.stochastic_eval(z, rng)
    x[n] = z - rho * (r - w[n])
    y[n] = problem.field.stochastic_eval(x[n], rng)
    xbar += x[n]
    ybar += y[n]

    z_new = z - alpha * ybar
    corr = (alpha / (n + 1)) * xbar
    w_new = (w - alpha * x) + corr

    new_point = ExtendedPoint(z_new, w_new)
    _check_finite(new_point, k)
    return new_point, OperatorPairSet(x, y)


def hyperplane_eval(point, pairs):
    """Value of the affine separator: sum_i <z - x_i, y_i - w_i>."""
    z, w = point.z, point.w
    if pairs.x.shape != w.shape:
        raise ShapeError(f"pair shape {pairs.x.shape} does not match duals {w.shape}")
    total = 0.0
    for i in range(w.shape[0]):
        total += float(np.dot(z - pairs.x[i], pairs.y[i] - w[i]))
    return total


def hyperplane_gradient(pairs):
    """Gradient of the separator within the solver subspace.

    Primal block: sum of the y_i. Dual blocks: x_i minus the mean of the x_j,
    which telescopes to zero so the direction stays in the subspace.
    """
    m = pairs.x.shape[0]
    gz = pairs.y[0].copy()
    for i in range(1, m):
        gz += pairs.y[i]
    xmean = pairs.x.mean(axis=0)
    gw = pairs.x - xmean
    return ExtendedPoint(gz, gw)


def residual_O(point, pairs, exact_bz):
    """Full approximation residual; vanishes exactly on the extended solution set."""
    z, w = point.z, point.w
    n = w.shape[0] - 1
    total = 0.0
    for i in range(n):
        diff = pairs.y[i] - w[i]
        total += float(np.dot(diff, diff))
    for i in range(n):
        diff = z - pairs.x[i]
        total += float(np.dot(diff, diff))
    diff = exact_bz - w[n]
    total += float(np.dot(diff, diff))
    return total


def residual_R(z, pairs, exact_bz):
    """Dual-free residual: sum ||z - x_i||^2 plus ||B(z) + sum y_i||^2 over i <= n."""
    n = pairs.x.shape[0] - 1
    total = 0.0
    for i in range(n):
        diff = z - pairs.x[i]
        total += float(np.dot(diff, diff))
    ysum = np.zeros_like(z)
    for i in range(n):
        ysum += pairs.y[i]
    v = exact_bz + ysum
    total += float(np.dot(v, v))
    return total


def residuals_from_state(problem, z, w, tau):
    """(R, O) of a state, recomputing the resolvent pairs and the exact field.

    This is the single code path every runner uses for traced rows, so plain
    and compact runs report bit-identical residuals. It touches only a clone
    of the solver state and is kept off the timing clock.
    """
    n = len(problem.operators)
    d = z.shape[0]
    x = np.empty((n + 1, d))
    y = np.empty((n + 1, d))
    for i, op in enumerate(problem.operators):
        x[i], y[i] = graph_pair(op, tau, z, w[i])
    x[n] = z  # placeholder; the forward probe does not enter either residual
    y[n] = 0.0
    pairs = OperatorPairSet(x, y)
    bz = problem.field.eval(z)
    point = ExtendedPoint(z, w)
    return residual_R(z, pairs, bz), residual_O(point, pairs, bz)


def trace_iterations(iterations, trace_every):
    """Sorted iteration counts at which a trace row is recorded."""
    if trace_every < 1:
        raise InvalidParameterError(f"trace_every must be >= 1, got {trace_every}")
    ks = {1, iterations}
    ks.update(range(trace_every, iterations + 1, trace_every))
    return sorted(ks)


def run_sps(problem, schedule, iterations, seed, trace_every=10, label="sps",
            observer=None, start=None):
    """Run the stochastic splitting loop and trace residuals.

    Residual rows use the deterministic field and are excluded from the
    reported wall time. observer(k, point) is called after every update with
    a live view of the state; copy before storing.
    """
    if iterations < 1:
        raise InvalidParameterError(f"iterations must be >= 1, got {iterations}")
    rng = np.random.default_rng(seed)
    point = start.copy() if start is not None else initial_point(problem, rng)
    cadence = set(trace_iterations(iterations, trace_every))
    trace = []
    elapsed = 0.0
    for k in range(1, iterations + 1):
        t0 = time.perf_counter()
        try:
            point, _ = sps_iterate(point, problem, schedule, k, rng)
        except DivergenceError as err:
            err.partial_trace = trace
            raise
        elapsed += time.perf_counter() - t0
        if observer is not None:
            observer(k, point)
        if k in cadence:
            r_val, o_val = residuals_from_state(problem, point.z, point.w, schedule.tau)
            trace.append(TraceRecord(label, seed, k, elapsed, r_val, o_val))
    return RunResult(label=label, seed=seed, trace=trace, z=point.z.copy(),
                     point=point, iterations=iterations)


def compact_working_elements(n_ops, dim):
    """Peak working floats of the memory-saving runner: (n + 7) * d.

    Persistent buffers: z, the n+1 dual rows, and the two accumulators
    (n + 4 vectors); the hot loop holds at most three temporaries (t, x, y or
    the probe triple) at once.
    """
    return (n_ops + 7) * dim


def run_sps_compact(problem, schedule, iterations, seed, trace_every=10,
                    label="sps", observer=None, start=None):
    """Memory-saving variant of run_sps producing bit-identical iterates.

    Dual variables are partially updated as each graph pair is produced and
    completed with the accumulated mean afterwards, so pairs are never stored.
    """
    if iterations < 1:
        raise InvalidParameterError(f"iterations must be >= 1, got {iterations}")
    rng = np.random.default_rng(seed)
    n = len(problem.operators)
    d = problem.dim
    if start is not None:
        z = start.z.copy()
        w = start.w.copy()
    else:
        p0 = initial_point(problem, rng)
        z, w = p0.z, p0.w
    xbar = np.zeros(d)
    ybar = np.zeros(d)
    tau = schedule.tau
    cadence = set(trace_iterations(iterations, trace_every))
    trace = []
    elapsed = 0.0
    for k in range(1, iterations + 1):
        alpha, rho = schedule.stepsizes(k)
        t0 = time.perf_counter()
        xbar[:] = 0.0
        ybar[:] = 0.0
        for i, op in enumerate(problem.operators):
            # t, x, y are the only live temporaries in this block
            x, y = graph_pair(op, tau, z, w[i])
            w[i] -= alpha * x
            xbar += x
            ybar += y
        r = problem.field.stochastic_eval(z, rng)
        x = z - rho * (r - w[n])
        y = problem.field.stochastic_eval(x, rng)
        w[n] -= alpha * x
        xbar += x
        ybar += y
        z -= alpha * ybar
        w += (alpha / (n + 1)) * xbar
        elapsed += time.perf_counter() - t0

        point_view = ExtendedPoint(z, w)
        _check_finite(point_view, k, trace)
        if observer is not None:
            observer(k, point_view)
        if k in cadence:
            r_val, o_val = residuals_from_state(problem, z, w, tau)
            trace.append(TraceRecord(label, seed, k, elapsed, r_val, o_val))
    return RunResult(label=label, seed=seed, trace=trace, z=z.copy(),
                     point=ExtendedPoint(z, w), iterations=iterations,
                     storage_elements=compact_working_elements(n, d))
