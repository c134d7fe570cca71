"""Deterministic comparison solvers on the product-space reformulation, plus
standalone DSEG and a GDA divergence demonstration.

The product variable q stacks the dual blocks w_1..w_n and the primal z as
rows of an (n+1, d) array. The governing operator splits as a maximal
monotone part (inverse resolvents blockwise, identity on z) plus a monotone
Lipschitz part (a skew coupling plus the field on the z block).
"""

import time

import numpy as np

from .errors import DivergenceError, InvalidParameterError, ShapeError, StalledLinesearchError
from .operators import inverse_resolvent_via_moreau
from .sps import (
    DIVERGENCE_NORM_CAP,
    ExtendedPoint,
    OperatorPairSet,
    RunResult,
    TraceRecord,
    graph_pair,
    hyperplane_eval,
    hyperplane_gradient,
    initial_point,
    residual_O,
    residual_R,
    residuals_from_state,
    trace_iterations,
)

MAX_BACKTRACKS = 100


def _check_product_shape(problem, q):
    n = len(problem.operators)
    if q.shape != (n + 1, problem.dim):
        raise ShapeError(f"product point shape {q.shape} does not match ({n + 1}, {problem.dim})")


def product_field_B(problem, q):
    """Lipschitz part of the product operator: rows -z for each dual block and
    sum(w_i) + B(z) on the primal block. The linear part is skew-symmetric."""
    _check_product_shape(problem, q)
    n = len(problem.operators)
    z = q[n]
    out = np.empty_like(q)
    for i in range(n):
        out[i] = -z
    s = np.zeros_like(z)
    for i in range(n):
        s += q[i]
    out[n] = s + problem.field.eval(z)
    return out


def product_resolvent_A(problem, alpha, q):
    """Resolvent of the maximal monotone part: J of each inverse operator on
    its dual block (via Moreau), identity on the primal block."""
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    _check_product_shape(problem, q)
    n = len(problem.operators)
    out = np.empty_like(q)
    for i, op in enumerate(problem.operators):
        out[i] = inverse_resolvent_via_moreau(op, alpha, q[i])
    out[n] = q[n]
    return out


def product_initial_point(problem, rng):
    """Same primal draw as the splitting solvers; dual blocks start at zero."""
    n = len(problem.operators)
    q = np.zeros((n + 1, problem.dim))
    q[n] = rng.standard_normal(problem.dim) / np.sqrt(problem.dim)
    return q


def _check_finite_q(q, k, trace):
    biggest = float(np.abs(q).max(initial=0.0))
    if not np.isfinite(biggest) or biggest > DIVERGENCE_NORM_CAP:
        raise DivergenceError(
            f"iterate exceeded {DIVERGENCE_NORM_CAP:g} or became non-finite at iteration {k}",
            last_finite_iteration=k - 1,
            partial_trace=trace,
        )


# ---------------------------------------------------------------------------
# Tseng's method (forward-backward-forward) with backtracking
# ---------------------------------------------------------------------------


def tseng_iterate(problem, q, alpha0, theta=0.8, shrink=0.7):
    """One Tseng step: backtrack alpha until the forward step is contractive
    enough, then q+ = qbar + alpha*(B(q) - B(qbar)).

    Returns (q_next, q_bar, alpha_used). The accepted alpha satisfies
    alpha*||B(qbar) - B(q)|| <= theta*||qbar - q|| exactly.
    """
    if not 0 < theta < 1 or not 0 < shrink < 1 or alpha0 <= 0:
        raise InvalidParameterError("need alpha0 > 0 and theta, shrink in (0, 1)")
    bq = product_field_B(problem, q)
    alpha = alpha0
    for _ in range(MAX_BACKTRACKS + 1):
        qbar = product_resolvent_A(problem, alpha, q - alpha * bq)
        bqbar = product_field_B(problem, qbar)
        if alpha * np.linalg.norm((bqbar - bq).ravel()) <= theta * np.linalg.norm((qbar - q).ravel()):
            q_next = qbar + alpha * (bq - bqbar)
            return q_next, qbar, alpha
        alpha *= shrink
    raise StalledLinesearchError(f"no acceptable stepsize after {MAX_BACKTRACKS} reductions")


def tseng_residual(q_prev, q_next, alpha):
    """Squared norm of the certificate (1/alpha)(q_k - q_{k+1}), an element of
    the product operator at qbar_k."""
    diff = (q_prev - q_next).ravel()
    return float(np.dot(diff, diff)) / (alpha * alpha)


def run_tseng(problem, iterations, seed, alpha0=1.0, theta=0.8, shrink=0.7,
              trace_every=10, label="tseng"):
    """Tseng baseline; the accepted stepsize carries over as the next trial."""
    if iterations < 1:
        raise InvalidParameterError(f"iterations must be >= 1, got {iterations}")
    rng = np.random.default_rng(seed)
    q = product_initial_point(problem, rng)
    n = len(problem.operators)
    cadence = set(trace_iterations(iterations, trace_every))
    trace = []
    elapsed = 0.0
    alpha = alpha0
    residual = None
    for k in range(1, iterations + 1):
        t0 = time.perf_counter()
        q_next, _, alpha = tseng_iterate(problem, q, alpha, theta, shrink)
        residual = tseng_residual(q, q_next, alpha)
        q = q_next
        elapsed += time.perf_counter() - t0
        _check_finite_q(q, k, trace)
        if k in cadence:
            trace.append(TraceRecord(label, seed, k, elapsed, residual, None))
    return RunResult(label=label, seed=seed, trace=trace, z=q[n].copy(), iterations=iterations)


# ---------------------------------------------------------------------------
# Forward-reflected-backward (FRB) with backtracking
# ---------------------------------------------------------------------------


def frb_iterate(problem, q, q_prev, field_q, field_prev, alpha0, theta=0.8, shrink=0.7):
    """One FRB step q+ = J_{alpha A}(q - alpha*(2 B(q) - B(q_prev))).

    alpha is backtracked until alpha*||B(q) - B(q_prev)|| <= (theta/2)*||q - q_prev||,
    which only involves already-known points. Returns
    (q_next, field_next, alpha_used, residual) where the residual is the
    squared norm of the operator element certified at q_next.
    """
    if not 0 < theta < 1 or not 0 < shrink < 1 or alpha0 <= 0:
        raise InvalidParameterError("need alpha0 > 0 and theta, shrink in (0, 1)")
    gap_b = np.linalg.norm((field_q - field_prev).ravel())
    gap_q = np.linalg.norm((q - q_prev).ravel())
    alpha = alpha0
    for _ in range(MAX_BACKTRACKS + 1):
        if alpha * gap_b <= 0.5 * theta * gap_q:
            break
        alpha *= shrink
    else:
        raise StalledLinesearchError(f"no acceptable stepsize after {MAX_BACKTRACKS} reductions")
    q_next = product_resolvent_A(problem, alpha, q - alpha * (2.0 * field_q - field_prev))
    field_next = product_field_B(problem, q_next)
    v = ((q - q_next) / alpha + field_next + field_prev - 2.0 * field_q).ravel()
    return q_next, field_next, alpha, float(np.dot(v, v))


def run_frb(problem, iterations, seed, alpha0=1.0, theta=0.8, shrink=0.7,
            trace_every=10, label="frb"):
    """FRB baseline; history is seeded with q_0 = q_-1 so the first reflection vanishes."""
    if iterations < 1:
        raise InvalidParameterError(f"iterations must be >= 1, got {iterations}")
    rng = np.random.default_rng(seed)
    q = product_initial_point(problem, rng)
    n = len(problem.operators)
    q_prev = q.copy()
    field_q = product_field_B(problem, q)
    field_prev = field_q.copy()
    cadence = set(trace_iterations(iterations, trace_every))
    trace = []
    elapsed = 0.0
    alpha = alpha0
    for k in range(1, iterations + 1):
        t0 = time.perf_counter()
        q_next, field_next, alpha, residual = frb_iterate(
            problem, q, q_prev, field_q, field_prev, alpha, theta, shrink
        )
        q_prev, q = q, q_next
        field_prev, field_q = field_q, field_next
        elapsed += time.perf_counter() - t0
        _check_finite_q(q, k, trace)
        if k in cadence:
            trace.append(TraceRecord(label, seed, k, elapsed, residual, None))
    return RunResult(label=label, seed=seed, trace=trace, z=q[n].copy(), iterations=iterations)


# ---------------------------------------------------------------------------
# Deterministic projective splitting (exact projection onto the hyperplane)
# ---------------------------------------------------------------------------


def deterministic_ps_iterate(problem, point, rho, tau):
    """Exact-oracle splitting step with the exact projection stepsize
    alpha = phi(p) / ||grad phi||^2 whenever the separator is violated.

    Returns (p_next, (R, O), converged) where converged flags a vanishing
    gradient (only possible with phi(p) <= 0).
    """
    z, w = point.z, point.w
    n = len(problem.operators)
    d = z.shape[0]
    x = np.empty((n + 1, d))
    y = np.empty((n + 1, d))
    for i, op in enumerate(problem.operators):
        x[i], y[i] = graph_pair(op, tau, z, w[i])
    bz = problem.field.eval(z)
    x[n] = z - rho * (bz - w[n])
    y[n] = problem.field.eval(x[n])
    pairs = OperatorPairSet(x, y)

    point_r = residual_R(z, pairs, bz)
    point_o = residual_O(point, pairs, bz)

    phi = hyperplane_eval(point, pairs)
    if phi <= 0.0:
        return point, (point_r, point_o), True
    grad = hyperplane_gradient(pairs)
    norm_sq = float(np.dot(grad.z, grad.z))
    for i in range(n + 1):
        norm_sq += float(np.dot(grad.w[i], grad.w[i]))
    if norm_sq == 0.0:
        # impossible with phi > 0 by construction; treated as converged
        return point, (point_r, point_o), True
    step = phi / norm_sq
    p_next = ExtendedPoint(z - step * grad.z, w - step * grad.w)
    return p_next, (point_r, point_o), False


def run_ps(problem, iterations, seed, rho=None, tau=1.0, trace_every=10, label="ps"):
    """Deterministic projective splitting with a fixed forward stepsize,
    defaulting to 0.9/L."""
    if iterations < 1:
        raise InvalidParameterError(f"iterations must be >= 1, got {iterations}")
    limit = 0.9 / problem.field.lipschitz_bound
    if rho is None:
        rho = limit
    if rho > limit * (1.0 + 1e-12):
        raise InvalidParameterError(f"rho={rho:g} exceeds 0.9/L={limit:g}")
    rng = np.random.default_rng(seed)
    point = initial_point(problem, rng)
    cadence = set(trace_iterations(iterations, trace_every))
    trace = []
    elapsed = 0.0
    for k in range(1, iterations + 1):
        t0 = time.perf_counter()
        point, _, _ = deterministic_ps_iterate(problem, point, rho, tau)
        elapsed += time.perf_counter() - t0
        _check_finite_point(point, k, trace)
        if k in cadence:
            r_val, o_val = residuals_from_state(problem, point.z, point.w, tau)
            trace.append(TraceRecord(label, seed, k, elapsed, r_val, o_val))
    return RunResult(label=label, seed=seed, trace=trace, z=point.z.copy(),
                     point=point, iterations=iterations)


def _check_finite_point(point, k, trace):
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


# ---------------------------------------------------------------------------
# DSEG: double-stepsize extragradient, the n=0 special case
# ---------------------------------------------------------------------------


def run_dseg(problem, schedule, iterations, seed, trace_every=10, label="dseg",
             observer=None):
    """Standalone double-stepsize extragradient for problems with no
    set-valued operators: z+ = z - alpha*B~(z - rho*B~(z)) with two
    independent oracle draws. Traces ||B(z)||^2 as the residual."""
    if len(problem.operators) != 0:
        raise InvalidParameterError("DSEG applies only to problems with n=0 operators")
    if iterations < 1:
        raise InvalidParameterError(f"iterations must be >= 1, got {iterations}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(problem.dim) / np.sqrt(problem.dim)
    cadence = set(trace_iterations(iterations, trace_every))
    trace = []
    elapsed = 0.0
    for k in range(1, iterations + 1):
        alpha, rho = schedule.stepsizes(k)
        t0 = time.perf_counter()
        r1 = problem.field.stochastic_eval(z, rng)
        probe = z - rho * r1
        r2 = problem.field.stochastic_eval(probe, rng)
        z = z - alpha * r2
        elapsed += time.perf_counter() - t0
        biggest = float(np.abs(z).max(initial=0.0))
        if not np.isfinite(biggest) or biggest > DIVERGENCE_NORM_CAP:
            raise DivergenceError(
                f"iterate exceeded {DIVERGENCE_NORM_CAP:g} or became non-finite at iteration {k}",
                last_finite_iteration=k - 1,
                partial_trace=trace,
            )
        if observer is not None:
            observer(k, z)
        if k in cadence:
            bz = problem.field.eval(z)
            trace.append(TraceRecord(label, seed, k, elapsed, float(np.dot(bz, bz)), None))
    return RunResult(label=label, seed=seed, trace=trace, z=z.copy(), iterations=iterations)


def gda_run(problem, stepsize, iterations, seed):
    """Simultaneous gradient descent-ascent, the method that fails on bilinear
    games; kept only to demonstrate the failure. Returns (z_first, z_final)."""
    if len(problem.operators) != 0:
        raise InvalidParameterError("the GDA demonstration applies to unconstrained games")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(problem.dim) / np.sqrt(problem.dim)
    z_first = z.copy()
    for _ in range(iterations):
        z = z - stepsize * problem.field.eval(z)
        if not np.isfinite(z).all():
            break
    return z_first, z
