"""Concrete problem instances: the distributionally robust sparse logistic
regression (DRSLR) saddle game with its minibatch oracle, and synthetic
bilinear games with known solutions for testing.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from .data_io import SparseDataset
from .errors import EstimationError, InvalidParameterError, ShapeError
from .operators import (
    LipschitzMap,
    SetValuedOperator,
    l1_operator,
    project_linf_ball,
    project_scaled_soc,
    soft_threshold,
)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Bundle of set-valued operators plus the single-valued Lipschitz field."""

    operators: tuple
    field: LipschitzMap
    dim: int
    name: str = ""
    solution: Optional[np.ndarray] = None

    @property
    def n_ops(self):
        return len(self.operators)


# ---------------------------------------------------------------------------
# DRSLR: min over (lam, beta), max over gamma, with a scaled second-order-cone
# constraint on (lam, beta), an l-inf box on gamma, and an l1 penalty on beta.
# ---------------------------------------------------------------------------

LOGISTIC_KERNEL_LIPSCHITZ = 1.0  # derivative of the loss kernel is tanh, slope <= 1


@dataclass(frozen=True, eq=False)
class DrslrProblem:
    """Dataset plus the robustness weights; variables are z = (lam, beta, gamma)."""

    dataset: SparseDataset
    delta: float = 1.0
    kappa: float = 1.0
    l1_weight: float = 1e-3

    def __post_init__(self):
        if self.delta < 0 or self.kappa < 0 or self.l1_weight < 0:
            raise InvalidParameterError("delta, kappa and the l1 weight must be nonnegative")

    @property
    def m(self):
        return self.dataset.m

    @property
    def d(self):
        return self.dataset.d

    @property
    def dim(self):
        return 1 + self.d + self.m

    def split(self, z):
        if z.shape[0] != self.dim:
            raise ShapeError(f"expected dim {self.dim}, got {z.shape[0]}")
        return z[0], z[1 : 1 + self.d], z[1 + self.d :]

    def join(self, lam, beta, gamma):
        return np.concatenate(([lam], beta, gamma))


def logistic_kernel(t):
    """Loss kernel log(e^t + e^-t), evaluated in the overflow-safe form."""
    t = np.asarray(t)
    return np.abs(t) + np.log1p(np.exp(-2.0 * np.abs(t)))


def drslr_loss(problem, z):
    """Smooth saddle function whose gradient field the solvers sample.

    Diagnostic only; excludes the l1 penalty, which enters through its own
    set-valued operator.
    """
    lam, beta, gamma = problem.split(z)
    margins = problem.dataset.features @ beta
    y = problem.dataset.labels
    value = lam * (problem.delta - problem.kappa)
    value += float(np.mean(logistic_kernel(margins)))
    value += float(np.mean(gamma * (y * margins - lam * problem.kappa)))
    return value


def drslr_full_field(problem, z):
    """Exact saddle field: gradients in (lam, beta), negated gradient in gamma."""
    lam, beta, gamma = problem.split(z)
    X = problem.dataset.features
    y = problem.dataset.labels
    m = problem.m
    margins = X @ beta
    g_lam = problem.delta - problem.kappa * (1.0 + gamma.mean())
    g_beta = X.T @ (np.tanh(margins) + gamma * y) / m
    g_gamma = -(y * margins - lam * problem.kappa) / m
    return np.concatenate(([g_lam], g_beta, g_gamma))


def drslr_component(problem, i, z):
    """Single-sample field; the gamma block is supported on coordinate i only."""
    if not 0 <= i < problem.m:
        raise IndexError(f"sample index {i} out of range for m={problem.m}")
    lam, beta, gamma = problem.split(z)
    X = problem.dataset.features
    y = problem.dataset.labels
    row = X.getrow(i)
    margin = float(row @ beta)
    g_lam = problem.delta - problem.kappa * (1.0 + gamma[i])
    g_beta = np.zeros(problem.d)
    g_beta[row.indices] = (np.tanh(margin) + gamma[i] * y[i]) * row.data
    g_gamma = np.zeros(problem.m)
    g_gamma[i] = -(y[i] * margin - lam * problem.kappa)
    return np.concatenate(([g_lam], g_beta, g_gamma))


def drslr_batch_field(problem, z, indices):
    """Mean of the single-sample fields over an index multiset."""
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        raise InvalidParameterError("batch must contain at least one index")
    lam, beta, gamma = problem.split(z)
    X = problem.dataset.features
    y = problem.dataset.labels
    b = indices.size
    rows = X[indices]
    margins = rows @ beta
    g_lam = problem.delta - problem.kappa * (1.0 + gamma[indices].mean())
    g_beta = rows.T @ (np.tanh(margins) + gamma[indices] * y[indices]) / b
    g_gamma = np.zeros(problem.m)
    # duplicates in a with-replacement batch must accumulate
    np.add.at(g_gamma, indices, -(y[indices] * margins - lam * problem.kappa) / b)
    return np.concatenate(([g_lam], g_beta, g_gamma))


def drslr_minibatch_oracle(problem, z, batch_size, rng):
    """Unbiased field estimate from a uniform with-replacement minibatch."""
    if not 1 <= batch_size <= problem.m:
        raise InvalidParameterError(
            f"batch_size must be in [1, {problem.m}], got {batch_size}"
        )
    indices = rng.integers(0, problem.m, size=batch_size)
    return drslr_batch_field(problem, z, indices)


def _fd_jacobian(field_eval, z0, h):
    dim = z0.shape[0]
    jac = np.empty((dim, dim))
    step = np.zeros(dim)
    for j in range(dim):
        step[j] = h
        jac[:, j] = (field_eval(z0 + step) - field_eval(z0 - step)) / (2.0 * h)
        step[j] = 0.0
    return jac


def estimate_lipschitz_bound(field_eval, dim, points=20, power_steps=500,
                             tol=1e-6, fd_scale=1e-6, check_pairs=100,
                             safety=1.5, seed=0):
    """Upper bound on the Lipschitz constant of a smooth field.

    At each of `points` random base points the Jacobian is approximated by
    central differences and its largest singular value extracted by power
    iteration on the symmetrized product J^T J (plain power iteration on J
    itself stalls for rotational fields). The largest value times `safety` is
    returned and must dominate the difference quotients of `check_pairs`
    random pairs. Cost grows with dim; pass an explicit bound instead for
    large problems.
    """
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(points):
        z0 = rng.standard_normal(dim)
        h = fd_scale * (1.0 + float(np.linalg.norm(z0)))
        jac = _fd_jacobian(field_eval, z0, h)
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        previous = None
        for _ in range(power_steps):
            sv = jac.T @ (jac @ v)
            lam = float(np.linalg.norm(sv))
            if lam == 0.0:
                previous = 0.0
                break
            v = sv / lam
            if previous is not None and abs(lam - previous) <= tol * max(lam, 1.0):
                previous = lam
                break
            previous = lam
        else:
            raise EstimationError(
                f"power iteration did not converge within {power_steps} steps"
            )
        best = max(best, np.sqrt(previous))
    bound = safety * best
    for _ in range(check_pairs):
        z1 = rng.standard_normal(dim)
        z2 = rng.standard_normal(dim)
        gap = float(np.linalg.norm(z1 - z2))
        if gap == 0.0:
            continue
        quotient = float(np.linalg.norm(field_eval(z1) - field_eval(z2))) / gap
        if quotient > bound:
            raise EstimationError(
                f"estimated bound {bound:g} violated by observed quotient {quotient:g}"
            )
    return bound


def drslr_lipschitz_bound(problem, seed=0):
    """Estimated Lipschitz bound of the DRSLR field (the value is not known
    in closed form for a given dataset)."""
    return estimate_lipschitz_bound(
        lambda z: drslr_full_field(problem, z), problem.dim, seed=seed
    )


def drslr_constraint_resolvent(problem):
    """Resolvent of the normal cone of the feasible set: blockwise projections
    onto the scaled second-order cone over (lam, beta) and the l-inf unit ball
    over gamma. Independent of the stepsize."""
    s = LOGISTIC_KERNEL_LIPSCHITZ + 1.0
    d = problem.d

    def resolvent(tau, t):
        lam, beta, gamma = t[0], t[1 : 1 + d], t[1 + d :]
        lam_p, beta_p = project_scaled_soc(lam, beta, s)
        gamma_p = project_linf_ball(gamma, 1.0)
        return np.concatenate(([lam_p], beta_p, gamma_p))

    return SetValuedOperator(resolvent=resolvent, dim=problem.dim)


def drslr_l1_resolvent(problem):
    """Resolvent of the l1 block: soft thresholding on beta, identity on the
    lam and gamma blocks (resolvent of the zero operator)."""
    d = problem.d
    weight = problem.l1_weight

    def resolvent(tau, t):
        out = t.copy()
        out[1 : 1 + d] = soft_threshold(t[1 : 1 + d], tau * weight)
        return out

    return SetValuedOperator(resolvent=resolvent, dim=problem.dim)


def make_drslr_instance(problem, batch_size=100, lipschitz=None):
    """Wire a DrslrProblem into a ProblemInstance with n=2 set-valued operators."""
    if lipschitz is None:
        lipschitz = drslr_lipschitz_bound(problem)
    batch_size = min(batch_size, problem.m)

    field = LipschitzMap(
        eval=lambda z: drslr_full_field(problem, z),
        stochastic_eval=lambda z, rng: drslr_minibatch_oracle(problem, z, batch_size, rng),
        lipschitz_bound=lipschitz,
    )
    return ProblemInstance(
        operators=(drslr_constraint_resolvent(problem), drslr_l1_resolvent(problem)),
        field=field,
        dim=problem.dim,
        name="drslr",
    )


def synthetic_drslr_dataset(m, d, seed, density=0.5):
    """Random sparse dataset with +/-1 labels for tests and small benchmarks."""
    rng = np.random.default_rng(seed)
    mask = rng.random((m, d)) < density
    values = rng.standard_normal((m, d)) / np.sqrt(d)
    features = sparse.csr_matrix(np.where(mask, values, 0.0))
    labels = np.where(rng.random(m) < 0.5, -1.0, 1.0)
    return SparseDataset(features=features, labels=labels)


# ---------------------------------------------------------------------------
# Synthetic bilinear games: B(x, y) = scale * (y, -x), unique solution 0.
# ---------------------------------------------------------------------------


def bilinear_field(d_x, d_y, scale):
    def field(z):
        if z.shape[0] != d_x + d_y:
            raise ShapeError(f"expected dim {d_x + d_y}, got {z.shape[0]}")
        return np.concatenate((scale * z[d_x:], -scale * z[:d_x]))

    return field


def make_bilinear_game(d_x, d_y, scale=1.0, noise_sigma=0.0):
    """Unconstrained bilinear game (no set-valued operators); the oracle adds
    isotropic Gaussian noise of the given sigma."""
    if scale <= 0:
        raise InvalidParameterError(f"scale must be positive, got {scale}")
    dim = d_x + d_y
    exact = bilinear_field(d_x, d_y, scale)

    if noise_sigma > 0:
        def noisy(z, rng):
            return exact(z) + noise_sigma * rng.standard_normal(dim)
    else:
        def noisy(z, rng):
            return exact(z)

    field = LipschitzMap(eval=exact, stochastic_eval=noisy, lipschitz_bound=scale)
    return ProblemInstance(
        operators=(),
        field=field,
        dim=dim,
        name="bilinear",
        solution=np.zeros(dim),
    )


def make_box_constrained_bilinear(d_x, d_y, scale=1.0, halfwidth=1.0, noise_sigma=0.0):
    """Bilinear game constrained to a box with the solution interior: adds the
    normal cone of [-halfwidth, halfwidth]^dim as the single set-valued term."""
    if halfwidth <= 0:
        raise InvalidParameterError(f"halfwidth must be positive, got {halfwidth}")
    base = make_bilinear_game(d_x, d_y, scale, noise_sigma)
    box = SetValuedOperator(
        resolvent=lambda tau, t: project_linf_ball(t, halfwidth), dim=base.dim
    )
    return ProblemInstance(
        operators=(box,),
        field=base.field,
        dim=base.dim,
        name="bilinear-box",
        solution=np.zeros(base.dim),
    )
