"""Proximal/projection toolbox and the operator abstractions used by every solver.

Set-valued operators are represented by their resolvents J = (I + tau*A)^{-1};
single-valued Lipschitz maps carry an exact and a noisy evaluation.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParameterError, ShapeError


def _as_vector(t):
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 1:
        raise ShapeError(f"expected a 1-d vector, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise InvalidParameterError("vector contains non-finite entries")
    return t


def soft_threshold(t, kappa):
    """Proximal operator of kappa*||.||_1: shrink each entry toward 0 by kappa."""
    if kappa < 0:
        raise InvalidParameterError(f"kappa must be nonnegative, got {kappa}")
    t = _as_vector(t)
    return np.sign(t) * np.maximum(np.abs(t) - kappa, 0.0)


def project_linf_ball(g, radius):
    """Euclidean projection onto {x : ||x||_inf <= radius}: componentwise clamp."""
    if radius <= 0:
        raise InvalidParameterError(f"radius must be positive, got {radius}")
    g = _as_vector(g)
    return np.clip(g, -radius, radius)


def project_scaled_soc(lam, beta, s):
    """Euclidean projection onto the scaled second-order cone {(l, b) : ||b||_2 <= l/s}.

    Returns the projected (lam, beta) pair. With aperture a = 1/s and r = ||beta||:
    feasible points are fixed, points in the polar cone (r <= -lam/a) map to the
    apex, and boundary projections land on the ray at height c = (a*r + lam)/(a^2 + 1).
    """
    if s <= 0:
        raise InvalidParameterError(f"cone scale must be positive, got {s}")
    beta = _as_vector(beta)
    if not np.isfinite(lam):
        raise InvalidParameterError("lam must be finite")
    a = 1.0 / s
    r = float(np.linalg.norm(beta))
    if r <= a * lam:
        return float(lam), beta.copy()
    if r <= -lam / a:
        return 0.0, np.zeros_like(beta)
    c = (a * r + lam) / (a * a + 1.0)
    return float(c), (c * a / r) * beta


def resolvent_of_normal_cone(proj, tau, t):
    """Resolvent of a normal-cone operator: projection onto the set, for any tau > 0."""
    if tau <= 0:
        raise InvalidParameterError(f"tau must be positive, got {tau}")
    return proj(t)


def product_resolvent(blocks, tau, t):
    """Apply each block's resolvent to its slice of t and concatenate.

    blocks: sequence of (SetValuedOperator, dim) pairs whose dims sum to len(t).
    """
    t = _as_vector(t)
    total = sum(d for _, d in blocks)
    if total != t.shape[0]:
        raise ShapeError(f"block dims sum to {total}, vector has length {t.shape[0]}")
    out = np.empty_like(t)
    start = 0
    for op, d in blocks:
        stop = start + d
        piece = op.resolvent(tau, t[start:stop])
        if piece.shape[0] != d:
            raise ShapeError(f"block resolvent returned length {piece.shape[0]}, expected {d}")
        out[start:stop] = piece
        start = stop
    return out


def inverse_resolvent_via_moreau(op, alpha, w):
    """Resolvent of the inverse operator, J_{alpha*A^{-1}}, from the resolvent of A.

    Moreau's identity: J_{alpha*A^{-1}}(w) = w - alpha * J_{A/alpha}(w/alpha).
    """
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    w = _as_vector(w)
    return w - alpha * op.resolvent(1.0 / alpha, w / alpha)


@dataclass(frozen=True)
class SetValuedOperator:
    """A maximal monotone operator accessed through its resolvent.

    resolvent(tau, t) must be the single-valued map (I + tau*A)^{-1}(t);
    nonexpansiveness and the graph property y = (t - x)/tau in A(x) are what
    the solvers rely on.
    """

    resolvent: Callable[[float, np.ndarray], np.ndarray]
    dim: int


def normal_cone_operator(proj, dim):
    """Normal cone of a closed convex set given by its exact projection map."""
    return SetValuedOperator(
        resolvent=lambda tau, t: resolvent_of_normal_cone(proj, tau, t), dim=dim
    )


def l1_operator(weight, dim):
    """Subdifferential of weight*||.||_1; resolvent is soft thresholding."""
    if weight < 0:
        raise InvalidParameterError(f"weight must be nonnegative, got {weight}")
    return SetValuedOperator(
        resolvent=lambda tau, t: soft_threshold(t, tau * weight), dim=dim
    )


def zero_operator(dim):
    """The zero operator; its resolvent is the identity."""
    return SetValuedOperator(resolvent=lambda tau, t: _as_vector(t).copy(), dim=dim)


def block_operator(blocks):
    """Cartesian product of operators acting on consecutive slices."""
    dim = sum(d for _, d in blocks)
    blocks = tuple(blocks)
    return SetValuedOperator(
        resolvent=lambda tau, t: product_resolvent(blocks, tau, t), dim=dim
    )


@dataclass(frozen=True)
class LipschitzMap:
    """Single-valued monotone map with an exact and a stochastic oracle.

    eval(z) returns the exact field value; stochastic_eval(z, rng) returns an
    unbiased noisy estimate using only the caller-owned rng. lipschitz_bound
    is an upper bound on ||eval(z) - eval(z')|| / ||z - z'||.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    stochastic_eval: Callable[[np.ndarray, np.random.Generator], np.ndarray]
    lipschitz_bound: float


def exact_lipschitz_map(f, lipschitz_bound):
    """Wrap a deterministic field as a LipschitzMap whose oracle is noise-free."""
    return LipschitzMap(eval=f, stochastic_eval=lambda z, rng: f(z), lipschitz_bound=lipschitz_bound)
