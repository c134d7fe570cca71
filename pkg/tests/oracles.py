"""Independent numerical oracles used by the tests.

Everything here avoids the closed forms under test: derivatives come from
central differences, projections from 1-d searches over the defining
constraint, and inclusions from grid enumeration.
"""

import numpy as np


def central_difference_gradient(f, z, h=1e-6):
    """Central-difference gradient of a scalar function."""
    grad = np.empty_like(z)
    step = np.zeros_like(z)
    for j in range(z.shape[0]):
        step[j] = h
        grad[j] = (f(z + step) - f(z - step)) / (2.0 * h)
        step[j] = 0.0
    return grad


def l1_subgradient_contains(u, g, weight, tol=1e-8):
    """Check g in weight * subdifferential of ||.||_1 at u, coordinatewise."""
    for uj, gj in zip(u, g):
        if uj > tol:
            if abs(gj - weight) > tol * (1 + weight):
                return False
        elif uj < -tol:
            if abs(gj + weight) > tol * (1 + weight):
                return False
        else:
            if abs(gj) > weight + tol:
                return False
    return True


def grid_inverse_resolvent_1d(resolvent_of_a, alpha, w, lo=-10.0, hi=10.0, n=400001):
    """Solve x + alpha*A^{-1}(x) ∋ w on a 1-d grid, where A is given through
    its (vectorized) resolvent. The inclusion is tested as (w - x)/alpha in
    A^{-1}(x), i.e. x in A((w - x)/alpha), via the resolvent identity
    u = J_A(u + x) whenever x in A(u)."""
    xs = np.linspace(lo, hi, n)
    us = (w - xs) / alpha
    errs = np.abs(us - resolvent_of_a(1.0, us + xs))
    best = int(np.argmin(errs))
    return float(xs[best]), float(errs[best])


def pairwise_monotonicity_gap(xs, ys):
    """Smallest pairwise <y_i - y_j, x_i - x_j>; >= 0 for a monotone graph."""
    X = np.asarray(xs)
    Y = np.asarray(ys)
    inner = Y @ X.T
    diag = np.einsum("ij,ij->i", Y, X)
    gaps = diag[:, None] + diag[None, :] - inner - inner.T
    return float(gaps.min())
