"""Self-contained correctness checks behind the bench subcommand, with the
independent numerical oracles they compare against.

The oracles deliberately avoid the closed forms under test: proximal maps are
checked against golden-section minimization of their defining objectives, the
cone projection against a radial reduction of the constrained least-squares
problem.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .baselines import run_dseg
from .problems import (
    DrslrProblem,
    drslr_batch_field,
    drslr_full_field,
    make_bilinear_game,
    make_box_constrained_bilinear,
    synthetic_drslr_dataset,
)
from .sps import StepSchedule, residuals_from_state, run_sps

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class BenchCheck:
    name: str
    passed: bool
    seconds: float
    detail: str


def golden_section_minimize(f, lo, hi, tol=1e-10):
    """Minimize a unimodal scalar function on [lo, hi] by golden-section search."""
    a, b = float(lo), float(hi)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def prox_l1_oracle(t, kappa, tol=1e-10):
    """Coordinatewise minimizer of kappa*|u| + 0.5*(u - t_j)^2."""
    out = np.empty_like(t)
    for j, tj in enumerate(t):
        out[j] = golden_section_minimize(
            lambda u: kappa * abs(u) + 0.5 * (u - tj) ** 2,
            min(0.0, tj) - 1.0,
            max(0.0, tj) + 1.0,
            tol,
        )
    return out


def linf_projection_oracle(g, radius, tol=1e-10):
    """Coordinatewise minimizer of (u - g_j)^2 over |u| <= radius."""
    out = np.empty_like(g)
    for j, gj in enumerate(g):
        out[j] = golden_section_minimize(
            lambda u: (u - gj) ** 2, -radius, radius, tol
        )
    return out


def soc_projection_oracle(lam0, beta0, s, tol=1e-10):
    """Projection onto {(lam, beta): s*||beta|| <= lam} by radial reduction.

    The optimal beta is a nonnegative multiple of beta0; for a radius u the
    best lam is max(lam0, s*u), leaving a scalar problem solved by
    golden-section search.
    """
    r0 = float(np.linalg.norm(beta0))
    if r0 == 0.0:
        return max(lam0, 0.0), np.zeros_like(beta0)

    def cost(u):
        return (max(lam0, s * u) - lam0) ** 2 + (u - r0) ** 2

    hi = r0 + np.hypot(lam0, r0) + 1.0
    u_star = golden_section_minimize(cost, 0.0, hi, tol)
    return max(lam0, s * u_star), (u_star / r0) * beta0


def _timed(fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return passed, time.perf_counter() - t0, detail


def check_prox_oracles(samples=150, seed=20240817):
    """Closed-form prox/projection maps agree with the numerical oracles."""

    def body():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(samples):
            t = rng.standard_normal(4) * 3.0
            kappa = float(rng.random() * 2.0)
            worst = max(worst, float(np.abs(
                ops.soft_threshold(t, kappa) - prox_l1_oracle(t, kappa)
            ).max()))
            radius = float(rng.random() * 2.0 + 0.1)
            worst = max(worst, float(np.abs(
                ops.project_linf_ball(t, radius) - linf_projection_oracle(t, radius)
            ).max()))
            lam = float(rng.standard_normal() * 2.0)
            s = float(rng.random() * 3.0 + 0.2)
            lam_c, beta_c = ops.project_scaled_soc(lam, t, s)
            lam_o, beta_o = soc_projection_oracle(lam, t, s)
            worst = max(worst, abs(lam_c - lam_o), float(np.abs(beta_c - beta_o).max()))
        return worst <= 1e-6, f"max deviation {worst:.3e} (tolerance 1e-6)"

    return body


def check_lemma1_oracle():
    """Residual vanishes exactly at a constructed extended solution and is
    bounded away from zero at perturbations within the solver subspace."""

    def body():
        problem = make_box_constrained_bilinear(1, 1, scale=1.0, halfwidth=1.0)
        d = problem.dim
        z_star = np.zeros(d)
        w_star = np.zeros((2, d))
        _, o_at_solution = residuals_from_state(problem, z_star, w_star, tau=1.0)
        if o_at_solution > 1e-18:
            return False, f"residual at solution {o_at_solution:.3e} > 1e-18"
        rng = np.random.default_rng(7)
        floor = np.inf
        for _ in range(100):
            dz = rng.standard_normal(d)
            dw = rng.standard_normal(d)
            vec = np.concatenate((dz, dw))
            vec *= 1e-2 / np.linalg.norm(vec)
            z = z_star + vec[:d]
            w = w_star.copy()
            w[0] += vec[d:]
            w[1] -= vec[d:]  # stays in the zero-sum subspace
            _, o_val = residuals_from_state(problem, z, w, tau=1.0)
            floor = min(floor, o_val)
        return floor >= 1e-8, f"smallest perturbed residual {floor:.3e} (need >= 1e-8)"

    return body


def check_oracle_unbiasedness():
    """On a 5-sample problem the enumerated single-draw oracle outputs average
    exactly to the full field."""

    def body():
        dataset = synthetic_drslr_dataset(m=5, d=3, seed=3)
        problem = DrslrProblem(dataset=dataset)
        rng = np.random.default_rng(11)
        z = rng.standard_normal(problem.dim)
        full = drslr_full_field(problem, z)
        mean = np.zeros_like(full)
        for i in range(problem.m):
            mean += drslr_batch_field(problem, z, [i])
        mean /= problem.m
        rel = float(np.abs(mean - full).max()) / (1.0 + float(np.abs(full).max()))
        return rel <= 1e-14, f"relative gap {rel:.3e} (tolerance 1e-14)"

    return body


def check_dseg_equivalence(iterations=50):
    """The splitting solver with no set-valued operators reproduces standalone
    DSEG bit-for-bit under the shared rng protocol."""

    def body():
        problem = make_bilinear_game(2, 2, scale=1.0, noise_sigma=0.1)
        schedule = StepSchedule.decay(c_d=0.5)
        sps_zs, dseg_zs = [], []
        run_sps(problem, schedule, iterations, seed=5,
                observer=lambda k, p: sps_zs.append(p.z.copy()))
        run_dseg(problem, schedule, iterations, seed=5,
                 observer=lambda k, z: dseg_zs.append(z.copy()))
        same = all(np.array_equal(a, b) for a, b in zip(sps_zs, dseg_zs))
        return same and len(sps_zs) == iterations, (
            "bit-identical iterates" if same else "iterate mismatch"
        )

    return body


def run_all_checks():
    """Execute every bench check; returns a list of BenchCheck results."""
    builders = [
        ("prox-oracles", check_prox_oracles()),
        ("lemma1-oracle", check_lemma1_oracle()),
        ("oracle-unbiasedness", check_oracle_unbiasedness()),
        ("dseg-equivalence", check_dseg_equivalence()),
    ]
    results = []
    for name, body in builders:
        passed, seconds, detail = _timed(body)
        results.append(BenchCheck(name=name, passed=passed, seconds=seconds, detail=detail))
    return results
