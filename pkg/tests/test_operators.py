import numpy as np
import pytest

import projsplit as ps
from projsplit.bench import linf_projection_oracle, prox_l1_oracle, soc_projection_oracle
from oracles import grid_inverse_resolvent_1d, l1_subgradient_contains, pairwise_monotonicity_gap


class TestSoftThreshold:
    def test_zero_input_fixed(self):
        assert np.array_equal(ps.soft_threshold(np.array([0.0, 0.0]), 0.5), [0.0, 0.0])

    def test_below_threshold_collapses(self):
        assert np.array_equal(ps.soft_threshold(np.array([-0.3]), 0.5), [0.0])

    def test_shrinks_by_kappa(self):
        # golden-section oracle value for kappa|x| + (x-2)^2/2
        assert np.allclose(ps.soft_threshold(np.array([2.0]), 0.5), [1.5], atol=1e-12)

    def test_negative_kappa_rejected(self):
        with pytest.raises(ps.InvalidParameterError):
            ps.soft_threshold(np.array([1.0]), -0.1)

    def test_matches_numeric_minimizer(self, rng):
        for _ in range(50):
            t = rng.standard_normal(5) * 3
            kappa = float(rng.random() * 2)
            assert np.abs(ps.soft_threshold(t, kappa) - prox_l1_oracle(t, kappa)).max() < 1e-6


class TestProjectLinfBall:
    def test_interior_unchanged(self):
        g = np.array([0.5, -0.2])
        assert np.array_equal(ps.project_linf_ball(g, 1.0), g)

    def test_clamps_componentwise(self):
        assert np.array_equal(ps.project_linf_ball(np.array([3.0, -2.0]), 1.0), [1.0, -1.0])

    def test_matches_bruteforce(self, rng):
        for _ in range(50):
            g = rng.standard_normal(4) * 2
            r = float(rng.random() + 0.2)
            assert np.abs(ps.project_linf_ball(g, r) - linf_projection_oracle(g, r)).max() < 1e-6

    def test_bad_radius_rejected(self):
        with pytest.raises(ps.InvalidParameterError):
            ps.project_linf_ball(np.array([1.0]), 0.0)


class TestProjectScaledSoc:
    def test_feasible_point_unchanged(self):
        lam, beta = ps.project_scaled_soc(3.0, np.array([1.0, 0.0]), 2.0)
        assert lam == 3.0 and np.array_equal(beta, [1.0, 0.0])

    def test_polar_cone_maps_to_apex(self):
        lam, beta = ps.project_scaled_soc(-4.0, np.array([1.0, 0.0]), 2.0)
        assert lam == 0.0 and np.array_equal(beta, [0.0, 0.0])

    def test_boundary_case_matches_oracle(self):
        # projected value computed by the radial-reduction oracle at 1e-8
        lam, beta = ps.project_scaled_soc(0.0, np.array([1.0, 0.0]), 2.0)
        assert abs(lam - 0.4) < 1e-8
        assert np.allclose(beta, [0.2, 0.0], atol=1e-8)

    def test_matches_oracle_on_randoms(self, rng):
        for _ in range(60):
            lam = float(rng.standard_normal() * 2)
            beta = rng.standard_normal(3) * 2
            s = float(rng.random() * 3 + 0.2)
            lam_c, beta_c = ps.project_scaled_soc(lam, beta, s)
            lam_o, beta_o = soc_projection_oracle(lam, beta, s)
            assert abs(lam_c - lam_o) < 1e-6
            assert np.abs(beta_c - beta_o).max() < 1e-6

    def test_result_feasible_and_obtuse(self, rng):
        # projection is characterized by <input - P, q - P> <= 0 for feasible q
        for _ in range(40):
            lam = float(rng.standard_normal() * 3)
            beta = rng.standard_normal(3) * 3
            s = 2.0
            lam_p, beta_p = ps.project_scaled_soc(lam, beta, s)
            assert np.linalg.norm(beta_p) <= lam_p / s + 1e-12
            for _ in range(25):
                q_beta = rng.standard_normal(3)
                q_lam = s * np.linalg.norm(q_beta) + float(rng.random() * 2)
                inner = (lam - lam_p) * (q_lam - lam_p) + np.dot(beta - beta_p, q_beta - beta_p)
                assert inner <= 1e-10

    def test_bad_scale_rejected(self):
        with pytest.raises(ps.InvalidParameterError):
            ps.project_scaled_soc(1.0, np.array([1.0]), -2.0)


class TestNormalConeResolvent:
    def test_independent_of_stepsize(self, rng):
        t = rng.standard_normal(4) * 3
        proj = lambda v: ps.project_linf_ball(v, 1.0)
        a = ps.resolvent_of_normal_cone(proj, 0.1, t)
        b = ps.resolvent_of_normal_cone(proj, 10.0, t)
        assert np.array_equal(a, b)

    def test_member_fixed(self):
        t = np.array([0.3, -0.9])
        proj = lambda v: ps.project_linf_ball(v, 1.0)
        assert np.array_equal(ps.resolvent_of_normal_cone(proj, 1.0, t), t)

    def test_outside_point_clamped(self):
        t = np.array([5.0, -0.5])
        proj = lambda v: ps.project_linf_ball(v, 1.0)
        assert np.array_equal(ps.resolvent_of_normal_cone(proj, 1.0, t), [1.0, -0.5])


class TestProductResolvent:
    def test_single_block_degenerate(self, rng):
        op = ps.l1_operator(0.5, 4)
        t = rng.standard_normal(4)
        got = ps.product_resolvent([(op, 4)], 1.0, t)
        assert np.array_equal(got, op.resolvent(1.0, t))

    def test_identity_blocks(self, rng):
        t = rng.standard_normal(6)
        blocks = [(ps.zero_operator(3), 3), (ps.zero_operator(3), 3)]
        assert np.array_equal(ps.product_resolvent(blocks, 1.0, t), t)

    def test_mixed_blocks_match_slice_oracles(self, rng):
        soc = ps.SetValuedOperator(
            resolvent=lambda tau, t: np.concatenate(
                [[ps.project_scaled_soc(t[0], t[1:], 2.0)[0]], ps.project_scaled_soc(t[0], t[1:], 2.0)[1]]
            ),
            dim=3,
        )
        l1 = ps.l1_operator(1.0, 2)
        t = rng.standard_normal(5) * 2
        got = ps.product_resolvent([(soc, 3), (l1, 2)], 1.0, t)
        lam_o, beta_o = soc_projection_oracle(t[0], t[1:3], 2.0)
        prox_o = prox_l1_oracle(t[3:], 1.0)
        assert abs(got[0] - lam_o) < 1e-6
        assert np.abs(got[1:3] - beta_o).max() < 1e-6
        assert np.abs(got[3:] - prox_o).max() < 1e-6

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ps.ShapeError):
            ps.product_resolvent([(ps.zero_operator(3), 3)], 1.0, rng.standard_normal(4))


class TestInverseResolventViaMoreau:
    def test_inverse_of_point_normal_cone_is_identity(self, rng):
        # A = N_{{0}}, so A^{-1} is the zero operator and J is the identity
        op = ps.SetValuedOperator(resolvent=lambda tau, t: np.zeros_like(t), dim=3)
        w = rng.standard_normal(3)
        assert np.array_equal(ps.inverse_resolvent_via_moreau(op, 2.0, w), w)

    def test_l1_example(self):
        op = ps.l1_operator(1.0, 1)
        got = ps.inverse_resolvent_via_moreau(op, 1.0, np.array([2.0]))
        assert np.allclose(got, [1.0], atol=1e-12)

    def test_subgradient_inclusion(self, rng):
        # x = J_{alpha A^{-1}}(w) must satisfy x in A((w - x)/alpha) for A = d||.||_1
        op = ps.l1_operator(1.0, 4)
        for _ in range(25):
            w = rng.standard_normal(4) * 3
            alpha = float(rng.random() * 2 + 0.2)
            x = ps.inverse_resolvent_via_moreau(op, alpha, w)
            u = (w - x) / alpha
            assert l1_subgradient_contains(u, x, 1.0)

    def test_alpha_one_matches_grid_inclusion_search(self):
        op = ps.l1_operator(1.0, 1)
        for w in (2.0, -0.4, 0.9, -3.2):
            got = ps.inverse_resolvent_via_moreau(op, 1.0, np.array([w]))
            x_grid, err = grid_inverse_resolvent_1d(
                lambda tau, v: ps.soft_threshold(v, tau), 1.0, w
            )
            assert err < 1e-4
            assert abs(float(got[0]) - x_grid) < 1e-4

    def test_bad_alpha_rejected(self):
        with pytest.raises(ps.InvalidParameterError):
            ps.inverse_resolvent_via_moreau(ps.l1_operator(1.0, 1), 0.0, np.array([1.0]))


class TestToolboxInvariants:
    def test_projection_idempotence_and_nonexpansiveness(self, rng):
        def soc(v):
            lam, beta = ps.project_scaled_soc(v[0], v[1:], 2.0)
            return np.concatenate(([lam], beta))

        projections = [lambda v: ps.project_linf_ball(v, 1.3), soc]
        for proj in projections:
            for _ in range(1000):
                x = rng.standard_normal(4) * 4
                y = rng.standard_normal(4) * 4
                px, py = proj(x), proj(y)
                assert np.linalg.norm(proj(px) - px) <= 1e-12 * (1 + np.linalg.norm(x))
                assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) * (1 + 1e-12)

    def test_prox_nonexpansive(self, rng):
        # prox maps are nonexpansive but, unlike projections, not idempotent
        for _ in range(500):
            x = rng.standard_normal(4) * 4
            y = rng.standard_normal(4) * 4
            gap = np.linalg.norm(ps.soft_threshold(x, 0.7) - ps.soft_threshold(y, 0.7))
            assert gap <= np.linalg.norm(x - y) * (1 + 1e-12)

    def test_resolvent_graph_monotonicity(self, rng):
        ops_ = [
            ps.l1_operator(0.8, 3),
            ps.normal_cone_operator(lambda v: ps.project_linf_ball(v, 1.0), 3),
        ]
        for op in ops_:
            xs, ys = [], []
            tau = 0.7
            for _ in range(120):
                t = rng.standard_normal(3) * 3
                x = op.resolvent(tau, t)
                xs.append(x)
                ys.append((t - x) / tau)
            assert pairwise_monotonicity_gap(xs, ys) >= -1e-10


class TestLipschitzMap:
    def test_bound_holds_on_sampled_pairs(self, rng, bilinear):
        L = bilinear.field.lipschitz_bound
        for _ in range(200):
            z1 = rng.standard_normal(2) * 3
            z2 = rng.standard_normal(2) * 3
            gap = np.linalg.norm(bilinear.field.eval(z1) - bilinear.field.eval(z2))
            assert gap <= L * np.linalg.norm(z1 - z2) * (1 + 1e-12)

    def test_stochastic_mean_approaches_exact(self, rng, noisy_bilinear):
        z = rng.standard_normal(2)
        draws = np.array([noisy_bilinear.field.stochastic_eval(z, rng) for _ in range(20000)])
        assert np.linalg.norm(draws.mean(axis=0) - noisy_bilinear.field.eval(z)) < 5e-3
