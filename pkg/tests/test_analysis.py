import math

import numpy as np
import pytest

from allee_dyn import analysis, maps
from allee_dyn.errors import PreconditionError, RootNotFoundError

EX61 = maps.builtin("example-6-1")
EX62 = maps.builtin("example-6-2")
D43 = maps.builtin("demo-4-3")
D44 = maps.builtin("demo-4-4")


class TestFindB:
    def test_example_6_1(self):
        b, Fb = analysis.find_b(EX61, 1.8)
        assert b == pytest.approx(0.907, abs=5e-3)
        assert Fb == pytest.approx(-0.3384, abs=1e-3)

    def test_example_6_2(self):
        b, Fb = analysis.find_b(EX62, 0.2)
        assert b == pytest.approx(0.0392, abs=5e-4)
        assert Fb == pytest.approx(-0.0186, abs=5e-4)

    def test_demo_4_3_leftmost_of_two_equal_minima(self):
        b, Fb = analysis.find_b(D43, 5.2)
        assert b == pytest.approx(1.5, abs=1e-6)
        assert Fb == pytest.approx(-1.25, abs=1e-9)
        # the second minimizer at 3.5 has the same depth
        assert maps.eval_F(D43, 3.5) == pytest.approx(-1.25, abs=1e-12)

    def test_demo_4_4(self):
        b, Fb = analysis.find_b(D44, 12.3)
        assert b == pytest.approx(0.945, abs=2e-3)
        assert Fb == pytest.approx(-0.1584, abs=1e-3)

    def test_monotone_decay_has_no_interior_minimum(self):
        half = maps.from_script("piece 0 inf x/2")
        with pytest.raises(PreconditionError):
            analysis.find_b(half, 2.0)


class TestMaxima:
    def test_example_6_1_f_H(self):
        x, v = analysis.compute_f_H(EX61, 6.5)
        assert v == pytest.approx(6.317, abs=1e-3)
        assert x == pytest.approx(math.sqrt(11.0), abs=1e-6)

    def test_example_6_2_f_H(self):
        x, v = analysis.compute_f_H(EX62, 1.8)
        assert v == pytest.approx(1.3688, abs=1e-3)
        assert x == pytest.approx(0.8508, abs=1e-3)

    def test_demo_4_4_f_H(self):
        x, v = analysis.compute_f_H(D44, 14.5)
        assert v == pytest.approx(14.081, abs=1e-3)
        assert x == pytest.approx(13.162, abs=1e-3)

    def test_linear_map(self):
        half = maps.from_script("piece 0 inf x/2")
        x, v = analysis.compute_f_H(half, 4.0)
        assert v == pytest.approx(2.0, abs=1e-9)
        assert x == pytest.approx(4.0, abs=1e-6)


class TestWindows:
    def test_example_6_2_escape_window(self):
        lo, hi = 0.0186, 0.16
        l_max, l_esc = analysis.admissible_l_window(EX62, 0.2, 1.8)
        assert l_esc == pytest.approx(lo, abs=5e-4)
        assert l_max == pytest.approx(hi, abs=5e-3)
        assert l_esc < l_max  # unconditional persistence window exists

    def test_example_6_1_window_empty(self):
        l_max, l_esc = analysis.admissible_l_window(EX61, 1.8, 6.5)
        assert l_max == pytest.approx(min(6.5 - 6.317, 0.293), abs=2e-3)
        assert l_esc == pytest.approx(0.3384, abs=1e-3)
        assert l_esc > l_max


class TestThresholds:
    def test_example_6_1_u_v(self):
        b, _ = analysis.find_b(EX61, 1.8)
        u = analysis.compute_u_l(EX61, 1.8, b, 0.2)
        v = analysis.compute_v_l(EX61, 1.8, b, 0.2)
        assert u == pytest.approx(1.74, abs=1e-2)
        assert v == pytest.approx(0.361, abs=5e-3)
        assert maps.eval_F(EX61, u) == pytest.approx(0.2, abs=1e-7)
        assert maps.eval_F(EX61, v) == pytest.approx(-0.2, abs=1e-7)

    def test_example_6_1_core_and_alpha_beta(self):
        b, _ = analysis.find_b(EX61, 1.8)
        v_core = analysis.compute_v_core(EX61, 1.8, b, 0.2)
        alpha, beta = analysis.compute_alpha_beta(EX61, 1.8, b, 0.2)
        assert v_core == pytest.approx(1.36, abs=5e-3)
        assert alpha == pytest.approx(v_core, abs=1e-6)
        assert beta == pytest.approx(analysis.compute_u_l(EX61, 1.8, b, 0.2),
                                     abs=1e-6)

    def test_monotone_F_inverse(self):
        # strictly increasing F on [b, a]: u_l and v_core are the two
        # inverse images of +-l
        b, _ = analysis.find_b(EX61, 1.8)
        for l in (0.05, 0.12, 0.25):
            u = analysis.compute_u_l(EX61, 1.8, b, l)
            vc = analysis.compute_v_core(EX61, 1.8, b, l)
            assert maps.eval_F(EX61, u) == pytest.approx(l, abs=1e-7)
            assert maps.eval_F(EX61, vc) == pytest.approx(-l, abs=1e-7)
            assert b < vc < u < 1.8

    def test_demo_4_3_ordering(self):
        alpha, beta = analysis.compute_alpha_beta(D43, 5.2, 1.5, 0.19)
        assert 1.5 < beta < 2.5
        assert 3.5 < alpha < 5.2
        assert beta < alpha

    def test_amplitude_preconditions(self):
        b, _ = analysis.find_b(EX61, 1.8)
        with pytest.raises(RootNotFoundError):
            analysis.compute_u_l(EX61, 1.8, b, 0.5)   # l >= F(a)
        with pytest.raises(RootNotFoundError):
            analysis.compute_v_l(EX61, 1.8, b, 0.35)  # l >= -F(b)
        with pytest.raises(PreconditionError):
            analysis.compute_u_l(EX61, 1.8, b, 0.0)


class TestMonotonicityInL:
    @pytest.mark.parametrize("m,a,ls", [
        (EX61, 1.8, [0.05, 0.1, 0.15, 0.2, 0.25]),
        (EX62, 0.2, [0.004, 0.008, 0.012, 0.016]),
    ])
    def test_threshold_monotonicity(self, m, a, ls):
        b, _ = analysis.find_b(m, a)
        u, vc, al, be, vo = [], [], [], [], []
        for l in ls:
            u.append(analysis.compute_u_l(m, a, b, l))
            vc.append(analysis.compute_v_core(m, a, b, l))
            vo.append(analysis.compute_v_l(m, a, b, l))
            x, y = analysis.compute_alpha_beta(m, a, b, l)
            al.append(x)
            be.append(y)
        tol = 1e-9
        assert all(x2 >= x1 - tol for x1, x2 in zip(u, u[1:]))       # u_l up
        assert all(x2 <= x1 + tol for x1, x2 in zip(vc, vc[1:]))     # v_core down
        assert all(x2 >= x1 - tol for x1, x2 in zip(be, be[1:]))     # beta_l up
        assert all(x2 <= x1 + tol for x1, x2 in zip(al, al[1:]))     # alpha_l down
        # the outer threshold moves outward (down toward 0 means the trapped
        # zone shrinks): first root of F = -l grows with l
        assert all(x2 >= x1 - tol for x1, x2 in zip(vo, vo[1:]))

    def test_ordering_chain(self):
        b, _ = analysis.find_b(EX61, 1.8)
        for l in (0.05, 0.1, 0.15, 0.2):
            v_out = analysis.compute_v_l(EX61, 1.8, b, l)
            v_core = analysis.compute_v_core(EX61, 1.8, b, l)
            u = analysis.compute_u_l(EX61, 1.8, b, l)
            assert 0.0 < v_out <= b < v_core < u < 1.8


class TestCorridorCondition:
    def test_demo_4_4_switch(self):
        r_hi = analysis.analyze_regime(D44, 12.3, 14.5, 0.1)
        r_lo = analysis.analyze_regime(D44, 12.3, 14.5, 0.05)
        assert r_hi.flbound_holds is True
        assert r_lo.flbound_holds is False

    def test_example_6_1_corridor_clean(self):
        r = analysis.analyze_regime(EX61, 1.8, 6.5, 0.2)
        assert r.flbound_holds is True
        assert r.F_monotone_on_core is True
        assert r.kappa is not None and r.kappa > 0.0

    def test_equivalence_with_root_identities(self):
        for m, a, H, l in [(D44, 12.3, 14.5, 0.1), (D44, 12.3, 14.5, 0.05),
                           (EX61, 1.8, 6.5, 0.2), (EX61, 1.8, 6.5, 0.1)]:
            r = analysis.analyze_regime(m, a, H, l)
            ident = (abs(r.beta_l - r.u_l) < 1e-6
                     and abs(r.alpha_l - r.v_core) < 1e-6)
            assert r.flbound_holds == ident


class TestLocalExtrema:
    def test_degenerate_interval(self):
        assert analysis.local_min_over(EX61, 1.3, 1.3) == maps.eval_F(EX61, 1.3)

    def test_example_6_1_A_oracle(self):
        # dense-grid oracle, independent of the golden-section path
        xs = np.linspace(1.0, 1.74, 1_000_001)
        oracle = maps.eval_F_vec(EX61, xs).min()
        val = analysis.local_min_over(EX61, 1.0, 1.74)
        assert val == pytest.approx(float(oracle), abs=1e-9)
        assert val == pytest.approx(maps.eval_F(EX61, 1.0), abs=1e-9)

    def test_demo_4_4_max_on_3_11(self):
        assert analysis.local_max_over(D44, 3.0, 11.0) == pytest.approx(
            1.0 / 12.0, abs=1e-9)


class TestHittingTime:
    def test_descent_and_ascent_finite(self):
        K_desc = analysis.hitting_time_bound(EX61, 1.8, 0.90733, 0.2, 1.1)
        assert K_desc >= 1
        K_asc = analysis.hitting_time_bound(EX61, 1.8, 0.90733, 0.2, 1.76)
        assert K_asc >= 1

    def test_already_trapped(self):
        assert analysis.hitting_time_bound(EX61, 1.8, 0.90733, 0.2, 0.2) == 0

    def test_boundary_is_domain_error(self):
        b, _ = analysis.find_b(EX61, 1.8)
        v_core = analysis.compute_v_core(EX61, 1.8, b, 0.2)
        with pytest.raises(PreconditionError):
            analysis.hitting_time_bound(EX61, 1.8, b, 0.2, v_core)

    def test_mixed_zone_is_domain_error(self):
        with pytest.raises(PreconditionError):
            analysis.hitting_time_bound(EX61, 1.8, 0.90733, 0.2, 1.5)

    def test_descent_budget_is_sound(self):
        # worst-case deterministic descent: iterate x <- f(x) + l and count
        b, _ = analysis.find_b(EX61, 1.8)
        for x0 in (1.0, 1.1, 1.2, 1.3):
            K = analysis.hitting_time_bound(EX61, 1.8, b, 0.2, x0)
            x, steps = x0, 0
            while x > b and steps <= K:
                x = maps.eval_f(EX61, x) + 0.2
                steps += 1
            assert steps <= K


class TestExpansivity:
    def test_linear_displacement(self):
        m = maps.from_script("piece 0 inf 1.5*x")  # F(x) = 0.5 x
        kappa = analysis.check_expansivity(m, 0.2, 1.0)
        assert kappa == pytest.approx(0.5, rel=1e-9)

    def test_example_6_1_core(self):
        r = analysis.analyze_regime(EX61, 1.8, 6.5, 0.2)
        kappa = analysis.check_expansivity(EX61, r.v_core, r.u_l)
        assert kappa is not None and kappa > 0.0

    def test_demo_4_4_oscillating_core(self):
        r = analysis.analyze_regime(D44, 12.3, 14.5, 0.05)
        assert analysis.check_expansivity(D44, r.v_core, r.u_l) is None
        assert r.kappa is None


class TestAnalyzeRegime:
    def test_escape_regime_example_6_2(self):
        r = analysis.analyze_regime(EX62, 0.2, 1.8, 0.04)
        assert r.regime == "escape"
        assert not r.has_thresholds
        assert r.escape_window is not None
        lo, hi = r.escape_window
        assert lo < 0.04 < hi

    def test_threshold_regime_example_6_2(self):
        r = analysis.analyze_regime(EX62, 0.2, 1.8, 0.01)
        assert r.regime == "threshold"
        assert 0.0 < r.v_l <= r.b < r.v_core < r.u_l < 0.2

    def test_no_regime(self):
        r = analysis.analyze_regime(EX61, 1.8, 6.5, 0.5)
        assert r.regime == "none"
        assert r.u_l is None

    def test_root_posteriors(self):
        r = analysis.analyze_regime(EX61, 1.8, 6.5, 0.2)
        assert abs(maps.eval_F(EX61, r.u_l) - 0.2) < 1e-7
        assert abs(maps.eval_F(EX61, r.v_l) + 0.2) < 1e-7
        assert abs(maps.eval_F(EX61, r.v_core) + 0.2) < 1e-7
        assert abs(maps.eval_F(EX61, r.alpha_l) + 0.2) < 1e-7
        assert abs(maps.eval_F(EX61, r.beta_l) - 0.2) < 1e-7


class TestPartialRegime:
    def test_demo_4_3_reports_alpha_beta_without_u(self):
        r = analysis.analyze_regime(D43, 5.2, 7.0, 0.19)
        assert r.regime == "partial"
        assert r.u_l is None and r.flbound_holds is None
        assert 1.5 < r.beta_l < 2.5
        assert 3.5 < r.alpha_l < 5.2
        assert r.v_l == pytest.approx(0.417, abs=5e-3)
        assert r.v_core == pytest.approx(2.019, abs=5e-3)

    def test_partial_regime_has_escape_threshold(self):
        r = analysis.analyze_regime(D43, 5.2, 7.0, 0.19)
        assert r.l_escape_threshold == pytest.approx(1.25, abs=1e-6)


class TestEdgeCases:
    def test_f_H_requires_positive_H(self):
        with pytest.raises(PreconditionError):
            analysis.compute_f_H(EX61, 0.0)

    def test_local_extrema_reject_reversed_interval(self):
        with pytest.raises(PreconditionError):
            analysis.local_min_over(EX61, 2.0, 1.0)

    def test_negative_amplitude_rejected(self):
        with pytest.raises(PreconditionError):
            analysis.analyze_regime(EX61, 1.8, 6.5, -0.1)

    def test_zero_amplitude_has_window_data_only(self):
        r = analysis.analyze_regime(EX61, 1.8, 6.5, 0.0)
        assert r.u_l is None and r.b > 0
