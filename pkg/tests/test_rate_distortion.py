import numpy as np
import pytest

import twjscc as tw
from twjscc.probability import Alphabet, bernoulli, binary_entropy, conditional_entropy
from twjscc.rate_distortion import (
    InfeasibleDistortion,
    blahut_arimoto,
    rd_curve,
    rd_function,
    wz_curve,
    wz_function,
)


@pytest.fixture
def binary_symmetric():
    p = bernoulli(0.5)
    return p, tw.hamming(p.axes[0])


class TestRdFunction:
    def test_binary_symmetric_closed_form(self, binary_symmetric):
        p, d = binary_symmetric
        assert rd_function(p, d, 0.11) == pytest.approx(1 - binary_entropy(0.11), abs=1e-4)

    def test_zero_rate_above_constant_guess(self, binary_symmetric):
        p, d = binary_symmetric
        assert rd_function(p, d, 0.5) == 0.0
        assert rd_function(p, d, 0.75) == 0.0

    def test_lossless_limit(self, binary_symmetric):
        p, d = binary_symmetric
        assert rd_function(p, d, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_biased_source_lossless(self):
        p = bernoulli(0.89)
        d = tw.hamming(p.axes[0])
        assert rd_function(p, d, 0.0) == pytest.approx(binary_entropy(0.89), abs=1e-12)

    def test_infeasible_distortion_rejected(self, binary_symmetric):
        p, d = binary_symmetric
        with pytest.raises(InfeasibleDistortion):
            rd_function(p, d, -0.01)

    def test_ternary_uniform_interior_point_below_entropy(self):
        p = tw.JointPmf((Alphabet(3),), np.full(3, 1 / 3))
        d = tw.hamming(p.axes[0])
        r = rd_function(p, d, 0.2)
        assert 0.0 < r < np.log2(3)


class TestBlahutArimoto:
    def test_objective_monotone_nonincreasing(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            p = rng.dirichlet(np.ones(3))
            dist = rng.uniform(0.0, 2.0, size=(3, 3))
            np.fill_diagonal(dist, 0.0)
            res = blahut_arimoto(p, dist, beta=rng.uniform(0.5, 5.0))
            hist = np.array(res.objective_history)
            assert np.all(np.diff(hist) <= 1e-12)

    def test_returns_consistent_rate_distortion(self):
        res = blahut_arimoto(np.array([0.5, 0.5]), 1.0 - np.eye(2), beta=2.0)
        assert 0.0 <= res.rate <= 1.0
        assert 0.0 <= res.distortion <= 0.5


class TestRdCurve:
    def test_curve_matches_closed_form(self, binary_symmetric):
        p, d = binary_symmetric
        grid = [0.0, 0.05, 0.11, 0.25, 0.5]
        curve = rd_curve(p, d, grid)
        for (dd, rr) in curve.points:
            want = 1 - binary_entropy(dd) if dd < 0.5 else 0.0
            assert rr == pytest.approx(want, abs=1e-4)

    def test_curve_non_increasing(self, binary_symmetric):
        p, d = binary_symmetric
        curve = rd_curve(p, d, np.linspace(0, 0.6, 13))
        rates = [r for _, r in curve.points]
        assert all(b <= a + 1e-12 for a, b in zip(rates, rates[1:]))

    def test_endpoints_match_single_evaluations(self, binary_symmetric):
        p, d = binary_symmetric
        curve = rd_curve(p, d, [0.0, 0.3])
        assert curve.points[0][1] == pytest.approx(rd_function(p, d, 0.0), abs=1e-9)
        assert curve.points[1][1] == pytest.approx(rd_function(p, d, 0.3), abs=1e-9)


class TestWzFunction:
    def test_example2_lossless_rate(self):
        src = tw.preset_example2_source()
        res = wz_function(src, 1, tw.hamming(src.s1), 0.0)
        assert res.rate == pytest.approx(2 / 3, abs=1e-3)
        assert res.distortion == 0.0
        assert res.scheme.t.size == 3

    def test_symmetric_source_sides_agree(self):
        src = tw.preset_example2_source()
        r1 = wz_function(src, 1, tw.hamming(src.s1), 0.0).rate
        r2 = wz_function(src, 2, tw.hamming(src.s2), 0.0).rate
        assert r1 == pytest.approx(r2, abs=1e-9)

    def test_independent_side_information_matches_rd(self):
        src = tw.preset_independent_bernoulli(0.5, 0.5)
        d = tw.hamming(src.s1)
        for target in (0.05, 0.2):
            wz = wz_function(src, 1, d, target).rate
            rd = rd_function(bernoulli(0.5), d, target)
            assert wz == pytest.approx(rd, abs=5e-3)

    def test_max_distortion_needs_no_rate(self):
        src = tw.preset_example2_source()
        d = tw.hamming(src.s1)
        assert wz_function(src, 1, d, d.d_max).rate == 0.0

    def test_infeasible_target_rejected(self):
        src = tw.preset_example2_source()
        with pytest.raises(InfeasibleDistortion):
            wz_function(src, 1, tw.hamming(src.s1), -0.1)

    def test_rate_sandwich(self):
        # 0 <= R_wz <= R <= H for matching targets, up to grid slack
        rng = np.random.default_rng(1)
        for _ in range(3):
            law = rng.dirichlet(np.ones(4)).reshape(2, 2)
            sa = Alphabet(2)
            src = tw.JointSource(sa, sa, tw.JointPmf((sa, sa), law))
            d = tw.hamming(sa)
            marg = tw.marginalize(src.law, (0,))
            target = 0.1
            r_wz = wz_function(src, 1, d, target).rate
            r_rd = rd_function(marg, d, target)
            assert -1e-12 <= r_wz <= r_rd + 5e-3
            assert r_rd <= tw.entropy(marg) + 1e-9

    def test_lossless_rate_is_conditional_entropy(self):
        rng = np.random.default_rng(2)
        for _ in range(3):
            law = rng.dirichlet(np.ones(4)).reshape(2, 2)
            sa = Alphabet(2)
            src = tw.JointSource(sa, sa, tw.JointPmf((sa, sa), law))
            res = wz_function(src, 1, tw.hamming(sa), 0.0)
            assert res.rate == pytest.approx(conditional_entropy(src.law, 0, 1), abs=1e-3)


class TestWzCurve:
    def test_non_increasing_and_endpoint(self):
        src = tw.preset_example2_source()
        d = tw.hamming(src.s1)
        curve = wz_curve(src, 1, d, [0.0, 0.1, 0.3, 1.0])
        rates = [r for _, r in curve.points]
        assert all(b <= a + 1e-12 for a, b in zip(rates, rates[1:]))
        assert rates[-1] == 0.0
        assert rates[0] == pytest.approx(2 / 3, abs=1e-3)
