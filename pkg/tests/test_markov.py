import dataclasses

import numpy as np
import pytest

import twjscc as tw
from twjscc.coded_channel import fresh_law
from twjscc.markov import (
    build_chain,
    check_configuration,
    pair_marginal,
    prev_law_residual,
    prev_to_reduced,
    reconstruction_distortions,
    reduced_to_prev,
    solve_stationary,
    stationary_distribution,
    stationary_prev_law,
)
from twjscc.probability import Alphabet, ConditionalPmf, JointPmf, marginalize
from twjscc.region import identity_hybrid_configuration, uncoded_configuration

from util import random_binary_channel, random_configuration, random_joint_source


@pytest.fixture
def bmc_setup():
    ch = tw.preset_bmc()
    src = tw.preset_example2_source()
    d = tw.hamming(src.s1)
    return ch, src, d


class TestKernel:
    def test_binary_bmc_successor_count(self):
        # full-support binary codewords over the deterministic product
        # channel: 16 fresh draws, one output pair each
        from twjscc.conditions import lift_hybrid
        from util import bsc_codeword_scheme

        ch = tw.preset_bmc()
        src = tw.preset_independent_bernoulli(0.4, 0.6)
        d = tw.hamming(src.s1)
        cfg = lift_hybrid(bsc_codeword_scheme(ch, src, 0.3, d, d), ch, src)
        sys = build_chain(cfg, ch, src)
        per_row = np.diff(sys.kernel.indptr)
        assert np.all(per_row == 16)

    def test_rows_sum_to_one(self, bmc_setup):
        ch, src, d = bmc_setup
        cfg = uncoded_configuration(ch, src, d, d)
        sys = build_chain(cfg, ch, src)
        assert np.allclose(np.asarray(sys.kernel.sum(axis=1)).ravel(), 1.0, atol=1e-12)

    def test_successor_cap_structural(self):
        # nonzeros per row never exceed (fresh draws) x (output pairs)
        rng = np.random.default_rng(0)
        ch = random_binary_channel(rng)
        src = random_joint_source(rng)
        cfg = random_configuration(rng, ch, src)
        sys = build_chain(cfg, ch, src)
        cap = 16 * 4
        assert np.max(np.diff(sys.kernel.indptr)) <= cap

    def test_state_cap_enforced(self, bmc_setup):
        ch, src, d = bmc_setup
        cfg = uncoded_configuration(ch, src, d, d)
        with pytest.raises(ValueError):
            build_chain(cfg, ch, src, state_cap=10)

    def test_copy_structure_of_next_state(self, bmc_setup):
        # the previous-block axes of the pair law reproduce the reduced
        # stationary law exactly (the next state copies the current one)
        ch, src, d = bmc_setup
        cfg = uncoded_configuration(ch, src, d, d)
        sys = build_chain(cfg, ch, src)
        pi = solve_stationary(sys)
        prev_curr = pair_marginal(sys, pi, (4, 5, 6, 7, 8, 9)).probs
        assert np.allclose(prev_curr, reduced_to_prev(sys, pi), atol=1e-12)


class TestStationary:
    def test_memoryless_encoder_matches_one_step_law(self, bmc_setup):
        # x depends only on the fresh block, so the chain is i.i.d. and the
        # stationary law equals the one-step construction
        ch, src, d = bmc_setup
        cfg = uncoded_configuration(ch, src, d, d)
        sys = build_chain(cfg, ch, src)
        pi = solve_stationary(sys)
        psu = fresh_law(cfg, src)
        expected = np.zeros(sys.reduced_shape)
        for s1 in range(2):
            for s2 in range(2):
                x1, x2 = s1, s2
                y = x1 * x2
                expected[s1, s2, 0, 0, x1, x2, y, y] += psu[s1, s2, 0, 0]
        assert np.abs(pi - expected.reshape(-1)).sum() <= 1e-12

    def test_single_state_chain(self):
        one = Alphabet(1)
        law = ConditionalPmf((one, one), (one, one), np.ones((1, 1, 1, 1)))
        ch = tw.TwoWayChannel(one, one, one, one, law)
        src = tw.JointSource(one, one, JointPmf((one, one), np.ones((1, 1))))
        cfg = tw.Configuration(
            u1=one, u2=one,
            pu1_given_s1=ConditionalPmf((one,), (one,), np.ones((1, 1))),
            pu2_given_s2=ConditionalPmf((one,), (one,), np.ones((1, 1))),
            prev_law=None,
            f1=np.zeros((1, 1, 1, 1, 1), dtype=np.int64),
            f2=np.zeros((1, 1, 1, 1, 1), dtype=np.int64),
            g1=np.zeros((1, 1, 1, 1, 1, 1, 1), dtype=np.int64),
            g2=np.zeros((1, 1, 1, 1, 1, 1, 1), dtype=np.int64),
            x1=one, x2=one, y1=one, y2=one, recon1=one, recon2=one,
        )
        sys = build_chain(cfg, ch, src)
        pi = solve_stationary(sys)
        assert pi.shape == (1,)
        assert pi[0] == pytest.approx(1.0)

    def test_residual_contract_on_presets(self, bmc_setup):
        ch, src, d = bmc_setup
        for cfg in (uncoded_configuration(ch, src, d, d), identity_hybrid_configuration(ch, src, d, d)):
            sys = build_chain(cfg, ch, src)
            solve_stationary(sys)
            assert sys.residual <= 1e-10

    def test_full_state_law_round_trip(self, bmc_setup):
        ch, src, d = bmc_setup
        cfg = uncoded_configuration(ch, src, d, d)
        sys = build_chain(cfg, ch, src)
        z = stationary_distribution(sys)
        assert z.probs.sum() == pytest.approx(1.0, abs=1e-12)
        # fresh marginal matches the source/codeword construction
        assert np.allclose(marginalize(z, (0, 1, 2, 3)).probs, fresh_law(cfg, src), atol=1e-12)

    def test_sparse_marginals_agree_with_dense_pair_law(self):
        # dense pair tensor and sparse scatter are independent index paths;
        # they must produce identical marginals
        rng = np.random.default_rng(8)
        ch = random_binary_channel(rng)
        src = random_joint_source(rng)
        cfg = random_configuration(rng, ch, src)
        sys = build_chain(cfg, ch, src)
        pi = solve_stationary(sys)
        from twjscc.markov import pair_law

        z = pair_law(sys, pi)
        for keep in [(k,) for k in range(14)] + [(4, 6), (6, 1, 3, 5, 7, 9, 11, 13), (8, 13, 0)]:
            dense = marginalize(z, keep).probs
            sparse = pair_marginal(sys, pi, keep).probs
            assert np.abs(dense - sparse).max() <= 1e-13


class TestSolverPaths:
    def test_periodic_chain_needs_lazy_iteration(self):
        # A<->B two-cycle fed by transient C: plain iteration oscillates,
        # the half-lazy kernel settles on the cycle's stationary law
        import scipy.sparse as sp
        from twjscc.markov import _solve_stationary

        k = sp.csr_matrix(np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
        pi, res, unique, _ = _solve_stationary(k, tol=1e-10, target=1e-13, max_iter=50_000)
        assert res <= 1e-10
        assert np.allclose(pi, [0.5, 0.5, 0.0], atol=1e-9)

    def test_null_space_fallback_on_slow_chain(self):
        # spectral gap far too small for three iterations from the uniform
        # start: the dense solve must recover the exact fixed point
        import scipy.sparse as sp
        from twjscc.markov import _solve_stationary

        a, b = 1e-6, 3e-6
        k = sp.csr_matrix(np.array([[1 - a, a], [b, 1 - b]]))
        pi, res, unique, _ = _solve_stationary(k, tol=1e-10, target=1e-13, max_iter=3)
        assert res <= 1e-10
        assert unique is True
        assert np.allclose(pi, [0.75, 0.25], atol=1e-6)

    def test_non_uniqueness_flagged_in_fallback(self):
        import scipy.sparse as sp
        from twjscc.markov import _solve_stationary

        a, b = 1e-6, 3e-6
        block = np.array([[1 - a, a], [b, 1 - b]])
        other = np.array([[1 - b, b], [a, 1 - a]])
        k = sp.csr_matrix(np.block([[block, np.zeros((2, 2))], [np.zeros((2, 2)), other]]))
        pi, res, unique, _ = _solve_stationary(k, tol=1e-10, target=1e-13, max_iter=3)
        assert res <= 1e-10
        assert unique is False


class TestStationaryPrevLaw:
    def test_memoryless_encoder_pushforward(self, bmc_setup):
        ch, src, d = bmc_setup
        cfg = uncoded_configuration(ch, src, d, d)
        prev = stationary_prev_law(cfg, ch, src)
        # expected: fresh (s, u) with io = (x=s_j, y=s1*s2)
        expected = np.zeros(prev.shape)
        for s1 in range(2):
            for s2 in range(2):
                y = s1 * s2
                expected[s1, s2, 0, 0, s1 * 2 + y, s2 * 2 + y] += src.law.probs[s1, s2]
        assert np.abs(prev.probs - expected).sum() <= 1e-10

    def test_installed_prev_law_is_fixed_point(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            ch = random_binary_channel(rng)
            src = random_joint_source(rng)
            cfg = random_configuration(rng, ch, src)
            prev = stationary_prev_law(cfg, ch, src)
            cfg = dataclasses.replace(cfg, prev_law=prev)
            sys = build_chain(cfg, ch, src)
            assert prev_law_residual(sys) <= 1e-10
            # the stationary previous-block marginal reproduces the law itself
            pi = prev_to_reduced(sys.reduced_shape, prev.probs)
            marg = pair_marginal(sys, pi, (4, 5, 6, 7, 8, 9)).probs
            assert np.abs(marg - prev.probs).sum() <= 1e-9

    def test_constant_chain_gives_point_mass(self):
        one = Alphabet(1)
        two = Alphabet(2)
        law = np.zeros((2, 2, 2, 2))
        law[:, :, 1, 1] = 1.0  # outputs stuck at 1
        ch = tw.TwoWayChannel(two, two, two, two, ConditionalPmf((two, two), (two, two), law))
        src = tw.JointSource(two, two, tw.JointPmf((two, two), np.array([[0.0, 0.0], [0.0, 1.0]])))
        cfg = tw.Configuration(
            u1=one, u2=one,
            pu1_given_s1=ConditionalPmf((two,), (one,), np.ones((2, 1))),
            pu2_given_s2=ConditionalPmf((two,), (one,), np.ones((2, 1))),
            prev_law=None,
            f1=np.ones((2, 1, 2, 1, 4), dtype=np.int64),
            f2=np.ones((2, 1, 2, 1, 4), dtype=np.int64),
            g1=np.zeros((1, 2, 1, 2, 1, 4, 2), dtype=np.int64),
            g2=np.zeros((1, 2, 1, 2, 1, 4, 2), dtype=np.int64),
            x1=two, x2=two, y1=two, y2=two, recon1=two, recon2=two,
        )
        prev = stationary_prev_law(cfg, ch, src)
        # all mass on s=(1,1), u=(0,0), io=(x=1,y=1) on both sides
        assert prev.probs[1, 1, 0, 0, 3, 3] == pytest.approx(1.0, abs=1e-12)


class TestReconstruction:
    def test_stored_output_read_back_is_lossless(self):
        # crossed pipes transmit the current source; the other terminal's
        # next-block state stores it verbatim inside the io symbol
        ch = tw.preset_crossed_bitpipes()
        src = tw.preset_example2_source()
        d = tw.hamming(src.s1)
        cfg = uncoded_configuration(ch, src, d, d)
        res = check_configuration(cfg, ch, src, d, d, 0.0, 0.0)
        assert res.feasible
        assert res.distortions == (0.0, 0.0)

    def test_uncoded_bmc_example2_lossless(self, bmc_setup):
        ch, src, d = bmc_setup
        cfg = uncoded_configuration(ch, src, d, d)
        sys = build_chain(cfg, ch, src)
        pi = prev_to_reduced(sys.reduced_shape, cfg.prev_law.probs)
        assert reconstruction_distortions(sys, d, d, pi_reduced=pi) == (0.0, 0.0)

    def test_constant_reconstruction_distortion(self, bmc_setup):
        ch, src, d = bmc_setup
        cfg = uncoded_configuration(ch, src, d, d)
        cz = dataclasses.replace(
            cfg,
            g1=np.zeros_like(cfg.g1),
            g2=np.zeros_like(cfg.g2),
        )
        sys = build_chain(cz, ch, src)
        pi = prev_to_reduced(sys.reduced_shape, cz.prev_law.probs)
        dist = reconstruction_distortions(sys, d, d, pi_reduced=pi)
        # constant guess 0 misses whenever the previous source letter is 1
        assert dist[0] == pytest.approx(2 / 3, abs=1e-12)
        assert dist[1] == pytest.approx(2 / 3, abs=1e-12)


class TestFeasibility:
    def test_perfect_configuration_feasible_at_zero(self, bmc_setup):
        ch, src, d = bmc_setup
        cfg = uncoded_configuration(ch, src, d, d)
        assert check_configuration(cfg, ch, src, d, d, 0.0, 0.0).feasible

    def test_constant_decoder_not_feasible_at_zero(self, bmc_setup):
        ch, src, d = bmc_setup
        cfg = uncoded_configuration(ch, src, d, d)
        cz = dataclasses.replace(cfg, g1=np.zeros_like(cfg.g1), g2=np.zeros_like(cfg.g2))
        assert not check_configuration(cz, ch, src, d, d, 0.0, 0.0).feasible

    def test_nonstationary_prev_law_not_feasible(self, bmc_setup):
        ch, src, d = bmc_setup
        cfg = uncoded_configuration(ch, src, d, d)
        # a product law that ignores the chain dynamics is not a fixed point
        bad = np.full(cfg.prev_law.shape, 1.0)
        bad /= bad.sum()
        cb = dataclasses.replace(cfg, prev_law=tw.JointPmf(cfg.prev_law.axes, bad))
        res = check_configuration(cb, ch, src, d, d, 1.0, 1.0)
        assert not res.feasible
        assert res.stationary_residual > 1e-6
