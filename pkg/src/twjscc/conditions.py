"""Achievability condition evaluators and the scheme-lifting maps.

Covers four condition families: the adaptive block-Markov conditions on the
stationary system chain, the single-block (non-adaptive) hybrid-coding
conditions, the separate source-channel conditions pairing Wyner-Ziv rates
with an adaptive channel scheme, and the non-adaptive Shannon random-coding
bound with time-sharing.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .coded_channel import Configuration
from .markov import (
    MarkovSystem,
    _solve_stationary,
    build_chain,
    pair_marginal,
    prev_axes_of,
    prev_law_residual,
    prev_to_reduced,
    stationary_prev_law,
)
from .models import DistortionMeasure, JointSource, TwoWayChannel
from .probability import (
    Alphabet,
    ConditionalPmf,
    JointPmf,
    conditional_mutual_information,
    marginalize,
    mutual_information,
)

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class ConditionReport:
    """Two-sided rate condition with strictness bookkeeping.

    satisfied requires both strict inequalities to hold with margin > tol;
    boundary flags reports whose worst margin sits within +-tol of zero.
    """

    lhs1: float
    rhs1: float
    lhs2: float
    rhs2: float
    satisfied: bool
    boundary: bool
    margin: float
    tol: float = DEFAULT_TOL

    @staticmethod
    def from_values(lhs1, rhs1, lhs2, rhs2, tol: float = DEFAULT_TOL) -> "ConditionReport":
        margin = min(rhs1 - lhs1, rhs2 - lhs2)
        satisfied = (lhs1 < rhs1 - tol) and (lhs2 < rhs2 - tol)
        boundary = (not satisfied) and margin >= -tol
        return ConditionReport(
            float(lhs1), float(rhs1), float(lhs2), float(rhs2), satisfied, boundary, float(margin), tol
        )

    def as_dict(self) -> dict:
        return {
            "lhs1": self.lhs1,
            "rhs1": self.rhs1,
            "lhs2": self.lhs2,
            "rhs2": self.rhs2,
            "satisfied": self.satisfied,
            "boundary": self.boundary,
            "margin": self.margin,
        }


# ---------------------------------------------------------------------------
# Single-block hybrid coding (non-adaptive)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HybridScheme:
    """Non-adaptive single-block scheme: codeword conditionals, symbol
    encoders x_j = f_j(s_j, u_j), and decoders g_j(u_j', s_j, u_j, y_j)."""

    pu1_given_s1: ConditionalPmf
    pu2_given_s2: ConditionalPmf
    f1: np.ndarray  # (|S1|, |U1|) -> x1
    f2: np.ndarray
    g1: np.ndarray  # (|U2|, |S1|, |U1|, |Y1|) -> recon of s2
    g2: np.ndarray  # (|U1|, |S2|, |U2|, |Y2|) -> recon of s1
    recon1: Alphabet
    recon2: Alphabet

    @property
    def s1(self) -> Alphabet:
        return self.pu1_given_s1.given_axes[0]

    @property
    def s2(self) -> Alphabet:
        return self.pu2_given_s2.given_axes[0]

    @property
    def u1(self) -> Alphabet:
        return self.pu1_given_s1.out_axes[0]

    @property
    def u2(self) -> Alphabet:
        return self.pu2_given_s2.out_axes[0]


def one_shot_hybrid_law(hs: HybridScheme, ch: TwoWayChannel, src: JointSource) -> JointPmf:
    """Single-block law over (s1, s2, u1, u2, x1, x2, y1, y2)."""
    t = (
        src.law.probs[:, :, None, None]
        * hs.pu1_given_s1.probs[:, None, :, None]
        * hs.pu2_given_s2.probs[None, :, None, :]
    )
    e1 = np.eye(ch.x1.size)[hs.f1]  # (s1, u1, x1)
    e2 = np.eye(ch.x2.size)[hs.f2]
    full = np.einsum("abcd,acx,bdw,xwyz->abcdxwyz", t, e1, e2, ch.law.probs)
    axes = (hs.s1, hs.s2, hs.u1, hs.u2, ch.x1, ch.x2, ch.y1, ch.y2)
    return JointPmf(axes, full)


@dataclass(frozen=True)
class HybridEvaluation:
    report: ConditionReport
    distortions: tuple[float, float]


def _table_distortion(marg: np.ndarray, table: np.ndarray, d: DistortionMeasure) -> float:
    """E[d(source, table(args))] where marg has the source on axis 0 and the
    table's arguments on the remaining axes."""
    idx = np.indices(marg.shape[1:], sparse=True)
    est = table[tuple(idx)]
    total = 0.0
    for s in range(marg.shape[0]):
        total += float(np.sum(marg[s] * d.table[s, est]))
    return total


def eval_hybrid(
    hs: HybridScheme,
    ch: TwoWayChannel,
    src: JointSource,
    d1: DistortionMeasure,
    d2: DistortionMeasure,
    tol: float = DEFAULT_TOL,
) -> HybridEvaluation:
    """Evaluate the single-block conditions and the decoders' distortions."""
    law = one_shot_hybrid_law(hs, ch, src)
    lhs1 = conditional_mutual_information(law, (0,), (2,), (1, 3))
    rhs1 = conditional_mutual_information(law, (2,), (7,), (1, 3))
    lhs2 = conditional_mutual_information(law, (1,), (3,), (0, 2))
    rhs2 = conditional_mutual_information(law, (3,), (6,), (0, 2))
    report = ConditionReport.from_values(lhs1, rhs1, lhs2, rhs2, tol)

    # terminal 1 rebuilds s2 via g1(u2, s1, u1, y1); terminal 2 mirrors
    marg2 = marginalize(law, (1, 3, 0, 2, 6)).probs
    dist2 = _table_distortion(marg2, hs.g1, d2)
    marg1 = marginalize(law, (0, 2, 1, 3, 7)).probs
    dist1 = _table_distortion(marg1, hs.g2, d1)
    return HybridEvaluation(report, (dist1, dist2))


def bayes_hybrid_decoders(
    pu1: ConditionalPmf,
    pu2: ConditionalPmf,
    f1: np.ndarray,
    f2: np.ndarray,
    ch: TwoWayChannel,
    src: JointSource,
    d1: DistortionMeasure,
    d2: DistortionMeasure,
) -> tuple[np.ndarray, np.ndarray]:
    """Optimal deterministic decoders for a single-block scheme.

    Ties break toward the lowest reconstruction index.
    """
    stub = HybridScheme(
        pu1, pu2, f1, f2,
        np.zeros((pu2.out_axes[0].size, pu1.given_axes[0].size, pu1.out_axes[0].size, ch.y1.size), dtype=np.int64),
        np.zeros((pu1.out_axes[0].size, pu2.given_axes[0].size, pu2.out_axes[0].size, ch.y2.size), dtype=np.int64),
        d1.recon_alphabet,
        d2.recon_alphabet,
    )
    law = one_shot_hybrid_law(stub, ch, src)
    # cost1[u2, s1, u1, y1, recon] for estimating s2
    m2 = marginalize(law, (1, 3, 0, 2, 6)).probs
    cost1 = np.einsum("sabcd,sr->abcdr", m2, d2.table)
    g1 = np.argmin(cost1, axis=-1)
    m1 = marginalize(law, (0, 2, 1, 3, 7)).probs
    cost2 = np.einsum("sabcd,sr->abcdr", m1, d1.table)
    g2 = np.argmin(cost2, axis=-1)
    return g1.astype(np.int64), g2.astype(np.int64)


def lift_hybrid(hs: HybridScheme, ch: TwoWayChannel, src: JointSource) -> Configuration:
    """Embed a single-block scheme in the block-Markov framework.

    The channel encoder consumes only the previous-block pair, so the
    current block's channel output is the one produced while that pair was
    on the air; the reconstruction map therefore feeds the single-block
    decoder with the previous pair and the current output.  The stationary
    previous-block law is solved and installed.
    """
    ns1, nu1 = hs.s1.size, hs.u1.size
    ns2, nu2 = hs.s2.size, hs.u2.size
    ny1, ny2 = ch.y1.size, ch.y2.size
    nio1 = ch.x1.size * ny1
    nio2 = ch.x2.size * ny2

    f1 = np.ascontiguousarray(
        np.broadcast_to(hs.f1[None, None, :, :, None], (ns1, nu1, ns1, nu1, nio1))
    )
    f2 = np.ascontiguousarray(
        np.broadcast_to(hs.f2[None, None, :, :, None], (ns2, nu2, ns2, nu2, nio2))
    )

    # g table axes (u_other, prev_s, prev_u, y) -> place at (0, 3, 4, 6)
    g1 = np.ascontiguousarray(
        np.broadcast_to(
            hs.g1[:, None, None, :, :, None, :], (nu2, ns1, nu1, ns1, nu1, nio1, ny1)
        )
    )
    g2 = np.ascontiguousarray(
        np.broadcast_to(
            hs.g2[:, None, None, :, :, None, :], (nu1, ns2, nu2, ns2, nu2, nio2, ny2)
        )
    )

    cfg = Configuration(
        u1=hs.u1,
        u2=hs.u2,
        pu1_given_s1=hs.pu1_given_s1,
        pu2_given_s2=hs.pu2_given_s2,
        prev_law=None,
        f1=f1,
        f2=f2,
        g1=g1,
        g2=g2,
        x1=ch.x1,
        x2=ch.x2,
        y1=ch.y1,
        y2=ch.y2,
        recon1=hs.recon1,
        recon2=hs.recon2,
    )
    prev = stationary_prev_law(cfg, ch, src)
    return dataclasses.replace(cfg, prev_law=prev)


# ---------------------------------------------------------------------------
# Adaptive block-Markov conditions
# ---------------------------------------------------------------------------


def _stationary_reduced(sys: MarkovSystem, cfg: Configuration, residual_tol: float):
    if cfg.prev_law is not None:
        res = prev_law_residual(sys)
        if res > 1e-8:
            raise ValueError(
                f"configuration's previous-block law is not stationary (residual {res:.3e})"
            )
        return prev_to_reduced(sys.reduced_shape, cfg.prev_law.probs)
    pi, _, _, _ = _solve_stationary(sys.kernel, residual_tol, 1e-13, 100_000)
    return pi


def eval_adaptive(
    cfg: Configuration,
    ch: TwoWayChannel,
    src: JointSource,
    tol: float = DEFAULT_TOL,
    simplify: bool = False,
) -> ConditionReport:
    """Evaluate the adaptive-coding conditions on the stationary state law.

    The raw form compares I(prev_s_j; prev_u_j) against the information the
    other terminal's whole current view carries about prev_u_j.  With
    simplify=True the quantities are reported in the reduced single-block
    form (both sides conditioned on the other previous pair, the right side
    keeping only the current channel output), which shifts both sides of
    each inequality by the same constant and so preserves margins.
    """
    sys = build_chain(cfg, ch, src)
    pi = _stationary_reduced(sys, cfg, residual_tol=1e-10)
    if not simplify:
        m = pair_marginal(sys, pi, (4, 6))
        lhs1 = mutual_information(m, (0,), (1,))
        m = pair_marginal(sys, pi, (6, 1, 3, 5, 7, 9, 11, 13))
        rhs1 = mutual_information(m, (0,), (1, 2, 3, 4, 5, 6, 7))
        m = pair_marginal(sys, pi, (5, 7))
        lhs2 = mutual_information(m, (0,), (1,))
        m = pair_marginal(sys, pi, (7, 0, 2, 4, 6, 8, 10, 12))
        rhs2 = mutual_information(m, (0,), (1, 2, 3, 4, 5, 6, 7))
    else:
        m = pair_marginal(sys, pi, (4, 6, 5, 7))
        lhs1 = conditional_mutual_information(m, (0,), (1,), (2, 3))
        m = pair_marginal(sys, pi, (6, 13, 5, 7))
        rhs1 = conditional_mutual_information(m, (0,), (1,), (2, 3))
        m = pair_marginal(sys, pi, (5, 7, 4, 6))
        lhs2 = conditional_mutual_information(m, (0,), (1,), (2, 3))
        m = pair_marginal(sys, pi, (7, 12, 4, 6))
        rhs2 = conditional_mutual_information(m, (0,), (1,), (2, 3))
    return ConditionReport.from_values(lhs1, rhs1, lhs2, rhs2, tol)


# ---------------------------------------------------------------------------
# Separate source-channel coding: WZ compression over an adaptive channel code
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdaptiveChannelScheme:
    """Channel-only adaptive scheme with memoryless codeword variables v_j,
    encoders x_j = gamma_j(v_j, prev_v_j, prev_io_j), and a previous-block
    law that factors as P(v1) P(v2) P(prev_v1, prev_v2, prev_io1, prev_io2)."""

    v1: Alphabet
    v2: Alphabet
    pv1: np.ndarray
    pv2: np.ndarray
    gamma1: np.ndarray  # (|V1|, |V1|, |io1|) -> x1
    gamma2: np.ndarray
    x1: Alphabet
    x2: Alphabet
    y1: Alphabet
    y2: Alphabet
    prev_vw_law: JointPmf | None = None  # axes (prev_v1, prev_v2, prev_io1, prev_io2)

    def __post_init__(self):
        for nm, pv, v in (("pv1", self.pv1, self.v1), ("pv2", self.pv2, self.v2)):
            arr = np.asarray(pv, dtype=np.float64)
            if arr.shape != (v.size,):
                raise ValueError(f"{nm} shape {arr.shape} does not match alphabet")
            if abs(arr.sum() - 1.0) > 1e-12 or np.any(arr < 0):
                raise ValueError(f"{nm} is not a probability vector")
            object.__setattr__(self, nm, arr)


@dataclass(frozen=True)
class WZScheme:
    """Side-information compression scheme for one source: the test-channel
    conditional P(t | s) and the other terminal's decoder h(s_other, t)."""

    t: Alphabet
    p_t_given_s: ConditionalPmf
    h: np.ndarray  # (|S_other|, |T|) -> reconstruction
    shat: Alphabet

    def __post_init__(self):
        if self.t.size > self.p_t_given_s.given_axes[0].size + 1:
            raise ValueError("auxiliary alphabet exceeds the |S|+1 cardinality cap")


def embed_adaptive_scheme(scheme: AdaptiveChannelScheme) -> Configuration:
    """Express a channel-only scheme as a configuration on a unit source.

    The source alphabets are singletons, the codeword variables play u_j,
    and the reconstruction maps are trivial; the system chain then reduces
    exactly to the scheme's own chain on (v, x, y).
    """
    unit = Alphabet(1, "unit")
    nv1, nv2 = scheme.v1.size, scheme.v2.size
    nio1 = scheme.x1.size * scheme.y1.size
    nio2 = scheme.x2.size * scheme.y2.size
    if scheme.gamma1.shape != (nv1, nv1, nio1) or scheme.gamma2.shape != (nv2, nv2, nio2):
        raise ValueError("gamma table shapes do not match scheme alphabets")
    pu1 = ConditionalPmf((unit,), (scheme.v1,), scheme.pv1[None, :])
    pu2 = ConditionalPmf((unit,), (scheme.v2,), scheme.pv2[None, :])
    prev = None
    if scheme.prev_vw_law is not None:
        expect = (nv1, nv2, nio1, nio2)
        if scheme.prev_vw_law.shape != expect:
            raise ValueError(f"prev_vw_law shape {scheme.prev_vw_law.shape}, expected {expect}")
        axes = (
            Alphabet(1, "prev_s1"), Alphabet(1, "prev_s2"),
            Alphabet(nv1, "prev_u1"), Alphabet(nv2, "prev_u2"),
            Alphabet(nio1, "prev_io1"), Alphabet(nio2, "prev_io2"),
        )
        prev = JointPmf(axes, scheme.prev_vw_law.probs.reshape(1, 1, nv1, nv2, nio1, nio2))
    return Configuration(
        u1=scheme.v1,
        u2=scheme.v2,
        pu1_given_s1=pu1,
        pu2_given_s2=pu2,
        prev_law=prev,
        f1=np.ascontiguousarray(scheme.gamma1[None, :, None, :, :]),
        f2=np.ascontiguousarray(scheme.gamma2[None, :, None, :, :]),
        g1=np.zeros((nv2, 1, nv1, 1, nv1, nio1, scheme.y1.size), dtype=np.int64),
        g2=np.zeros((nv1, 1, nv2, 1, nv2, nio2, scheme.y2.size), dtype=np.int64),
        x1=scheme.x1,
        x2=scheme.x2,
        y1=scheme.y1,
        y2=scheme.y2,
        recon1=unit,
        recon2=unit,
    )


def adaptive_scheme_stationary(scheme: AdaptiveChannelScheme, ch: TwoWayChannel) -> JointPmf:
    """Stationary (prev_v1, prev_v2, prev_io1, prev_io2) law of the scheme."""
    cfg = embed_adaptive_scheme(scheme)
    unit_src = JointSource(
        Alphabet(1, "unit"), Alphabet(1, "unit"), JointPmf((Alphabet(1),) * 2, np.ones((1, 1)))
    )
    prev = stationary_prev_law(cfg, ch, unit_src)
    probs = prev.probs.reshape(scheme.v1.size, scheme.v2.size, cfg.io1_size, cfg.io2_size)
    axes = (
        Alphabet(scheme.v1.size, "prev_v1"),
        Alphabet(scheme.v2.size, "prev_v2"),
        Alphabet(cfg.io1_size, "prev_io1"),
        Alphabet(cfg.io2_size, "prev_io2"),
    )
    return JointPmf(axes, probs)


def eval_sscc(
    scheme: AdaptiveChannelScheme,
    rate1: float,
    rate2: float,
    ch: TwoWayChannel,
    tol: float = DEFAULT_TOL,
) -> ConditionReport:
    """Compare supplied compression rates with the adaptive channel rates.

    rate_j is the Wyner-Ziv rate for source j; the right-hand sides are the
    information the other terminal's (x, y, prev_v, prev_io) view carries
    about prev_v_j under the scheme's stationary chain.
    """
    cfg = embed_adaptive_scheme(scheme)
    unit_src = JointSource(
        Alphabet(1, "unit"), Alphabet(1, "unit"), JointPmf((Alphabet(1),) * 2, np.ones((1, 1)))
    )
    sys = build_chain(cfg, ch, unit_src)
    pi = _stationary_reduced(sys, cfg, residual_tol=1e-10)
    m = pair_marginal(sys, pi, (6, 11, 13, 7, 9))
    rhs1 = mutual_information(m, (0,), (1, 2, 3, 4))
    m = pair_marginal(sys, pi, (7, 10, 12, 6, 8))
    rhs2 = mutual_information(m, (0,), (1, 2, 3, 4))
    return ConditionReport.from_values(rate1, rhs1, rate2, rhs2, tol)


def wz_scheme_rate(scheme: WZScheme, src: JointSource, which: int) -> float:
    """Operational rate I(S_w; T) - I(S_other; T) of a compression scheme."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    ps = src.law.probs if which == 1 else src.law.probs.T
    joint = ps[:, :, None] * scheme.p_t_given_s.probs[:, None, :]
    axes = (
        scheme.p_t_given_s.given_axes[0],
        Alphabet(ps.shape[1], "side"),
        scheme.t,
    )
    p = JointPmf(axes, joint)
    return mutual_information(p, (0,), (2,)) - mutual_information(p, (1,), (2,))


def lift_sscc(
    scheme: AdaptiveChannelScheme,
    wz1: WZScheme,
    wz2: WZScheme,
    src: JointSource,
) -> Configuration:
    """Build the configuration realizing WZ compression over the adaptive
    channel scheme: u_j packs (t_j, v_j) as t * |V_j| + v, the channel
    encoder uses only the v parts, and reconstruction applies the WZ
    decoders to (prev_s_own, prev_t_other)."""
    if scheme.prev_vw_law is None:
        raise ValueError("scheme needs a stationary prev_vw_law; see adaptive_scheme_stationary")
    ns1, ns2 = src.s1.size, src.s2.size
    nt1, nt2 = wz1.t.size, wz2.t.size
    nv1, nv2 = scheme.v1.size, scheme.v2.size
    nu1, nu2 = nt1 * nv1, nt2 * nv2
    nio1 = scheme.x1.size * scheme.y1.size
    nio2 = scheme.x2.size * scheme.y2.size
    if wz1.p_t_given_s.given_axes[0].size != ns1 or wz2.p_t_given_s.given_axes[0].size != ns2:
        raise ValueError("WZ conditional source axes do not match the source")
    if wz1.h.shape != (ns2, nt1) or wz2.h.shape != (ns1, nt2):
        raise ValueError("WZ decoder table shapes do not match")

    u1 = Alphabet(nu1, "u1=(t1,v1)")
    u2 = Alphabet(nu2, "u2=(t2,v2)")
    pu1 = np.einsum("st,v->stv", wz1.p_t_given_s.probs, scheme.pv1).reshape(ns1, nu1)
    pu2 = np.einsum("st,v->stv", wz2.p_t_given_s.probs, scheme.pv2).reshape(ns2, nu2)

    v_of_u1 = np.arange(nu1) % nv1
    v_of_u2 = np.arange(nu2) % nv2
    t_of_u1 = np.arange(nu1) // nv1
    t_of_u2 = np.arange(nu2) // nv2

    core1 = scheme.gamma1[v_of_u1][:, v_of_u1, :]  # (u1, prev_u1, io1)
    f1 = np.ascontiguousarray(
        np.broadcast_to(core1[None, :, None, :, :], (ns1, nu1, ns1, nu1, nio1))
    )
    core2 = scheme.gamma2[v_of_u2][:, v_of_u2, :]
    f2 = np.ascontiguousarray(
        np.broadcast_to(core2[None, :, None, :, :], (ns2, nu2, ns2, nu2, nio2))
    )

    # g1 estimates s2 from (prev_s1, t part of prev_u2); g2 mirrors
    a1 = wz2.h[:, t_of_u2].T  # (u2, prev_s1)
    g1 = np.ascontiguousarray(
        np.broadcast_to(
            a1[:, None, None, :, None, None, None],
            (nu2, ns1, nu1, ns1, nu1, nio1, scheme.y1.size),
        )
    )
    a2 = wz1.h[:, t_of_u1].T  # (u1, prev_s2)
    g2 = np.ascontiguousarray(
        np.broadcast_to(
            a2[:, None, None, :, None, None, None],
            (nu1, ns2, nu2, ns2, nu2, nio2, scheme.y2.size),
        )
    )

    st = np.einsum("ab,at,bw->abtw", src.law.probs, wz1.p_t_given_s.probs, wz2.p_t_given_s.probs)
    full = np.multiply.outer(st, scheme.prev_vw_law.probs)
    # axes (s1, s2, t1, t2, v1, v2, io1, io2) -> (s1, s2, (t1,v1), (t2,v2), io1, io2)
    full = np.transpose(full, (0, 1, 2, 4, 3, 5, 6, 7))
    prev_probs = np.ascontiguousarray(full).reshape(ns1, ns2, nu1, nu2, nio1, nio2)

    cfg = Configuration(
        u1=u1,
        u2=u2,
        pu1_given_s1=ConditionalPmf((src.s1,), (u1,), pu1),
        pu2_given_s2=ConditionalPmf((src.s2,), (u2,), pu2),
        prev_law=None,
        f1=f1,
        f2=f2,
        g1=g1,
        g2=g2,
        x1=scheme.x1,
        x2=scheme.x2,
        y1=scheme.y1,
        y2=scheme.y2,
        recon1=wz1.shat,
        recon2=wz2.shat,
    )
    prev = JointPmf(prev_axes_of(cfg), prev_probs)
    return dataclasses.replace(cfg, prev_law=prev)


# ---------------------------------------------------------------------------
# Non-adaptive Shannon random-coding bound with time-sharing
# ---------------------------------------------------------------------------


def _simplex_lattice(k: int, levels: int) -> np.ndarray:
    """All distributions on k symbols with masses at multiples of 1/levels."""
    if k == 1:
        return np.ones((1, 1))
    out = []
    for cuts in itertools.combinations(range(levels + k - 1), k - 1):
        prev = -1
        counts = []
        for c in cuts:
            counts.append(c - prev - 1)
            prev = c
        counts.append(levels + k - 2 - prev)
        out.append(counts)
    return np.asarray(out, dtype=np.float64) / levels


def _lattice_levels(k: int, grid: int) -> int:
    if k <= 2:
        return max(grid - 1, 1)
    levels = 1
    while comb(levels + k, k - 1) <= max(8 * grid, 64):
        levels += 1
    return levels


def _plogp(v: np.ndarray) -> float:
    m = v[v > 0]
    return float(np.sum(m * np.log2(m)))


def _pair_rates(chp: np.ndarray, p1: np.ndarray, p2: np.ndarray) -> tuple[float, float]:
    """(I(X1;Y2|X2), I(X2;Y1|X1)) for independent input distributions."""
    j = p1[:, None, None, None] * p2[None, :, None, None] * chp
    # I(X1;Y2|X2) = H(X1,X2) + H(Y2,X2) - H(X1,Y2,X2) - H(X2)
    h_x1x2 = -_plogp(j.sum(axis=(2, 3)))
    h_x2 = -_plogp(j.sum(axis=(0, 2, 3)))
    h_y2x2 = -_plogp(j.sum(axis=(0, 2)))
    h_x1y2x2 = -_plogp(j.sum(axis=2))
    i1 = h_x1x2 + h_y2x2 - h_x1y2x2 - h_x2
    h_x1 = -_plogp(j.sum(axis=(1, 2, 3)))
    h_y1x1 = -_plogp(j.sum(axis=(1, 3)))
    h_x2y1x1 = -_plogp(j.sum(axis=3))
    i2 = h_x1x2 + h_y1x1 - h_x2y1x1 - h_x1
    return max(i1, 0.0), max(i2, 0.0)


def _hull_upper_right(points: np.ndarray) -> np.ndarray:
    """Vertices of the concave upper-right frontier, sorted by rising r1."""
    pts = np.unique(np.round(points, 12), axis=0)
    order = np.lexsort((-pts[:, 1], pts[:, 0]))
    pts = pts[order]
    # Pareto-max filter (scan from the right keeps the staircase)
    keep = []
    best2 = -np.inf
    for p in pts[::-1]:
        if p[1] > best2 + 1e-15:
            keep.append(p)
            best2 = p[1]
    pts = np.asarray(keep[::-1])
    if len(pts) <= 2:
        return pts
    hull: list[np.ndarray] = []
    for p in pts:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
            if cross >= 0:  # b is under the chord a-p: not a vertex of the concave hull
                hull.pop()
            else:
                break
        hull.append(p)
    return np.asarray(hull)


def _segment_symmetric_max(a: np.ndarray, b: np.ndarray) -> float:
    best = max(min(a[0], a[1]), min(b[0], b[1]))
    d = (b[0] - a[0]) - (b[1] - a[1])
    if abs(d) > 1e-15:
        t = (a[1] - a[0]) / d
        if 0.0 < t < 1.0:
            p = a + t * (b - a)
            best = max(best, min(p[0], p[1]))
    return best


def shannon_nonadaptive_bound(
    ch: TwoWayChannel,
    q_size: int = 4,
    grid: int = 21,
    refine_rounds: int = 2,
    frontier_weights: int = 41,
) -> dict:
    """Optimize the non-adaptive random-coding rate pair over product inputs.

    Grid-searches independent input distributions (with local refinement
    around the symmetric incumbent) and, for q_size >= 2, convexifies the
    resulting rate cloud; time-sharing makes the reachable set the convex
    hull of the product-input points, so any q_size >= 2 saturates it.
    Returns the maximal symmetric rate and a weighted-sum frontier sweep.
    """
    if q_size < 1:
        raise ValueError("q_size must be >= 1")
    chp = ch.law.probs
    lat1 = _simplex_lattice(ch.x1.size, _lattice_levels(ch.x1.size, grid))
    lat2 = _simplex_lattice(ch.x2.size, _lattice_levels(ch.x2.size, grid))

    def sweep(cands1, cands2):
        pts = np.empty((len(cands1) * len(cands2), 2))
        k = 0
        for p1 in cands1:
            for p2 in cands2:
                pts[k] = _pair_rates(chp, p1, p2)
                k += 1
        return pts

    points = sweep(lat1, lat2)
    all_points = [points]
    sym_vals = np.minimum(points[:, 0], points[:, 1])
    best_idx = int(np.argmax(sym_vals))
    best1 = lat1[best_idx // len(lat2)]
    best2 = lat2[best_idx % len(lat2)]

    for r in range(1, refine_rounds + 1):
        alpha = 10.0 ** (-r)
        c1 = (1 - alpha) * best1[None, :] + alpha * lat1
        c2 = (1 - alpha) * best2[None, :] + alpha * lat2
        pts = sweep(c1, c2)
        all_points.append(pts)
        sym = np.minimum(pts[:, 0], pts[:, 1])
        i = int(np.argmax(sym))
        if sym[i] > np.max(sym_vals):
            best1 = c1[i // len(c2)]
            best2 = c2[i % len(c2)]
        sym_vals = np.concatenate([sym_vals, sym])

    cloud = np.concatenate(all_points)
    if q_size == 1:
        symmetric_max = float(np.max(np.minimum(cloud[:, 0], cloud[:, 1])))
        frontier_pool = cloud
    else:
        hull = _hull_upper_right(cloud)
        symmetric_max = max(min(float(p[0]), float(p[1])) for p in hull)
        for a, b in zip(hull[:-1], hull[1:]):
            symmetric_max = max(symmetric_max, _segment_symmetric_max(a, b))
        frontier_pool = hull

    frontier = []
    for lam in np.linspace(0.0, 1.0, frontier_weights):
        scores = lam * frontier_pool[:, 0] + (1 - lam) * frontier_pool[:, 1]
        frontier.append(tuple(frontier_pool[int(np.argmax(scores))]))
    frontier = sorted(set((round(a, 12), round(b, 12)) for a, b in frontier))
    return {
        "symmetric_max": symmetric_max,
        "frontier": [(float(a), float(b)) for a, b in frontier],
        "q_size": q_size,
    }
