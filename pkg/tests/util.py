"""Shared builders for randomized test instances."""

import numpy as np

import twjscc as tw
from twjscc.conditions import (
    AdaptiveChannelScheme,
    HybridScheme,
    WZScheme,
    bayes_hybrid_decoders,
)
from twjscc.probability import Alphabet, ConditionalPmf


def random_binary_channel(rng) -> tw.TwoWayChannel:
    xa, ya = Alphabet(2, "x"), Alphabet(2, "y")
    law = rng.gamma(1.0, 1.0, size=(2, 2, 2, 2))
    law /= law.sum(axis=(2, 3), keepdims=True)
    return tw.TwoWayChannel(xa, xa, ya, ya, ConditionalPmf((xa, xa), (ya, ya), law))


def random_joint_source(rng) -> tw.JointSource:
    sa = Alphabet(2, "s")
    law = rng.gamma(1.0, 1.0, size=(2, 2))
    law /= law.sum()
    return tw.JointSource(sa, sa, tw.JointPmf((sa, sa), law))


def random_hybrid_scheme(rng, src, ch, d1, d2, bayes=False) -> HybridScheme:
    u = Alphabet(2, "u")
    pu1 = ConditionalPmf((src.s1,), (u,), rng.dirichlet(np.ones(2), size=src.s1.size))
    pu2 = ConditionalPmf((src.s2,), (u,), rng.dirichlet(np.ones(2), size=src.s2.size))
    f1 = rng.integers(0, ch.x1.size, size=(src.s1.size, 2))
    f2 = rng.integers(0, ch.x2.size, size=(src.s2.size, 2))
    if bayes:
        g1, g2 = bayes_hybrid_decoders(pu1, pu2, f1, f2, ch, src, d1, d2)
    else:
        g1 = rng.integers(0, d2.recon_alphabet.size, size=(2, src.s1.size, 2, ch.y1.size))
        g2 = rng.integers(0, d1.recon_alphabet.size, size=(2, src.s2.size, 2, ch.y2.size))
    return HybridScheme(pu1, pu2, f1, f2, g1, g2, d1.recon_alphabet, d2.recon_alphabet)


def random_configuration(rng, ch, src, aux1=2, aux2=2) -> tw.Configuration:
    """Random binary-auxiliary configuration without a previous-block law."""
    u1, u2 = Alphabet(aux1, "u1"), Alphabet(aux2, "u2")
    pu1 = ConditionalPmf((src.s1,), (u1,), rng.dirichlet(np.ones(aux1), size=src.s1.size))
    pu2 = ConditionalPmf((src.s2,), (u2,), rng.dirichlet(np.ones(aux2), size=src.s2.size))
    nio1 = ch.x1.size * ch.y1.size
    nio2 = ch.x2.size * ch.y2.size
    return tw.Configuration(
        u1=u1, u2=u2, pu1_given_s1=pu1, pu2_given_s2=pu2, prev_law=None,
        f1=rng.integers(0, ch.x1.size, size=(src.s1.size, aux1, src.s1.size, aux1, nio1)),
        f2=rng.integers(0, ch.x2.size, size=(src.s2.size, aux2, src.s2.size, aux2, nio2)),
        g1=rng.integers(0, src.s2.size, size=(aux2, src.s1.size, aux1, src.s1.size, aux1, nio1, ch.y1.size)),
        g2=rng.integers(0, src.s1.size, size=(aux1, src.s2.size, aux2, src.s2.size, aux2, nio2, ch.y2.size)),
        x1=ch.x1, x2=ch.x2, y1=ch.y1, y2=ch.y2,
        recon1=Alphabet(src.s1.size), recon2=Alphabet(src.s2.size),
    )


def random_adaptive_scheme(rng, ch) -> AdaptiveChannelScheme:
    v = Alphabet(2, "v")
    nio1 = ch.x1.size * ch.y1.size
    nio2 = ch.x2.size * ch.y2.size
    return AdaptiveChannelScheme(
        v, v,
        rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2)),
        rng.integers(0, ch.x1.size, size=(2, 2, nio1)),
        rng.integers(0, ch.x2.size, size=(2, 2, nio2)),
        ch.x1, ch.x2, ch.y1, ch.y2,
    )


def random_wz_scheme(rng, src, which) -> WZScheme:
    s = src.s1 if which == 1 else src.s2
    other = src.s2 if which == 1 else src.s1
    t = Alphabet(2, "t")
    return WZScheme(
        t,
        ConditionalPmf((s,), (t,), rng.dirichlet(np.ones(2), size=s.size)),
        rng.integers(0, s.size, size=(other.size, 2)),
        Alphabet(s.size, "shat"),
    )


def bsc_codeword_scheme(ch, src, q, d1, d2) -> HybridScheme:
    """Identity-input hybrid scheme whose codeword is the source through a
    binary symmetric test channel with crossover q."""
    u = Alphabet(2, "u")
    rows = np.array([[1 - q, q], [q, 1 - q]])
    pu1 = ConditionalPmf((src.s1,), (u,), rows)
    pu2 = ConditionalPmf((src.s2,), (u,), rows)
    f = np.array([[0, 1], [0, 1]])
    g1, g2 = bayes_hybrid_decoders(pu1, pu2, f, f, ch, src, d1, d2)
    return HybridScheme(pu1, pu2, f, f, g1, g2, d1.recon_alphabet, d2.recon_alphabet)
