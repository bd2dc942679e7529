"""Configurations and the auxiliary coded-channel law they induce.

A configuration couples fresh per-block variables (s_j, u_j) with the
previous block's state: its source/codeword pair and the channel
input/output pair observed there.  The input/output pair at terminal j is
flattened to a single "io" symbol io = x * |Y_j| + y; that indexing is used
everywhere, including file formats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import JointSource, TwoWayChannel
from .probability import Alphabet, ConditionalPmf, JointPmf

# Axis order of a previous-block law: the two sources, the two codewords,
# and the two flattened input/output pairs.
PREV_AXES = ("prev_s1", "prev_s2", "prev_u1", "prev_u2", "prev_io1", "prev_io2")


def io_index(x: np.ndarray | int, y: np.ndarray | int, y_size: int):
    """Flatten a channel (input, output) pair to one symbol."""
    return x * y_size + y


def io_split(io: np.ndarray | int, y_size: int):
    """Inverse of io_index: recover (x, y) from a flattened io symbol."""
    return io // y_size, io % y_size


def _check_table(name: str, table: np.ndarray, shape: tuple[int, ...], out_size: int) -> np.ndarray:
    arr = np.asarray(table)
    if arr.shape != shape:
        raise ValueError(f"{name} table shape {arr.shape}, expected {shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"{name} table must hold integers")
    if arr.size and (arr.min() < 0 or arr.max() >= out_size):
        raise ValueError(f"{name} entries must lie in [0, {out_size})")
    arr = np.ascontiguousarray(arr, dtype=np.int64)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Configuration:
    """Full parameter set of the coded channel.

    f_j maps (s_j, u_j, prev_s_j, prev_u_j, prev_io_j) to a channel input.
    g_j maps (prev_u_j', s_j, u_j, prev_s_j, prev_u_j, prev_io_j, y_j) to a
    reconstruction of the other terminal's previous-block source.  Both are
    dense integer tables indexed row-major over their argument tuples.
    prev_law may be None while a stationary previous-block law is still to
    be computed (see markov.stationary_prev_law).
    """

    u1: Alphabet
    u2: Alphabet
    pu1_given_s1: ConditionalPmf
    pu2_given_s2: ConditionalPmf
    prev_law: JointPmf | None
    f1: np.ndarray
    f2: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    x1: Alphabet
    x2: Alphabet
    y1: Alphabet
    y2: Alphabet
    recon1: Alphabet
    recon2: Alphabet

    def __post_init__(self):
        s1, s2 = self.s1, self.s2
        for cond, u, nm in ((self.pu1_given_s1, self.u1, "pu1"), (self.pu2_given_s2, self.u2, "pu2")):
            if len(cond.given_axes) != 1 or len(cond.out_axes) != 1:
                raise ValueError(f"{nm} must condition one source axis on one codeword axis")
            if cond.out_axes[0].size != u.size:
                raise ValueError(f"{nm} output alphabet does not match u")
        nio1, nio2 = self.io1_size, self.io2_size
        if self.prev_law is not None:
            expect = (s1.size, s2.size, self.u1.size, self.u2.size, nio1, nio2)
            if self.prev_law.shape != expect:
                raise ValueError(f"prev_law shape {self.prev_law.shape}, expected {expect}")
        object.__setattr__(
            self,
            "f1",
            _check_table("f1", self.f1, (s1.size, self.u1.size, s1.size, self.u1.size, nio1), self.x1.size),
        )
        object.__setattr__(
            self,
            "f2",
            _check_table("f2", self.f2, (s2.size, self.u2.size, s2.size, self.u2.size, nio2), self.x2.size),
        )
        g1_shape = (self.u2.size, s1.size, self.u1.size, s1.size, self.u1.size, nio1, self.y1.size)
        g2_shape = (self.u1.size, s2.size, self.u2.size, s2.size, self.u2.size, nio2, self.y2.size)
        object.__setattr__(self, "g1", _check_table("g1", self.g1, g1_shape, self.recon2.size))
        object.__setattr__(self, "g2", _check_table("g2", self.g2, g2_shape, self.recon1.size))

    @property
    def s1(self) -> Alphabet:
        return self.pu1_given_s1.given_axes[0]

    @property
    def s2(self) -> Alphabet:
        return self.pu2_given_s2.given_axes[0]

    @property
    def io1_size(self) -> int:
        return self.x1.size * self.y1.size

    @property
    def io2_size(self) -> int:
        return self.x2.size * self.y2.size

    def check_against(self, ch: TwoWayChannel, src: JointSource) -> None:
        """Raise when the configuration's alphabets disagree with a model pair."""
        pairs = [
            (self.s1.size, src.s1.size, "s1"),
            (self.s2.size, src.s2.size, "s2"),
            (self.x1.size, ch.x1.size, "x1"),
            (self.x2.size, ch.x2.size, "x2"),
            (self.y1.size, ch.y1.size, "y1"),
            (self.y2.size, ch.y2.size, "y2"),
        ]
        for got, want, nm in pairs:
            if got != want:
                raise ValueError(f"configuration {nm} size {got} does not match model size {want}")


def fresh_law(cfg: Configuration, src: JointSource) -> np.ndarray:
    """Per-block law of (s1, s2, u1, u2) as a 4-axis tensor."""
    return (
        src.law.probs[:, :, None, None]
        * cfg.pu1_given_s1.probs[:, None, :, None]
        * cfg.pu2_given_s2.probs[None, :, None, :]
    )


def input_law(cfg: Configuration, src: JointSource) -> JointPmf:
    """Joint law of all ten coded-channel inputs (fresh block x previous block)."""
    if cfg.prev_law is None:
        raise ValueError("configuration has no previous-block law")
    full = np.multiply.outer(fresh_law(cfg, src), cfg.prev_law.probs)
    axes = (cfg.s1, cfg.s2, cfg.u1, cfg.u2) + cfg.prev_law.axes
    return JointPmf(axes, full)


def coded_channel_law(cfg: Configuration, ch: TwoWayChannel) -> ConditionalPmf:
    """Law of (y1, y2) given the ten coded-channel inputs.

    Materializes a dense tensor of size prod(inputs) * |Y1| * |Y2|; intended
    for small alphabets.
    """
    if cfg.x1.size != ch.x1.size or cfg.x2.size != ch.x2.size:
        raise ValueError("configuration input alphabets do not match channel")
    if cfg.y1.size != ch.y1.size or cfg.y2.size != ch.y2.size:
        raise ValueError("configuration output alphabets do not match channel")
    shape10 = (
        cfg.s1.size,
        cfg.s2.size,
        cfg.u1.size,
        cfg.u2.size,
        cfg.s1.size,
        cfg.s2.size,
        cfg.u1.size,
        cfg.u2.size,
        cfg.io1_size,
        cfg.io2_size,
    )
    idx = np.indices(shape10, sparse=True)
    x1 = cfg.f1[idx[0], idx[2], idx[4], idx[6], idx[8]]
    x2 = cfg.f2[idx[1], idx[3], idx[5], idx[7], idx[9]]
    x1, x2 = np.broadcast_arrays(x1, x2)
    probs = ch.law.probs[x1, x2]
    given = (
        Alphabet(shape10[0], "s1"),
        Alphabet(shape10[1], "s2"),
        cfg.u1,
        cfg.u2,
        Alphabet(shape10[4], "prev_s1"),
        Alphabet(shape10[5], "prev_s2"),
        Alphabet(shape10[6], "prev_u1"),
        Alphabet(shape10[7], "prev_u2"),
        Alphabet(shape10[8], "prev_io1"),
        Alphabet(shape10[9], "prev_io2"),
    )
    return ConditionalPmf(given, (ch.y1, ch.y2), probs)
