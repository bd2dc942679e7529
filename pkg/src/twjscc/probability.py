"""Exact discrete probability on finite alphabets.

Distributions are stored as dense numpy tensors with one axis per random
variable.  All information measures are in bits (log base 2) and use the
convention 0*log(0) = 0.  Everything here is immutable after construction
and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Normalization tolerance for constructed distributions.
NORM_TOL = 1e-12


@dataclass(frozen=True)
class Alphabet:
    """A finite alphabet whose symbols are the indices 0..size-1."""

    size: int
    label: str = ""

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"alphabet size must be >= 1, got {self.size}")


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class JointPmf:
    """Joint probability mass function over an ordered tuple of alphabets."""

    axes: tuple[Alphabet, ...]
    probs: np.ndarray

    def __post_init__(self):
        axes = tuple(self.axes)
        object.__setattr__(self, "axes", axes)
        probs = np.asarray(self.probs, dtype=np.float64)
        shape = tuple(a.size for a in axes)
        if probs.shape != shape:
            raise ValueError(f"pmf shape {probs.shape} does not match axes {shape}")
        if np.any(probs < 0):
            raise ValueError("pmf has negative entries")
        total = probs.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"pmf sums to {total!r}, violates normalization tolerance")
        object.__setattr__(self, "probs", _freeze(probs))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.probs.shape

    @property
    def naxes(self) -> int:
        return len(self.axes)


@dataclass(frozen=True)
class ConditionalPmf:
    """Conditional law P(out | given); given axes come first in the tensor."""

    given_axes: tuple[Alphabet, ...]
    out_axes: tuple[Alphabet, ...]
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "given_axes", tuple(self.given_axes))
        object.__setattr__(self, "out_axes", tuple(self.out_axes))
        probs = np.asarray(self.probs, dtype=np.float64)
        shape = tuple(a.size for a in self.given_axes) + tuple(a.size for a in self.out_axes)
        if probs.shape != shape:
            raise ValueError(f"conditional shape {probs.shape} does not match {shape}")
        if np.any(probs < 0):
            raise ValueError("conditional pmf has negative entries")
        sums = probs.reshape(int(np.prod([a.size for a in self.given_axes], initial=1)), -1).sum(axis=1)
        if np.any(np.abs(sums - 1.0) > NORM_TOL):
            worst = float(np.max(np.abs(sums - 1.0)))
            raise ValueError(f"conditional slices violate normalization (max dev {worst:.3e})")
        object.__setattr__(self, "probs", _freeze(probs))

    @property
    def n_given(self) -> int:
        return len(self.given_axes)


AxisSet = int | Iterable[int]


def _as_axes(p: JointPmf, axes: AxisSet, name: str) -> tuple[int, ...]:
    if isinstance(axes, (int, np.integer)):
        axes = (int(axes),)
    out = tuple(int(a) for a in axes)
    for a in out:
        if not 0 <= a < p.naxes:
            raise ValueError(f"{name} axis {a} out of range for {p.naxes}-axis pmf")
    if len(set(out)) != len(out):
        raise ValueError(f"{name} axes contain duplicates: {out}")
    return out


def _check_disjoint(*groups: tuple[int, ...]):
    seen: set[int] = set()
    for g in groups:
        for a in g:
            if a in seen:
                raise ValueError(f"axis sets overlap on axis {a}")
            seen.add(a)


def _plogp_sum(probs: np.ndarray) -> float:
    p = probs[probs > 0]
    return float(np.sum(p * np.log2(p)))


def entropy(p: JointPmf) -> float:
    """Shannon entropy of the full joint, in bits."""
    return -_plogp_sum(p.probs)


def _subset_entropy(p: JointPmf, axes: tuple[int, ...]) -> float:
    if not axes:
        return 0.0
    drop = tuple(a for a in range(p.naxes) if a not in axes)
    return -_plogp_sum(p.probs.sum(axis=drop) if drop else p.probs)


def conditional_entropy(p: JointPmf, target: AxisSet, given: AxisSet = ()) -> float:
    """H(target | given) = H(target, given) - H(given), in bits."""
    t = _as_axes(p, target, "target")
    g = _as_axes(p, given, "given")
    _check_disjoint(t, g)
    return _subset_entropy(p, tuple(sorted(t + g))) - _subset_entropy(p, g)


def mutual_information(p: JointPmf, a: AxisSet, b: AxisSet) -> float:
    """I(a; b) in bits, clamped at 0 to absorb roundoff."""
    aa = _as_axes(p, a, "a")
    bb = _as_axes(p, b, "b")
    _check_disjoint(aa, bb)
    mi = _subset_entropy(p, aa) + _subset_entropy(p, bb) - _subset_entropy(p, tuple(sorted(aa + bb)))
    return max(mi, 0.0)


def conditional_mutual_information(p: JointPmf, a: AxisSet, b: AxisSet, c: AxisSet) -> float:
    """I(a; b | c) = H(a,c) + H(b,c) - H(a,b,c) - H(c), in bits."""
    aa = _as_axes(p, a, "a")
    bb = _as_axes(p, b, "b")
    cc = _as_axes(p, c, "c")
    _check_disjoint(aa, bb, cc)
    return (
        _subset_entropy(p, tuple(sorted(aa + cc)))
        + _subset_entropy(p, tuple(sorted(bb + cc)))
        - _subset_entropy(p, tuple(sorted(aa + bb + cc)))
        - _subset_entropy(p, cc)
    )


def marginalize(p: JointPmf, keep: AxisSet) -> JointPmf:
    """Sum out all axes not in `keep`; result axes follow the order of `keep`."""
    kk = _as_axes(p, keep, "keep")
    if not kk:
        raise ValueError("keep set must be nonempty")
    drop = tuple(a for a in range(p.naxes) if a not in kk)
    reduced = p.probs.sum(axis=drop) if drop else p.probs
    kept_sorted = tuple(a for a in range(p.naxes) if a in kk)
    perm = tuple(kept_sorted.index(a) for a in kk)
    return JointPmf(tuple(p.axes[a] for a in kk), np.transpose(reduced, perm))


def product(p: JointPmf, q: JointPmf) -> JointPmf:
    """Independent product pmf over p.axes + q.axes."""
    return JointPmf(p.axes + q.axes, np.multiply.outer(p.probs, q.probs))


def empirical_pmf(sequences: Sequence[np.ndarray], shape: tuple[int, ...]) -> np.ndarray:
    """Empirical joint frequency tensor of per-letter symbol tuples."""
    seqs = [np.asarray(s, dtype=np.int64) for s in sequences]
    if len(seqs) != len(shape):
        raise ValueError(f"expected {len(shape)} sequences, got {len(seqs)}")
    n = len(seqs[0])
    if n < 1:
        raise ValueError("sequences must have length >= 1")
    for s in seqs:
        if len(s) != n:
            raise ValueError("sequences have mismatched lengths")
    flat = np.ravel_multi_index(tuple(seqs), shape)
    counts = np.bincount(flat, minlength=int(np.prod(shape)))
    return (counts / n).reshape(shape)


def joint_typicality_test(sequences: Sequence[np.ndarray], reference: JointPmf, eps: float) -> bool:
    """Robust joint typicality: every cell satisfies |emp - p| <= eps * p.

    Symbols with zero reference probability must not appear (the eps * p
    bound is then zero).  With eps = 0 this accepts exactly the sequences
    whose empirical pmf equals the reference.
    """
    emp = empirical_pmf(sequences, reference.shape)
    return bool(np.all(np.abs(emp - reference.probs) <= eps * reference.probs))


def binary_entropy(x: float) -> float:
    """Entropy of a Bernoulli(x) variable in bits."""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def bernoulli(p: float, label: str = "") -> JointPmf:
    """One-axis pmf (1-p, p) on a binary alphabet."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    return JointPmf((Alphabet(2, label),), np.array([1.0 - p, p]))
