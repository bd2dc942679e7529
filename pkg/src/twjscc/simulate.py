"""Monte Carlo simulator of the block-Markov adaptive coding scheme.

Each trial runs B source blocks through B+1 transmission blocks: messages
are encoded by joint typicality against fresh random codebooks, channel
inputs are produced symbol-wise from the configuration's encoder tables fed
with the previous block's state, and each message is decoded at the end of
the following block.  Error events are logged per class: covering failures
at the encoders, atypical full-state blocks, and decoding confusion (some
wrong codeword index passing the typicality test).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .coded_channel import Configuration, fresh_law, io_index
from .markov import build_chain, pair_law, prev_law_residual, prev_to_reduced
from .models import DistortionMeasure, JointSource, TwoWayChannel
from .probability import marginalize


def codebook_size(n: int, rate: float) -> int:
    """Number of codewords for a block length and rate: 2^ceil(n * rate)."""
    return 2 ** max(0, math.ceil(round(n * rate, 9)))


@dataclass(frozen=True)
class SimParams:
    """Simulation knobs; eps is the decoder slack and eps1 < eps the encoder's."""

    n: int
    blocks: int
    eps: float
    eps1: float
    rate1: float
    rate2: float
    seed: int = 0
    trials: int = 1
    freeze_boundary: bool = False  # reuse one init/termination draw across trials
    max_codebook: int = 2 ** 16
    max_n: int = 1024

    def __post_init__(self):
        if not (self.eps > self.eps1 > 0):
            raise ValueError("need eps > eps1 > 0")
        if not 1 <= self.n <= self.max_n:
            raise ValueError(f"block length must be in [1, {self.max_n}]")
        if self.blocks < 1 or self.trials < 1:
            raise ValueError("blocks and trials must be >= 1")
        if self.rate1 < 0 or self.rate2 < 0:
            raise ValueError("rates must be nonnegative")
        for r in (self.rate1, self.rate2):
            m = codebook_size(self.n, r)
            if m > self.max_codebook:
                raise ValueError(f"codebook size {m} exceeds cap {self.max_codebook}")
            if m * self.n > 2 ** 26:
                raise ValueError("codebook size times block length exceeds the work cap")


@dataclass(frozen=True)
class SimReport:
    """Aggregated outcome of a simulation run.

    Error counts are event totals over trials: covering failures per
    terminal over blocks 1..B, atypical full-state blocks over 1..B+1, and
    confusion events per decoded message stream over blocks 2..B+1.
    Equality between reports ignores wall_clock.
    """

    distortion1: float
    distortion2: float
    per_block: tuple[tuple[float, float], ...]
    err_cover: tuple[int, int]
    err_typicality: int
    err_confusion: tuple[int, int]
    decode_accuracy: float
    claim_applicable: int
    claim_violations: int
    unexplained_mismatch: int
    trials: int
    jscc_rate: float
    stationary_residual: float
    wall_clock: float = field(compare=False, default=0.0)

    @property
    def total_error_events(self) -> int:
        return sum(self.err_cover) + self.err_typicality + sum(self.err_confusion)

    def as_dict(self) -> dict:
        return {
            "distortion1": self.distortion1,
            "distortion2": self.distortion2,
            "per_block": [list(x) for x in self.per_block],
            "err_cover": list(self.err_cover),
            "err_typicality": self.err_typicality,
            "err_confusion": list(self.err_confusion),
            "decode_accuracy": self.decode_accuracy,
            "claim_applicable": self.claim_applicable,
            "claim_violations": self.claim_violations,
            "unexplained_mismatch": self.unexplained_mismatch,
            "trials": self.trials,
            "jscc_rate": self.jscc_rate,
            "stationary_residual": self.stationary_residual,
            "total_error_events": self.total_error_events,
            "wall_clock": self.wall_clock,
        }


def _cdf_sample(rng: np.random.Generator, cdf: np.ndarray, n: int) -> np.ndarray:
    return np.searchsorted(cdf, rng.random(n), side="right")


def _typical(counts: np.ndarray, n: int, ref: np.ndarray, eps: float):
    emp = counts / n
    return (np.abs(emp - ref) <= eps * ref).all(axis=-1)


@dataclass
class Codebooks:
    """Per-block codebooks plus the fixed boundary sequences of one trial."""

    u1: np.ndarray  # (B, M1, n)
    u2: np.ndarray
    init_prev: tuple  # (prev_s1, prev_s2, prev_u1, prev_u2, prev_io1, prev_io2)
    termination: tuple  # (s1, s2, u1, u2)


def generate_codebooks(
    cfg: Configuration, src: JointSource, params: SimParams, rng: np.random.Generator
) -> Codebooks:
    """Draw all codebooks plus initialization/termination sequences.

    Codewords are i.i.d. per letter from each terminal's codeword marginal;
    the block-b codebook doubles as the previous-block codebook of block
    b+1.  The initialization sextuple is i.i.d. from the previous-block law
    and the termination quadruple from the fresh-block law.
    """
    if cfg.prev_law is None:
        raise ValueError("codebook generation needs a previous-block law")
    psu = fresh_law(cfg, src)
    pu1_cdf = np.cumsum(psu.sum(axis=(0, 1, 3)))
    pu2_cdf = np.cumsum(psu.sum(axis=(0, 1, 2)))
    m1 = codebook_size(params.n, params.rate1)
    m2 = codebook_size(params.n, params.rate2)
    b, n = params.blocks, params.n
    u1 = _cdf_sample(rng, pu1_cdf, b * m1 * n).reshape(b, m1, n)
    u2 = _cdf_sample(rng, pu2_cdf, b * m2 * n).reshape(b, m2, n)
    init_flat = _cdf_sample(rng, np.cumsum(cfg.prev_law.probs.reshape(-1)), n)
    init_prev = np.unravel_index(init_flat, cfg.prev_law.shape)
    term_flat = _cdf_sample(rng, np.cumsum(psu.reshape(-1)), n)
    termination = np.unravel_index(term_flat, psu.shape)
    return Codebooks(u1, u2, init_prev, termination)


class SimContext:
    """Reference laws, tables, and samplers shared by encode/decode steps."""

    def __init__(self, cfg: Configuration, ch: TwoWayChannel, src: JointSource):
        cfg.check_against(ch, src)
        if cfg.prev_law is None:
            raise ValueError("simulation needs a configuration with a previous-block law")
        self.cfg, self.ch, self.src = cfg, ch, src
        sys = build_chain(cfg, ch, src)
        self.residual = prev_law_residual(sys)
        pi0 = prev_to_reduced(sys.reduced_shape, cfg.prev_law.probs)
        z = pair_law(sys, pi0)
        self.z_shape = z.shape
        self.z_flat = z.probs.reshape(-1)

        psu = fresh_law(cfg, src)
        self.enc_ref = {
            1: psu.sum(axis=(1, 3)).reshape(-1),
            2: psu.sum(axis=(0, 2)).reshape(-1),
        }
        # decoder reference: own 7-tuple first, candidate codeword axis last
        dec_keep = {1: (0, 2, 4, 6, 8, 10, 12, 7), 2: (1, 3, 5, 7, 9, 11, 13, 6)}
        self.dec_ref = {j: marginalize(z, dec_keep[j]).probs.reshape(-1) for j in (1, 2)}
        self.own_shape = {
            1: (cfg.s1.size, cfg.u1.size, cfg.s1.size, cfg.u1.size,
                cfg.io1_size, ch.x1.size, ch.y1.size),
            2: (cfg.s2.size, cfg.u2.size, cfg.s2.size, cfg.u2.size,
                cfg.io2_size, ch.x2.size, ch.y2.size),
        }
        self.src_cdf = np.cumsum(src.law.probs.reshape(-1))
        nyy = ch.y1.size * ch.y2.size
        self.chan_cdf = np.cumsum(ch.law.probs.reshape(-1, nyy), axis=1)

    def sample_source(self, rng, n):
        flat = _cdf_sample(rng, self.src_cdf, n)
        return np.unravel_index(flat, self.src.law.shape)

    def sample_channel(self, rng, x1, x2):
        rows = self.chan_cdf[x1 * self.ch.x2.size + x2]
        r = rng.random(len(x1))
        y_flat = (rows < r[:, None]).sum(axis=1)
        return y_flat // self.ch.y2.size, y_flat % self.ch.y2.size


def encode_block(ctx: SimContext, j: int, s_block: np.ndarray, prev: tuple,
                 codebook: np.ndarray, params: SimParams, rng: np.random.Generator):
    """Select a codeword index by joint typicality and emit channel inputs.

    prev holds this terminal's previous-block (s, u, io) sequences.
    Returns (index, codeword, x, covered); on covering failure the index is
    uniform over the whole codebook.
    """
    nu = (ctx.cfg.u1 if j == 1 else ctx.cfg.u2).size
    ref = ctx.enc_ref[j]
    m, n = codebook.shape
    idx = s_block[None, :] * nu + codebook
    cells = len(ref)
    counts = np.bincount((idx + (np.arange(m) * cells)[:, None]).ravel(), minlength=m * cells)
    ok = _typical(counts.reshape(m, cells), n, ref, params.eps1)
    cand = np.flatnonzero(ok)
    covered = len(cand) > 0
    if covered:
        mj = int(cand[rng.integers(len(cand))]) if len(cand) > 1 else int(cand[0])
    else:
        mj = int(rng.integers(m))
    u = codebook[mj]
    f = ctx.cfg.f1 if j == 1 else ctx.cfg.f2
    ps, pu, pio = prev
    x = f[s_block, u, ps, pu, pio]
    return mj, u, x, covered


def decode_block(ctx: SimContext, j: int, own: dict, codebook_prev: np.ndarray,
                 params: SimParams, rng: np.random.Generator):
    """Decode the other terminal's previous-block index at terminal j.

    own carries this terminal's current-block sequences under keys
    s, u, ps, pu, pio, x, y.  Returns (index, reconstruction,
    candidate_indices); with no typical candidate the index is uniform.
    """
    cfg = ctx.cfg
    nu_other = (cfg.u2 if j == 1 else cfg.u1).size
    ref = ctx.dec_ref[j]
    own_flat = np.ravel_multi_index(
        (own["s"], own["u"], own["ps"], own["pu"], own["pio"], own["x"], own["y"]),
        ctx.own_shape[j],
    )
    m, n = codebook_prev.shape
    idx = own_flat[None, :] * nu_other + codebook_prev
    cells = len(ref)
    counts = np.bincount((idx + (np.arange(m) * cells)[:, None]).ravel(), minlength=m * cells)
    ok = _typical(counts.reshape(m, cells), n, ref, params.eps)
    cand = np.flatnonzero(ok)
    if len(cand) > 0:
        m_hat = int(cand[rng.integers(len(cand))]) if len(cand) > 1 else int(cand[0])
    else:
        m_hat = int(rng.integers(m))
    g = cfg.g1 if j == 1 else cfg.g2
    recon = g[codebook_prev[m_hat], own["s"], own["u"], own["ps"], own["pu"], own["pio"], own["y"]]
    return m_hat, recon, cand


def run_simulation(
    cfg: Configuration,
    ch: TwoWayChannel,
    src: JointSource,
    d1: DistortionMeasure,
    d2: DistortionMeasure,
    params: SimParams,
) -> SimReport:
    """Simulate the full B+1-block scheme over independent seeded trials."""
    t0 = time.perf_counter()
    ctx = SimContext(cfg, ch, src)
    n, blocks = params.n, params.blocks

    frozen = None
    if params.freeze_boundary:
        boundary_rng = np.random.default_rng(np.random.SeedSequence([params.seed, 0xB0]))
        frozen_books = generate_codebooks(cfg, src, params, boundary_rng)
        frozen = (frozen_books.init_prev, frozen_books.termination)

    children = np.random.SeedSequence(params.seed).spawn(params.trials)

    dist_sum = np.zeros((blocks, 2))
    cover = [0, 0]
    f3 = 0
    confusion = [0, 0]
    correct = 0
    total_decodes = 0
    claim_app = 0
    claim_bad = 0
    unexplained = 0

    for child in children:
        rng = np.random.default_rng(child)
        books = generate_codebooks(cfg, src, params, rng)
        init_prev, termination = (
            frozen if frozen is not None else (books.init_prev, books.termination)
        )

        ps1, ps2, pu1, pu2, pio1, pio2 = (np.asarray(a) for a in init_prev)
        prev1 = (ps1, pu1, pio1)
        prev2 = (ps2, pu2, pio2)
        true_m = {1: [None] * (blocks + 2), 2: [None] * (blocks + 2)}
        s_hist = {1: [None] * (blocks + 2), 2: [None] * (blocks + 2)}

        for b in range(1, blocks + 2):
            if b <= blocks:
                s1, s2 = ctx.sample_source(rng, n)
                m1, u1, x1, cov1 = encode_block(ctx, 1, s1, prev1, books.u1[b - 1], params, rng)
                m2, u2, x2, cov2 = encode_block(ctx, 2, s2, prev2, books.u2[b - 1], params, rng)
                cover[0] += not cov1
                cover[1] += not cov2
                true_m[1][b] = m1
                true_m[2][b] = m2
            else:
                s1, s2, u1, u2 = (np.asarray(a) for a in termination)
                x1 = cfg.f1[s1, u1, prev1[0], prev1[1], prev1[2]]
                x2 = cfg.f2[s2, u2, prev2[0], prev2[1], prev2[2]]
            y1, y2 = ctx.sample_channel(rng, x1, x2)

            z_idx = np.ravel_multi_index(
                (s1, s2, u1, u2, prev1[0], prev2[0], prev1[1], prev2[1],
                 prev1[2], prev2[2], x1, x2, y1, y2),
                ctx.z_shape,
            )
            z_counts = np.bincount(z_idx, minlength=len(ctx.z_flat))
            block_typical = bool(_typical(z_counts, n, ctx.z_flat, params.eps))
            f3 += not block_typical

            if b >= 2:
                own1 = {"s": s1, "u": u1, "ps": prev1[0], "pu": prev1[1], "pio": prev1[2],
                        "x": x1, "y": y1}
                own2 = {"s": s2, "u": u2, "ps": prev2[0], "pu": prev2[1], "pio": prev2[2],
                        "x": x2, "y": y2}
                for j, own, other in ((1, own1, 2), (2, own2, 1)):
                    book = (books.u2 if other == 2 else books.u1)[b - 2]
                    m_hat, recon, cand = decode_block(ctx, j, own, book, params, rng)
                    truth = true_m[other][b - 1]
                    wrong_typical = bool(np.any(cand != truth))
                    confusion[other - 1] += wrong_typical
                    total_decodes += 1
                    correct += m_hat == truth
                    if block_typical and not wrong_typical:
                        claim_app += 1
                        claim_bad += m_hat != truth
                        g = cfg.g1 if j == 1 else cfg.g2
                        genie = g[book[truth], own["s"], own["u"], own["ps"], own["pu"],
                                  own["pio"], own["y"]]
                        unexplained += bool(np.any(recon != genie))
                    d = d1 if other == 1 else d2
                    dist_sum[b - 2, other - 1] += d.table[s_hist[other][b - 1], recon].mean()

            s_hist[1][b] = s1
            s_hist[2][b] = s2
            prev1 = (s1, u1, io_index(x1, y1, ch.y1.size))
            prev2 = (s2, u2, io_index(x2, y2, ch.y2.size))

    per_block = dist_sum / params.trials
    return SimReport(
        distortion1=float(per_block[:, 0].mean()),
        distortion2=float(per_block[:, 1].mean()),
        per_block=tuple((float(a), float(b)) for a, b in per_block),
        err_cover=(cover[0], cover[1]),
        err_typicality=f3,
        err_confusion=(confusion[0], confusion[1]),
        decode_accuracy=correct / total_decodes if total_decodes else 1.0,
        claim_applicable=claim_app,
        claim_violations=claim_bad,
        unexplained_mismatch=unexplained,
        trials=params.trials,
        jscc_rate=blocks / (blocks + 1),
        stationary_residual=ctx.residual,
        wall_clock=time.perf_counter() - t0,
    )
