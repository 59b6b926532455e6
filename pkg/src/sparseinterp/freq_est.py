"""Multi-scale frequency estimation by vote search over significant samples.

Per bin, the phase of ``z(alpha + beta) / z(alpha)`` determines the bin's
dominant frequency modulo 1/beta.  A geometric search keeps a shrinking
interval per bin: each round enumerates the congruent frequency candidates,
votes for the sub-intervals they land in over several independent sample
rounds, and keeps a window around the first vote majority.  All bins share
one precomputed tensor of sample pairs, so the whole frequency list costs the
same oracle samples as a single bin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .filters import FilterG, FilterH
from .hashing import HashParams
from .significant import generate_significant_samples
from .signal_core import SampleOracle


@dataclass(frozen=True)
class SearchConfig:
    """Vote-search knobs.

    The shrink rule is fixed: a kept window is 5/num of the previous one, so
    num >= 6 guarantees contraction.  Per round d the probe shift beta is
    drawn from [c_beta/2, c_beta] * num / len_d.
    """

    num: int = 8
    D_iters: int | None = None
    R_votes: int = 24
    c_beta: float = 0.01
    c_s: float = 8.0
    s_first: int | None = None

    def __post_init__(self):
        if self.num < 6:
            raise InvalidInputError("num must be >= 6 for the interval to shrink")
        if self.R_votes < 1:
            raise InvalidInputError("R_votes must be >= 1")
        if self.D_iters is not None and self.D_iters < 1:
            raise InvalidInputError("D_iters must be >= 1")


def rounds_for(F: float, delta: float, num: int) -> int:
    """Rounds needed to shrink [−F, F] down to a window of about num*delta."""
    if delta <= 0 or F <= 0:
        raise InvalidInputError("need F > 0 and delta > 0")
    ratio = 2.0 * F / (num * delta)
    if ratio <= 1.0:
        return 1
    return max(1, math.ceil(math.log(ratio) / math.log(num / 5.0)))


def first_level_size(cfg: SearchConfig, k: int) -> int:
    if cfg.s_first is not None:
        return cfg.s_first
    return max(8, math.ceil(cfg.c_s * k * math.log2(max(2, k))))


@dataclass(frozen=True, eq=False)
class SampleTensor:
    """Significant-sample pairs for every (round d, vote r, bin j)."""

    z_alpha: np.ndarray       # complex, (D, R, B)
    z_alpha_beta: np.ndarray  # complex, (D, R, B)
    betas: np.ndarray         # float, (D, R); one beta per (d, r), shared by bins
    degenerate: np.ndarray    # bool, (D, R, B)
    lens: np.ndarray          # float, (D,); search window length per round

    @property
    def shape(self):
        return self.z_alpha.shape


@dataclass(frozen=True)
class FrequencyList:
    """Per-bin frequency estimates; bins whose search failed are omitted."""

    entries: tuple[tuple[int, float], ...]

    def freqs(self) -> np.ndarray:
        return np.array([f for _, f in self.entries], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.entries)


def probe_shift_cap(h: FilterH, T: float) -> float:
    """Largest usable probe shift for this gate.

    The shift must leave the good interval wide enough to still contain the
    sampling density's bulk region, and stay well inside the window.
    """
    slack = (h.fluctuation_halfwidth() - (1.0 - 1.0 / max(2, h.k))) * h.T / 2.0
    cap = min(0.9 * slack, 0.09 * T)
    if cap <= 0:
        raise ConfigurationError(
            "gate fluctuation region leaves no room for a probe shift"
        )
    return cap


def precompute_samples(oracle: SampleOracle, h: FilterH, g: FilterG,
                       p: HashParams, F: float, T: float, cfg: SearchConfig,
                       rng: np.random.Generator) -> SampleTensor:
    """Fill the (D, R, B) tensor: one generate call per (d, r) serves all bins."""
    if cfg.D_iters is None:
        raise InvalidInputError("precompute_samples needs cfg.D_iters resolved")
    D, R, B = cfg.D_iters, cfg.R_votes, p.B
    s = first_level_size(cfg, h.k)
    cap = probe_shift_cap(h, T)
    z1 = np.zeros((D, R, B), dtype=np.complex128)
    z2 = np.zeros((D, R, B), dtype=np.complex128)
    betas = np.zeros((D, R))
    degen = np.zeros((D, R, B), dtype=bool)
    lens = np.zeros(D)
    len_d = 2.0 * F
    for d in range(D):
        lens[d] = len_d
        # larger beta sharpens the phase-to-frequency map, but the shift must
        # stay well inside the gate's good interval
        beta_hat = min(cfg.c_beta * cfg.num / len_d, cap)
        for r in range(R):
            beta = rng.uniform(0.5 * beta_hat, beta_hat)
            batch = generate_significant_samples(oracle, h, g, p, beta, s, rng)
            betas[d, r] = beta
            z1[d, r] = batch.z_alpha
            z2[d, r] = batch.z_alpha_beta
            degen[d, r] = batch.degenerate
        len_d = 5.0 * len_d / cfg.num
    return SampleTensor(z_alpha=z1, z_alpha_beta=z2, betas=betas,
                        degenerate=degen, lens=lens)


def candidate_freqs(z_a: complex, z_ab: complex, beta: float, L: float,
                    len_d: float) -> np.ndarray:
    """All frequencies congruent to the measured phase within the window."""
    ang = np.angle(z_ab / z_a)
    s_lo = math.ceil(beta * L - 10.0)
    s_hi = math.floor(beta * (L + len_d) + 10.0)
    ss = np.arange(s_lo, s_hi + 1, dtype=np.float64)
    return (ang + 2.0 * math.pi * ss) / (2.0 * math.pi * beta)


def ary_search(tensor: SampleTensor, d: int, j: int, L: float, len_d: float,
               cfg: SearchConfig) -> float | None:
    """One vote round: returns the new left endpoint, or None on no majority."""
    num = cfg.num
    votes = np.zeros(num, dtype=np.int64)
    for r in range(cfg.R_votes):
        if tensor.degenerate[d, r, j]:
            continue
        z_a = tensor.z_alpha[d, r, j]
        if z_a == 0:
            continue
        cands = candidate_freqs(z_a, tensor.z_alpha_beta[d, r, j],
                                tensor.betas[d, r], L, len_d)
        q = np.floor((cands - L) * num / len_d).astype(np.int64)
        q = q[(q >= 0) & (q < num)]
        if q.size:
            votes[np.unique(q)] += 1
    padded = np.concatenate([votes, [0, 0]])
    for q in range(num):
        if padded[q] + padded[q + 1] + padded[q + 2] >= cfg.R_votes / 2.0:
            return L + q * len_d / num
    return None


def frequency_estimation_z(tensor: SampleTensor, j: int, F: float, T: float,
                           delta: float, cfg: SearchConfig) -> float | None:
    """Search one bin down to its final window; None if any round fails."""
    D = tensor.shape[0]
    L = -F
    len_d = 2.0 * F
    for d in range(D):
        res = ary_search(tensor, d, j, L, len_d, cfg)
        if res is None:
            return None
        L = res
        len_d = 5.0 * len_d / cfg.num
    return L + len_d / 2.0


def frequency_estimation_x(oracle: SampleOracle, h: FilterH, g: FilterG,
                           p: HashParams, F: float, T: float, delta: float,
                           cfg: SearchConfig, rng: np.random.Generator) -> FrequencyList:
    """Estimate every bin's dominant frequency from one shared sample tensor."""
    if cfg.D_iters is None:
        cfg = replace(cfg, D_iters=rounds_for(F, delta, cfg.num))
    tensor = precompute_samples(oracle, h, g, p, F, T, cfg, rng)
    slack = tensor.lens[-1] * 5.0 / cfg.num
    entries = []
    for j in range(p.B):
        f = frequency_estimation_z(tensor, j, F, T, delta, cfg)
        if f is not None and abs(f) <= F + slack:
            entries.append((j, float(f)))
    return FrequencyList(entries=tuple(entries))
