"""Random frequency hashing and the bin-extraction transform.

A draw of (sigma, b) maps frequency f to the unit-periodic variable
``sigma*(f + b) mod 1``; bin j of B owns the offsets nearest j/B.  One call of
`hash_to_bins` samples the windowed signal on an integer-spaced pattern,
weights it by the time-domain bin filter, folds modulo B, and applies one
length-B DFT; the j-th output equals the continuous convolution of the gated
signal with bin j's filter evaluated at time sigma*a.  That identity is exact
(Poisson summation over the integer sampling pattern), which the test suite
checks against a brute-force quadrature oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .filters import FilterG, FilterH, eval_g_time, eval_h
from .signal_core import SampleOracle


@dataclass(frozen=True)
class HashParams:
    """One draw of the frequency hash: scale sigma, shift b, bin count B."""

    sigma: float
    b: float
    B: int


@dataclass(frozen=True)
class BinVector:
    """Per-bin filtered-signal values, all evaluated at the same time sigma*a."""

    values: np.ndarray  # complex, length B
    time: float

    def __post_init__(self):
        if self.values.shape[0] < 1:
            raise InvalidInputError("empty bin vector")


def draw_hash_params(delta0: float, B: int, F: float, rng: np.random.Generator,
                     sigma_range: str = "wide") -> HashParams:
    """Draw hashing parameters for frequency scale delta0.

    sigma_range "wide" draws sigma uniformly from [1/(B*delta0), 2/(B*delta0)];
    "claim" draws from [1/(4*B*delta0), 1/(2*B*delta0)], the variant whose
    zero-collision window covers separations up to 2*(B-1)*delta0.  The shift
    b is uniform on [2M, 4M] with M = max(F, 1/sigma).
    """
    if delta0 <= 0 or B < 2:
        raise InvalidInputError("need delta0 > 0 and B >= 2")
    if sigma_range == "wide":
        sigma = rng.uniform(1.0 / (B * delta0), 2.0 / (B * delta0))
    elif sigma_range == "claim":
        sigma = rng.uniform(1.0 / (4 * B * delta0), 1.0 / (2 * B * delta0))
    else:
        raise InvalidInputError(f"unknown sigma_range {sigma_range!r}")
    m = max(F, 1.0 / sigma)
    b = rng.uniform(2.0 * m, 4.0 * m)
    return HashParams(sigma=sigma, b=b, B=B)


def hash_bin(p: HashParams, f) -> int | np.ndarray:
    """Bin index of frequency f: round-half-away-from-zero of B times the offset."""
    scalar = np.isscalar(f)
    fs = np.atleast_1d(np.asarray(f, dtype=np.float64))
    theta = np.mod(p.sigma * (fs + p.b), 1.0)
    j = np.floor(theta * p.B + 0.5).astype(np.int64) % p.B
    return int(j[0]) if scalar else j


class BinFold:
    """Reusable sampling pattern for repeated hash_to_bins calls.

    Precomputes the integer support of G, the filter weights G(m), and the
    per-point phases exp(-2*pi*i*sigma*b*m), which depend only on (g, p).
    """

    def __init__(self, h: FilterH, g: FilterG, p: HashParams):
        if g.B != p.B:
            raise InvalidInputError("filter bin count and hash bin count differ")
        self.h = h
        self.g = g
        self.p = p
        self.m = g.integer_support()
        self.g_vals = eval_g_time(g, self.m.astype(np.float64))
        phase = -2.0 * math.pi * p.sigma * p.b * self.m
        self.phases = np.exp(1j * phase)
        self.folded_idx = np.mod(self.m, p.B)

    def __call__(self, oracle: SampleOracle, a: float) -> BinVector:
        sigma = self.p.sigma
        times = sigma * a - sigma * self.m.astype(np.float64)
        hv = eval_h(self.h, times)
        live = hv != 0.0
        y = np.zeros(self.m.shape[0], dtype=np.complex128)
        if np.any(live):
            y[live] = oracle.query(times[live]) * hv[live]
        y *= self.g_vals * self.phases
        u = np.zeros(self.p.B, dtype=np.complex128)
        np.add.at(u, self.folded_idx, y)
        u_hat = self.p.B * np.fft.ifft(u)
        return BinVector(values=u_hat, time=sigma * a)


def hash_to_bins(oracle: SampleOracle, h: FilterH, g: FilterG, p: HashParams,
                 a: float) -> BinVector:
    """All B filtered-signal values from one integer-spaced sample pattern.

    The effective signal is oracle(t) * H(t); sample points where H vanishes
    (outside its tabulated span) are skipped without querying the oracle, so
    the query count per call is at most the number of integer support points
    of G.
    """
    return BinFold(h, g, p)(oracle, a)
