"""Two-level sampling that yields one informative time sample per bin.

Level one draws times from the importance density restricted to the "good"
interval where the time gate H sits within its ripple of 1 (so a shift by
beta stays inside the gated region).  Level two resamples one of those times
per bin, weighted by the bin's local energy, which makes the pair
``(z_j(alpha), z_j(alpha + beta))`` carry the bin's dominant frequency in its
phase ratio with high probability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .filters import FilterG, FilterH, eval_h
from .hashing import BinFold, HashParams
from .sampling import build_dist, draw_weighted
from .signal_core import SampleOracle


@dataclass(frozen=True)
class GoodIntervalU:
    """Times t0 with H > 1 - delta1 throughout [t0, t0 + beta]."""

    L: float
    R: float

    @property
    def length(self) -> float:
        return self.R - self.L


@dataclass(frozen=True, eq=False)
class SignificantSampleBatch:
    """Per-bin sample pairs produced from one shared first-level draw."""

    z_alpha: np.ndarray        # complex, length B
    z_alpha_beta: np.ndarray   # complex, length B
    alpha_times: np.ndarray    # float, length B
    degenerate: np.ndarray     # bool, length B
    beta: float
    first_level_times: np.ndarray
    first_level_weights: np.ndarray


def compute_good_interval(h: FilterH, beta: float) -> GoodIntervalU:
    """Good interval endpoints: closed form, then tightened on the H table.

    The closed form puts the interval at ``T/2 ± fh*T/2`` (fh the fluctuation
    half-width of H) minus beta on the right; tightening trims grid points
    where the tabulated H dips to 1 - delta1 or below.
    """
    if beta < 0 or beta >= 0.1 * h.T:
        raise InvalidInputError("need 0 <= beta < 0.1*T")
    half = h.fluctuation_halfwidth() * h.T / 2.0
    lo0 = h.T / 2.0 - half
    hi0 = h.T / 2.0 + half  # endpoint of [L, R + beta]
    if hi0 <= lo0:
        raise ConfigurationError("filter has no fluctuation region")

    n = h.table.shape[0]
    grid = h.table_lo + h.table_dt * np.arange(n)
    center = int(round((h.T / 2.0 - h.table_lo) / h.table_dt))
    good = h.table > 1.0 - h.delta1
    if not good[center]:
        raise ConfigurationError("H below 1 - delta1 at the window center")
    # maximal contiguous good run through the center
    bad_left = np.nonzero(~good[:center])[0]
    lo_idx = bad_left[-1] + 1 if bad_left.size else 0
    bad_right = np.nonzero(~good[center:])[0]
    hi_idx = center + bad_right[0] - 1 if bad_right.size else n - 1
    lo = max(lo0, grid[lo_idx])
    hi = min(hi0, grid[hi_idx])
    L, R = lo, hi - beta
    if R <= L:
        raise ConfigurationError(
            f"good interval empty after tightening (L={L}, R={R}); "
            "the filter is too aggressive for this beta"
        )
    return GoodIntervalU(L=L, R=R)


def generate_significant_samples(oracle: SampleOracle, h: FilterH, g: FilterG,
                                 p: HashParams, beta: float, s: int,
                                 rng: np.random.Generator) -> SignificantSampleBatch:
    """One significant sample pair per bin from a shared first-level draw.

    Draws s first-level times from the restricted importance density, computes
    all bins' filtered values at t_i and t_i + beta (two fold calls per t_i),
    then per bin resamples one index proportionally to w_i*|z_j(t_i)|^2.
    Bins whose first-level energy is all zero are flagged degenerate and act
    as abstentions downstream.
    """
    if s < 1:
        raise InvalidInputError("need s >= 1 first-level samples")
    u = compute_good_interval(h, beta)
    t_half = h.T / 2.0
    k_dist = max(2, h.k)
    dist = build_dist(k_dist, t_half, (u.L - t_half, u.R - t_half))
    ws = draw_weighted(dist, s, rng)
    times = ws.times + t_half

    fold = BinFold(h, g, p)
    B = p.B
    z1 = np.empty((s, B), dtype=np.complex128)
    z2 = np.empty((s, B), dtype=np.complex128)
    for i in range(s):
        z1[i] = fold(oracle, times[i] / p.sigma).values
        z2[i] = fold(oracle, (times[i] + beta) / p.sigma).values

    z_alpha = np.zeros(B, dtype=np.complex128)
    z_alpha_beta = np.zeros(B, dtype=np.complex128)
    alpha_times = np.zeros(B)
    degenerate = np.zeros(B, dtype=bool)
    for j in range(B):
        mass = ws.weights * np.abs(z1[:, j]) ** 2
        total = mass.sum()
        if not np.isfinite(total) or total <= 0.0:
            degenerate[j] = True
            continue
        idx = rng.choice(s, p=mass / total)
        z_alpha[j] = z1[idx, j]
        z_alpha_beta[j] = z2[idx, j]
        alpha_times[j] = times[idx]
    return SignificantSampleBatch(
        z_alpha=z_alpha, z_alpha_beta=z_alpha_beta, alpha_times=alpha_times,
        degenerate=degenerate, beta=beta,
        first_level_times=times, first_level_weights=ws.weights,
    )


def good_interval_min_h(h: FilterH, u: GoodIntervalU, beta: float) -> float:
    """Smallest tabulated H value over [L, R + beta]; test/diagnostic helper."""
    n = h.table.shape[0]
    grid = h.table_lo + h.table_dt * np.arange(n)
    mask = (grid >= u.L) & (grid <= u.R + beta)
    return float(np.min(eval_h(h, grid[mask])))
