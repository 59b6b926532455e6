"""Importance-sampling time distributions and weighted discrete norms.

Energy estimation throughout the package draws sample times from a density
that is flat-ish in the middle of the window and k times heavier in two edge
bands, compensating the growth of sparse tone sums near the window ends.  The
density lives on centered coordinates [-T, T] (T here is the HALF window;
callers observing on [0, T_obs] map through t -> t - T_obs/2) and can be
restricted to a sub-interval [L, R] that still contains the bulk region.

Weights follow one rule everywhere: ``w_i = 1 / (T_win * s * D(t_i))`` with
T_win the length of the distribution's support, which makes
``sum_i w_i |f(t_i)|^2`` an unbiased estimator of the support-averaged energy
``(1/T_win) * integral |f|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class TimeDistribution:
    """Piecewise density on [-T, T] (optionally restricted to [L, R]).

    density(t) = c / (T * (1 - |t/T|))   for |t| <= T*(1 - 1/k)
               = c * k / T               for |t| in [T*(1-1/k), T]
    with c the exact closed-form normalizer over the support.
    """

    kind: str
    k: int
    T: float
    L: float
    R: float
    c: float

    @property
    def bulk_edge(self) -> float:
        return self.T * (1.0 - 1.0 / self.k)

    @property
    def window_length(self) -> float:
        return self.R - self.L

    def density(self, t) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
        out = np.zeros_like(ts)
        inside = (ts >= self.L) & (ts <= self.R)
        bulk = inside & (np.abs(ts) <= self.bulk_edge)
        edge = inside & ~bulk
        out[bulk] = self.c / (self.T * (1.0 - np.abs(ts[bulk] / self.T)))
        out[edge] = self.c * self.k / self.T
        return out

    def _masses(self):
        be = self.bulk_edge
        m1 = self.c * self.k * max(0.0, -be - self.L) / self.T
        m2 = self.c * math.log(self.k)
        m3 = m2
        m4 = self.c * self.k * max(0.0, self.R - be) / self.T
        return m1, m2, m3, m4

    def cdf(self, t) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
        m1, m2, m3, _ = self._masses()
        be = self.bulk_edge
        out = np.zeros_like(ts)
        seg1 = ts <= -be
        out[seg1] = np.clip(self.c * self.k * (ts[seg1] - self.L) / self.T, 0.0, m1)
        seg2 = (ts > -be) & (ts <= 0)
        out[seg2] = m1 + self.c * np.log(self.k * (1.0 + ts[seg2] / self.T))
        seg3 = (ts > 0) & (ts <= be)
        out[seg3] = m1 + m2 - self.c * np.log1p(-ts[seg3] / self.T)
        seg4 = ts > be
        out[seg4] = np.minimum(
            m1 + m2 + m3 + self.c * self.k * (ts[seg4] - be) / self.T, 1.0
        )
        return out

    def inv_cdf(self, p) -> np.ndarray:
        ps = np.atleast_1d(np.asarray(p, dtype=np.float64))
        m1, m2, m3, _ = self._masses()
        be = self.bulk_edge
        out = np.empty_like(ps)
        s1 = ps < m1
        out[s1] = self.L + ps[s1] * self.T / (self.c * self.k)
        s2 = (ps >= m1) & (ps < m1 + m2)
        out[s2] = self.T * (np.exp((ps[s2] - m1) / self.c) / self.k - 1.0)
        s3 = (ps >= m1 + m2) & (ps < m1 + m2 + m3)
        out[s3] = self.T * (1.0 - np.exp(-(ps[s3] - m1 - m2) / self.c))
        s4 = ps >= m1 + m2 + m3
        out[s4] = be + (ps[s4] - m1 - m2 - m3) * self.T / (self.c * self.k)
        return np.clip(out, self.L, self.R)


@dataclass(frozen=True)
class WeightedSampleSet:
    times: np.ndarray
    weights: np.ndarray
    source: TimeDistribution

    def __post_init__(self):
        if self.times.shape[0] != self.weights.shape[0]:
            raise InvalidInputError("times and weights length mismatch")
        if np.any(self.weights <= 0):
            raise InvalidInputError("weights must be positive")


def build_dist(k: int, T: float, U: tuple[float, float] | None = None) -> TimeDistribution:
    """Normalized sampling density for sparsity k on [-T, T], restricted to U.

    U (when given) must satisfy bulk ⊆ U ⊆ [-T, T]; the normalizer is the
    closed-form ``c = 1 / (2 ln k + k*(|U| - 2*T*(1-1/k))/T)``, which reduces
    to ``1 / (2 ln k + 2)`` for the full window.
    """
    if k < 2 or T <= 0:
        raise InvalidInputError("need k >= 2 and T > 0")
    if U is None:
        L, R, kind = -T, T, "full"
    else:
        L, R = float(U[0]), float(U[1])
        kind = "restricted"
        be = T * (1.0 - 1.0 / k)
        if L > -be or R < be or L < -T or R > T:
            raise InvalidInputError(
                f"restriction [{L}, {R}] must contain the bulk [-{be}, {be}] "
                f"and lie inside [-{T}, {T}]"
            )
    c = 1.0 / (2.0 * math.log(k) + k * ((R - L) - 2.0 * T * (1.0 - 1.0 / k)) / T)
    return TimeDistribution(kind=kind, k=k, T=T, L=L, R=R, c=c)


def draw_weighted(dist: TimeDistribution, s: int,
                  rng: np.random.Generator) -> WeightedSampleSet:
    """s i.i.d. sample times by closed-form inverse-CDF, with matched weights."""
    if s < 1:
        raise InvalidInputError("need at least one sample")
    times = dist.inv_cdf(rng.random(s))
    weights = 1.0 / (dist.window_length * s * dist.density(times))
    return WeightedSampleSet(times=times, weights=weights, source=dist)


def weighted_norm_sq(values, w) -> float:
    """``sum_i w_i |v_i|^2`` (the weighted discrete energy)."""
    v = np.asarray(values)
    wa = np.asarray(w, dtype=np.float64)
    if v.shape[0] != wa.shape[0]:
        raise InvalidInputError("values and weights length mismatch")
    return float(np.sum(wa * np.abs(v) ** 2))
