"""Core signal types: sparse tone sums, window norms, and the sample oracle.

A sparse signal is a finite list of complex tones ``sum_j v_j exp(2*pi*i*f_j*t)``
with frequencies inside a band limit ``[-F, F]``.  The oracle wraps such a
ground truth plus a configurable noise term and counts every query made to it.

Conventions used package-wide:

* the observation window is ``[0, T]``;
* the window norm is ``||f||_T^2 = (1/T) * integral_0^T |f(t)|^2 dt``,
  approximated by a composite trapezoid rule on a uniform grid.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from ._kernels import prf_gauss, tone_sum_at
from .errors import InvalidInputError

DEFAULT_GRID_FACTOR = 4096


@dataclass(frozen=True)
class Tone:
    """One complex exponential: ``coeff * exp(2*pi*i*freq*t)``."""

    freq: float
    coeff: complex

    def __post_init__(self):
        if not np.isfinite(self.freq):
            raise InvalidInputError("tone frequency must be finite")
        if not np.isfinite(self.coeff.real) or not np.isfinite(self.coeff.imag):
            raise InvalidInputError("tone coefficient must be finite")


@dataclass(frozen=True)
class SparseSignal:
    """An ordered list of tones with a band limit F (every |freq| <= F)."""

    tones: tuple[Tone, ...]
    bandlimit: float

    def __post_init__(self):
        for t in self.tones:
            if abs(t.freq) > self.bandlimit * (1 + 1e-12):
                raise InvalidInputError(
                    f"tone frequency {t.freq} exceeds band limit {self.bandlimit}"
                )

    @property
    def k(self) -> int:
        return len(self.tones)

    def freq_array(self) -> np.ndarray:
        return np.array([t.freq for t in self.tones], dtype=np.float64)

    def coeff_array(self) -> np.ndarray:
        return np.array([t.coeff for t in self.tones], dtype=np.complex128)

    @staticmethod
    def from_arrays(freqs, coeffs, bandlimit: float) -> "SparseSignal":
        tones = tuple(Tone(float(f), complex(c)) for f, c in zip(freqs, coeffs))
        return SparseSignal(tones, float(bandlimit))


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model for the oracle.

    kind:
        "none"            no noise;
        "fixed-tones"     a fixed random sparse signal, rescaled so that the
                          measured ||g||_T / ||x*||_T equals `level`;
        "hashed-gaussian" complex gaussian noise keyed deterministically on
                          the IEEE-754 bits of the query time, with pointwise
                          std calibrated to `level * ||x*||_T`.
    detail: kind-specific parameters, e.g. {"n_tones": 4} for fixed-tones, or
        {"absolute_scale": s} to bypass relative calibration (needed when the
        ground truth is empty).
    """

    kind: str = "none"
    level: float = 0.0
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("none", "fixed-tones", "hashed-gaussian"):
            raise InvalidInputError(f"unknown noise kind {self.kind!r}")
        if self.level < 0:
            raise InvalidInputError("noise level must be >= 0")


def eval_sparse(signal: SparseSignal, t) -> complex | np.ndarray:
    """Evaluate ``sum_j coeff_j * exp(2*pi*i*freq_j*t)``.

    Accepts a scalar or an array of times; returns matching shape.
    """
    scalar = np.isscalar(t)
    times = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = tone_sum_at(signal.freq_array(), signal.coeff_array(), times)
    return complex(out[0]) if scalar else out


def t_norm_sq(values_on_grid, T: float) -> float:
    """Trapezoid approximation of ``(1/T) * integral_0^T |f|^2 dt``.

    The grid must be uniform over [0, T] with at least two points.
    """
    v = np.asarray(values_on_grid)
    if v.shape[0] < 2:
        raise InvalidInputError("t_norm_sq needs a grid of at least 2 points")
    mag = np.abs(v) ** 2
    dt = T / (v.shape[0] - 1)
    return float(np.trapezoid(mag, dx=dt) / T)


def signal_norm_sq(signal: SparseSignal, T: float, n_grid: int | None = None) -> float:
    """||signal||_T^2 measured on a dense uniform grid."""
    if n_grid is None:
        n_grid = DEFAULT_GRID_FACTOR * max(1, signal.k) + 1
    ts = np.linspace(0.0, T, n_grid)
    return t_norm_sq(eval_sparse(signal, ts), T)


def _float_bits(ts: np.ndarray) -> np.ndarray:
    return ts.astype(np.float64).view(np.uint64)


class SampleOracle:
    """Query-counted, deterministic access to ``x(t) = x*(t) + g(t)``.

    Repeated queries at the identical time return bit-identical values; the
    query counter increments by exactly one per queried point (batch queries
    add the batch length).  The counter update is lock protected so one oracle
    may be shared by concurrent trials.
    """

    def __init__(self, xstar: SparseSignal, noise: NoiseSpec, T: float, seed: int,
                 g_tones: SparseSignal | None = None, g_std: float = 0.0):
        self.xstar = xstar
        self.noise = noise
        self.T = float(T)
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._g_tones = g_tones
        self._g_std = float(g_std)
        self._count = 0
        self._lock = threading.Lock()

    @property
    def query_count(self) -> int:
        return self._count

    def _noise_at(self, times: np.ndarray) -> np.ndarray:
        if self.noise.kind == "none":
            return np.zeros(times.shape[0], dtype=np.complex128)
        if self.noise.kind == "fixed-tones":
            return tone_sum_at(self._g_tones.freq_array(), self._g_tones.coeff_array(), times)
        return prf_gauss(np.uint64(self.seed), _float_bits(times), self._g_std)

    def query(self, t) -> complex | np.ndarray:
        """Sample x at one time or a batch of times."""
        scalar = np.isscalar(t)
        times = np.atleast_1d(np.asarray(t, dtype=np.float64))
        with self._lock:
            self._count += times.shape[0]
        vals = tone_sum_at(self.xstar.freq_array(), self.xstar.coeff_array(), times)
        vals = vals + self._noise_at(times)
        return complex(vals[0]) if scalar else vals

    def noise_values(self, times) -> np.ndarray:
        """Ground-truth split g(t) for harness diagnostics; not query-counted."""
        return self._noise_at(np.atleast_1d(np.asarray(times, dtype=np.float64)))


def make_oracle(xstar: SparseSignal, noise: NoiseSpec, T: float, seed: int) -> SampleOracle:
    """Build the noisy sample oracle for a ground-truth signal.

    For kind "fixed-tones" the noise is a fixed random sparse signal rescaled
    so that the measured ||g||_T equals ``level * ||x*||_T`` on a dense grid;
    for "hashed-gaussian" the pointwise std is calibrated the same way.  A
    relative level > 0 with an empty ground truth cannot be calibrated and
    raises, unless detail["absolute_scale"] supplies an absolute target.
    """
    if T <= 0:
        raise InvalidInputError("window length T must be positive")
    if noise.kind == "none" or noise.level == 0.0:
        return SampleOracle(xstar, NoiseSpec("none"), T, seed)

    abs_scale = noise.detail.get("absolute_scale")
    if xstar.k == 0 and abs_scale is None:
        raise InvalidInputError(
            "cannot calibrate a relative noise level against an empty signal"
        )
    target = abs_scale if abs_scale is not None else (
        noise.level * np.sqrt(signal_norm_sq(xstar, T))
    )

    if noise.kind == "hashed-gaussian":
        return SampleOracle(xstar, noise, T, seed, g_std=float(target))

    # fixed-tones: draw, measure, rescale
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6E6F6973]))
    n_tones = int(noise.detail.get("n_tones", max(1, 2 * xstar.k)))
    f_hi = noise.detail.get("freq_range", xstar.bandlimit if xstar.bandlimit > 0 else 1.0)
    gf = rng.uniform(-f_hi, f_hi, size=n_tones)
    gc = rng.normal(size=n_tones) + 1j * rng.normal(size=n_tones)
    g0 = SparseSignal.from_arrays(gf, gc, f_hi)
    g_norm = np.sqrt(signal_norm_sq(g0, T, n_grid=DEFAULT_GRID_FACTOR * max(1, n_tones) + 1))
    g = SparseSignal.from_arrays(gf, gc * (target / g_norm), f_hi)
    return SampleOracle(xstar, noise, T, seed, g_tones=g)
