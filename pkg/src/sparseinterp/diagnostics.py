"""Slow, quadrature-based predicates used to label trials and gate tests.

Everything here works from ground truth plus parameters (never from recovered
output) and is deliberately O(grid^2)-ish: these are measurement oracles, not
part of the recovery path.  The spectral helpers compute the gated spectrum
``widehat(x * H)`` from a cached FFT of the filter table, multiply by the bin
response, and integrate; time-domain energies come from Parseval or from
direct synthesis on a grid.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np

from .filters import FilterG, FilterH, eval_g_bin_hat
from .hashing import HashParams, hash_bin
from .signal_core import SparseSignal, eval_sparse, t_norm_sq

_HHAT_CACHE: "weakref.WeakKeyDictionary[FilterH, tuple]" = weakref.WeakKeyDictionary()


def _h_hat_grid(h: FilterH) -> tuple[np.ndarray, np.ndarray]:
    """Fourier transform of the tabulated gate on a dense frequency grid."""
    hit = _HHAT_CACHE.get(h)
    if hit is not None:
        return hit
    vals = h.table[:-1]
    n = vals.shape[0]
    pad = 1 << math.ceil(math.log2(128 * n))
    spec = np.fft.fft(vals, pad) * h.table_dt
    xi = np.fft.fftfreq(pad, h.table_dt)
    spec = spec * np.exp(-2j * math.pi * xi * h.table_lo)
    order = np.argsort(xi)
    out = (xi[order], spec[order])
    _HHAT_CACHE[h] = out
    return out


def h_hat(h: FilterH, xi) -> np.ndarray:
    """widehat(H) at the given frequencies (0 beyond the resolvable span)."""
    grid, spec = _h_hat_grid(h)
    xs = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    re = np.interp(xs, grid, spec.real, left=0.0, right=0.0)
    im = np.interp(xs, grid, spec.imag, left=0.0, right=0.0)
    return re + 1j * im


def gated_spectrum(x: SparseSignal, h: FilterH, fgrid: np.ndarray) -> np.ndarray:
    """widehat(x * H)(f) = sum_m v_m * widehat(H)(f - f_m) on the grid."""
    out = np.zeros(fgrid.shape[0], dtype=np.complex128)
    for tone in x.tones:
        out += tone.coeff * h_hat(h, fgrid - tone.freq)
    return out


def _effective_halfwidth(h: FilterH) -> float:
    # analytic support can exceed what the table resolves; clamp to its Nyquist
    return min(h.dh / 2.0, 0.45 / h.table_dt)


def default_fgrid(x: SparseSignal, h: FilterH, n: int = 8192) -> np.ndarray:
    if x.k == 0:
        return np.linspace(-1.0, 1.0, n)
    fr = x.freq_array()
    half = _effective_halfwidth(h)
    return np.linspace(fr.min() - half, fr.max() + half, n)


def heavy_frequency(xstar: SparseSignal, h: FilterH, f: float,
                    noise_level_sq: float, k: int, T: float,
                    n_grid: int = 4096) -> bool:
    """Does the band f ± dh of the gated spectrum carry >= T*N^2/k energy?"""
    # the band half-width is dh itself, clamped to what the table resolves
    half = min(h.dh, 2.0 * _effective_halfwidth(h))
    fgrid = np.linspace(f - half, f + half, n_grid)
    mag = np.abs(gated_spectrum(xstar, h, fgrid)) ** 2
    mass = float(np.trapezoid(mag, fgrid))
    return mass >= T * noise_level_sq / max(1, k)


def bin_response(g: FilterG, p: HashParams, j: int, fgrid: np.ndarray) -> np.ndarray:
    return eval_g_bin_hat(g, p.sigma, p.b, j, fgrid)


def filtered_spectrum(x: SparseSignal, h: FilterH, g: FilterG, p: HashParams,
                      j: int, fgrid: np.ndarray) -> np.ndarray:
    """Spectrum of the bin-j filtered signal: gated spectrum times bin response."""
    return gated_spectrum(x, h, fgrid) * bin_response(g, p, j, fgrid)


def synthesize(fgrid: np.ndarray, spectrum: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Inverse transform by trapezoid quadrature on the frequency grid."""
    df = fgrid[1] - fgrid[0]
    w = np.full(fgrid.shape[0], df)
    w[0] = w[-1] = df / 2.0
    return (spectrum * w) @ np.exp(2j * math.pi * np.outer(fgrid, times))


def high_snr_bin(xstar: SparseSignal, g_noise: SparseSignal, h: FilterH,
                 g: FilterG, p: HashParams, j: int, c_snr: float = 0.001,
                 n_t: int = 1024, n_f: int = 8192) -> bool:
    """Is the filtered noise energy at most c_snr times the filtered signal energy?"""
    T = h.T
    times = np.linspace(0.0, T, n_t)
    both = SparseSignal(xstar.tones + g_noise.tones,
                        max(xstar.bandlimit, g_noise.bandlimit, 1.0))
    fgrid = default_fgrid(both, h, n_f)
    zs = synthesize(fgrid, filtered_spectrum(xstar, h, g, p, j, fgrid), times)
    zg = synthesize(fgrid, filtered_spectrum(g_noise, h, g, p, j, fgrid), times)
    return t_norm_sq(zg, T) <= c_snr * t_norm_sq(zs, T)


def large_offset(freqs, h: FilterH, g: FilterG, p: HashParams,
                 n_grid: int | None = None) -> bool:
    """Does any tone's gated support touch a transition edge of any bin filter?

    The sweep grid must resolve the bin filter's transition layer (width
    alpha_g/(4 B sigma) in frequency), which can be far thinner than the
    gate's spectral footprint; left unset, the grid adapts to it.
    """
    half = _effective_halfwidth(h)
    if n_grid is None:
        transition = g.alpha_g / (4.0 * g.B * p.sigma)
        n_grid = int(min(1 << 16, max(512, math.ceil(2 * half / (transition / 4)))))
    lo = g.delta / max(1, g.k)
    hi = 1.0 - lo
    for f0 in np.atleast_1d(np.asarray(freqs, dtype=np.float64)):
        fgrid = np.linspace(f0 - half, f0 + half, n_grid)
        for j in range(g.B):
            vals = eval_g_bin_hat(g, p.sigma, p.b, j, fgrid)
            if np.any((vals >= lo) & (vals <= hi)):
                return True
    return False


def well_isolated(x: SparseSignal, h: FilterH, g: FilterG, p: HashParams,
                  fstar: float, delta: float, eps: float, noise_level_sq: float,
                  k: int, c_iso: float = 1.0, n_f: int = 16384) -> bool:
    """Does all but eps*T*N^2/k of the bin's spectral energy sit within fstar ± delta?"""
    j = hash_bin(p, fstar)
    fgrid = default_fgrid(x, h, n_f)
    mag = np.abs(filtered_spectrum(x, h, g, p, j, fgrid)) ** 2
    outside = np.abs(fgrid - fstar) >= delta
    mass_out = float(np.trapezoid(np.where(outside, mag, 0.0), fgrid))
    return mass_out <= c_iso * eps * h.T * noise_level_sq / max(1, k)


def ideal_filter_value(g: FilterG, p: HashParams, j: int, f: float,
                       delta1: float) -> int:
    """0/1 rounding of the bin response at threshold 1 - delta1."""
    return int(eval_g_bin_hat(g, p.sigma, p.b, j, f) > 1.0 - delta1)


def energy_bound_ratio(x: SparseSignal, T: float, n_grid: int = 8192) -> float:
    """max_t |x(t)|^2 / ||x||_T^2 over a fine grid on [0, T]."""
    ts = np.linspace(0.0, T, n_grid)
    vals = eval_sparse(x, ts)
    norm = t_norm_sq(vals, T)
    return float(np.max(np.abs(vals) ** 2) / norm)


def bin_time_energy_ratio(x: SparseSignal, h: FilterH, g: FilterG,
                          p: HashParams, j: int, n_t: int = 2048,
                          n_f: int = 16384) -> float:
    """integral over all time of |z|^2 divided by the [0, T] part (>= 1)."""
    fgrid = default_fgrid(x, h, n_f)
    spec = filtered_spectrum(x, h, g, p, j, fgrid)
    total = float(np.trapezoid(np.abs(spec) ** 2, fgrid))  # Parseval
    times = np.linspace(0.0, h.T, n_t)
    z = synthesize(fgrid, spec, times)
    inside = float(np.trapezoid(np.abs(z) ** 2, times))
    if inside <= 0:
        return math.inf
    return total / inside


def bin_freq_mass_fraction(x: SparseSignal, h: FilterH, g: FilterG,
                           p: HashParams, fstar: float, delta: float,
                           n_f: int = 16384) -> float:
    """Fraction of the bin's spectral energy within fstar ± delta."""
    j = hash_bin(p, fstar)
    fgrid = default_fgrid(x, h, n_f)
    mag = np.abs(filtered_spectrum(x, h, g, p, j, fgrid)) ** 2
    total = float(np.trapezoid(mag, fgrid))
    if total <= 0:
        return 0.0
    inband = np.abs(fgrid - fstar) < delta
    return float(np.trapezoid(np.where(inband, mag, 0.0), fgrid)) / total


@dataclass(frozen=True)
class BinLabel:
    """Ground-truth-derived labels for one bin of one hash draw."""

    bin: int
    heavy: bool
    high_snr: bool
    well_isolated: bool
    large_offset: bool


def label_bins(xstar: SparseSignal, g_noise: SparseSignal, h: FilterH,
               g: FilterG, p: HashParams, delta: float, eps: float,
               noise_level_sq: float) -> list[BinLabel]:
    """Label every bin that owns a ground-truth tone."""
    lo_event = large_offset(xstar.freq_array(), h, g, p)
    labels = []
    for tone in xstar.tones:
        j = hash_bin(p, tone.freq)
        labels.append(BinLabel(
            bin=j,
            heavy=heavy_frequency(xstar, h, tone.freq, noise_level_sq,
                                  max(1, xstar.k), h.T),
            high_snr=high_snr_bin(xstar, g_noise, h, g, p, j),
            well_isolated=well_isolated(xstar, h, g, p, tone.freq, delta, 1.0,
                                        noise_level_sq, max(1, xstar.k)),
            large_offset=lo_event,
        ))
    return labels
