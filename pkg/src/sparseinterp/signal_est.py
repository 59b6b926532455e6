"""Coefficient recovery over a known frequency support, and tone conversion.

Given the estimated frequencies, the signal is fit in the mixed basis
``t^m * exp(2*pi*i*f_j*t)`` by weighted least squares on an importance-sampled
sketch; the polynomial factors absorb the residual frequency offsets.  The
mixed representation is then flattened back to a plain tone sum by fitting
each polynomial with a cluster of nearly-degenerate tones.

Monomials are always evaluated in the shifted variable ``tau = 2t/T - 1``
(coefficients are stored in the tau basis) to keep the regression conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConversionFailureError, InvalidInputError
from .sampling import build_dist, draw_weighted
from .signal_core import SampleOracle, SparseSignal


@dataclass(frozen=True, eq=False)
class SketchPlan:
    """Importance-sampled times with weights and the renormalized masses."""

    times: np.ndarray
    weights: np.ndarray
    renormalized: np.ndarray

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise InvalidInputError("sketch weights must be positive")


@dataclass(frozen=True, eq=False)
class MixedPolySignal:
    """``sum_j P_j(tau(t)) * exp(2*pi*i*freq_j*t)`` with tau = 2t/T - 1."""

    freqs: np.ndarray        # (n,)
    coeffs: np.ndarray       # (n, d+1) complex, ascending tau powers
    degree: int
    T: float

    def __post_init__(self):
        if self.coeffs.shape != (self.freqs.shape[0], self.degree + 1):
            raise InvalidInputError("coefficient block shape mismatch")
        if self.freqs.shape[0] > 1 and np.min(np.diff(np.sort(self.freqs))) <= 0:
            raise InvalidInputError("frequencies must be distinct")


def weighted_sketch(m: int, k_eff: int, T: float,
                    rng: np.random.Generator) -> SketchPlan:
    """m i.i.d. sketch times on [0, T] for signals of effective sparsity k_eff."""
    if m < 1:
        raise InvalidInputError("need m >= 1 sketch points")
    t_half = T / 2.0
    dist = build_dist(max(2, k_eff), t_half, None)
    ws = draw_weighted(dist, m, rng)
    w = ws.weights
    return SketchPlan(times=ws.times + t_half, weights=w, renormalized=w / w.sum())


def _design_matrix(freqs: np.ndarray, d: int, times: np.ndarray, T: float) -> np.ndarray:
    tau = 2.0 * times / T - 1.0
    powers = np.vander(tau, d + 1, increasing=True)          # (s, d+1)
    phases = np.exp(2j * math.pi * np.outer(times, freqs))   # (s, n)
    # column (j1, j2) -> index j1*(d+1) + j2
    a = phases[:, :, None] * powers[:, None, :]
    return a.reshape(times.shape[0], freqs.shape[0] * (d + 1))


def _solve_truncated(a: np.ndarray, b: np.ndarray, rel_cut: float = 1e-10) -> np.ndarray:
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    keep = s > rel_cut * s[0]
    coef = (u[:, keep].conj().T @ b) / s[keep]
    return vh[keep].conj().T @ coef


def dedup_freqs(freqs: np.ndarray, T: float) -> np.ndarray:
    """Drop frequencies within 1/(100 T) of an earlier one (keep first)."""
    kept: list[float] = []
    for f in freqs:
        if all(abs(f - g) >= 1.0 / (100.0 * T) for g in kept):
            kept.append(float(f))
    return np.array(kept, dtype=np.float64)


def signal_estimation(oracle: SampleOracle, freqs, d: int, T: float,
                      rng: np.random.Generator, c_m: float = 2.0,
                      plan: SketchPlan | None = None) -> MixedPolySignal:
    """Weighted least-squares fit of the mixed basis over the given support.

    The sketch size is ``ceil(c_m * n*(d+1) * log2(n*(d+1) + 1))``; the
    normal system is solved by SVD with singular values below 1e-10 of the
    largest truncated (the mixed basis is deliberately allowed to be
    near-degenerate).  Passing `plan` pins the sketch instead of drawing one.
    """
    fr = dedup_freqs(np.asarray(freqs, dtype=np.float64), T)
    if fr.shape[0] < 1:
        raise InvalidInputError("need at least one frequency")
    if d < 0:
        raise InvalidInputError("degree must be >= 0")
    n_cols = fr.shape[0] * (d + 1)
    m = math.ceil(c_m * n_cols * math.log2(n_cols + 1))
    if plan is None:
        plan = weighted_sketch(max(m, n_cols + 2), fr.shape[0] * (d + 1), T, rng)
    a = _design_matrix(fr, d, plan.times, T)
    col_norms = np.linalg.norm(a, axis=0)
    if np.any(col_norms == 0.0):
        raise InvalidInputError("design matrix has an all-zero column")
    b = oracle.query(plan.times)
    sw = np.sqrt(plan.weights)
    v = _solve_truncated(a * sw[:, None], b * sw)
    return MixedPolySignal(freqs=fr, coeffs=v.reshape(fr.shape[0], d + 1),
                           degree=d, T=T)


def mixed_poly_eval(sig: MixedPolySignal, times) -> np.ndarray:
    """Direct Horner-plus-phase evaluation; O(n_freqs * degree * n_times)."""
    ts = np.atleast_1d(np.asarray(times, dtype=np.float64))
    tau = 2.0 * ts / sig.T - 1.0
    out = np.zeros(ts.shape[0], dtype=np.complex128)
    for j in range(sig.freqs.shape[0]):
        c = sig.coeffs[j]
        acc = np.full(ts.shape[0], c[-1], dtype=np.complex128)
        for mdeg in range(sig.degree - 1, -1, -1):
            acc = acc * tau + c[mdeg]
        out += acc * np.exp(2j * math.pi * sig.freqs[j] * ts)
    return out


def _poly_eval_tau(coeffs: np.ndarray, tau: np.ndarray) -> np.ndarray:
    acc = np.full(tau.shape[0], coeffs[-1], dtype=np.complex128)
    for mdeg in range(coeffs.shape[0] - 2, -1, -1):
        acc = acc * tau + coeffs[mdeg]
    return acc


def _fit_tone_cluster(base_freq: float, coeffs: np.ndarray, T: float,
                      eps: float) -> list[tuple[float, complex]]:
    """Fit P(tau(t)) with d+1 tones at base_freq + gamma*m, adapting gamma.

    Starts from the conservative spacing ``eps / (T*(d+1)*max|coeff| + 1)``
    and halves it until the Chebyshev-node error meets eps; if shrinking
    stalls (the basis degenerates numerically before the expansion error
    falls), the spacing is grown instead until the target is met.  In float64
    the floor of this confluent-exponential fit sits near 1e-3 of the
    coefficient scale for degrees around 8, so callers should not ask for a
    much smaller eps at such degrees.
    """
    d = coeffs.shape[0] - 1
    n_nodes = 4 * (d + 1)
    i = np.arange(n_nodes)
    nodes = T / 2.0 * (1.0 - np.cos(math.pi * (i + 0.5) / n_nodes))
    target = _poly_eval_tau(coeffs, 2.0 * nodes / T - 1.0)
    max_c = float(np.max(np.abs(coeffs)))
    if max_c == 0.0:
        return [(base_freq, 0.0 + 0.0j)]
    # check between the fit nodes too, and refuse cancellation-heavy fits
    # whose sheer coefficient size would drown evaluation in rounding noise
    val_ts = np.linspace(0.0, T, 8 * (d + 1) + 1)
    val_target = _poly_eval_tau(coeffs, 2.0 * val_ts / T - 1.0)
    alpha_cap = max(1.0, max_c) * 1e8

    def attempt(gamma):
        basis = np.exp(2j * math.pi * gamma * np.outer(nodes, np.arange(d + 1)))
        alpha = np.linalg.lstsq(basis, target, rcond=None)[0]
        if float(np.max(np.abs(alpha))) > alpha_cap:
            return alpha, math.inf
        err = float(np.max(np.abs(basis @ alpha - target)))
        vb = np.exp(2j * math.pi * gamma * np.outer(val_ts, np.arange(d + 1)))
        err = max(err, float(np.max(np.abs(vb @ alpha - val_target))))
        return alpha, err

    gamma0 = eps / (T * (d + 1) * max_c + 1.0)
    gamma = gamma0
    best = (None, math.inf, gamma)
    prev_err = math.inf
    stalls = 0
    while True:
        alpha, err = attempt(gamma)
        if err < best[1]:
            best = (alpha, err, gamma)
        if err <= eps:
            break
        if err >= prev_err * 0.999:
            stalls += 1
            if stalls >= 2:
                break
        prev_err = err
        gamma *= 0.5
        if gamma < 1e-300:
            raise ConversionFailureError(
                f"tone spacing underflowed before reaching error {eps}"
            )
    if best[1] > eps:
        # degenerate-basis regime: widen the spacing instead
        gamma = gamma0
        cap = 1.0 / (T * (d + 1))
        while gamma < cap:
            gamma = min(gamma * 1.6, cap)
            alpha, err = attempt(gamma)
            if err < best[1]:
                best = (alpha, err, gamma)
            if err <= eps:
                break
    alpha, err, gamma = best
    if alpha is None or err > eps:
        raise ConversionFailureError(
            f"could not fit degree-{d} polynomial to {eps} (best error {err})"
        )
    return [(base_freq + gamma * mdeg, complex(alpha[mdeg])) for mdeg in range(d + 1)]


def poly_to_fourier(sig: MixedPolySignal, T: float, eps: float) -> SparseSignal:
    """Flatten a mixed signal to a plain tone sum, accurate to eps on [0, T].

    Output sparsity is exactly ``sum_j (d_j + 1)``.
    """
    if eps <= 0:
        raise InvalidInputError("eps must be positive")
    tones: list[tuple[float, complex]] = []
    for j in range(sig.freqs.shape[0]):
        tones.extend(_fit_tone_cluster(float(sig.freqs[j]), sig.coeffs[j], T, eps))
    if not tones:
        return SparseSignal((), 0.0)
    band = max(abs(f) for f, _ in tones)
    return SparseSignal.from_arrays([f for f, _ in tones], [c for _, c in tones], band)
