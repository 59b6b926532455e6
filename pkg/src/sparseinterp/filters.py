"""Window filters: the time-domain gate H and the frequency-domain bin filter G.

H approximates the rectangular gate of the observation window [0, T]: it is a
product of even sinc powers convolved with a unit box, rescaled so the window
center maps to the peak.  It is ~1 on the interior of the window, decays
through a short boundary layer, and is band-limited with a support width we
compute in closed form.

G is a flat-top kernel used to split the (hashed) frequency axis into B bins:
a cardinal B-spline times a sinc in time, equivalently a sinc power convolved
with a box in frequency.  Its exact Fourier pair structure is what makes the
bin extraction in `hashing` an identity rather than an approximation.

Throughout this module ``sinc(x) = sin(x)/x`` (UNNORMALIZED; numpy's np.sinc
is sin(pi x)/(pi x) and is only used through the `_usinc` wrapper).
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._kernels import table_cubic
from .errors import InvalidInputError, NumericFailureError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _usinc(x):
    """Unnormalized sinc: sin(x)/x, 1 at 0."""
    return np.sinc(np.asarray(x) / np.pi)


# ---------------------------------------------------------------------------
# time-domain filter H
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FilterHKnobs:
    c_r: float = 4.0          # R = S = next power of two >= c_r * k^2 (floor 4)
    table_size: int = 16385   # odd so the window center lands on a node
    panels_per_lobe: int = 6
    cache_dir: str | None = None


@dataclass(frozen=True, eq=False)
class FilterH:
    """Time gate for [0, T], tabulated on [-T/4, 5T/4].

    The profile is ``H(t) = H1(alpha_h * (2t/T - 1))`` where H1 is the
    normalized sliding-window integral of a product of even sinc powers with
    parameters (R, S, C, C0).  ``s0`` normalizes the center value to 1; ``dh``
    is the exact spectral support width (Hz) from the sum of the box widths of
    the convolved rectangles.
    """

    R: int
    S: int
    C: int
    C0: float
    alpha_h: float
    s0: float
    T: float
    delta1: float
    table: np.ndarray
    table_lo: float
    table_dt: float
    dh: float
    k: int

    def fluctuation_halfwidth(self) -> float:
        """Half-width (in the 2t/T - 1 variable) of the H in [1-delta1, 1] region."""
        return (0.5 - math.pi / (self.C0 * self.R)) / self.alpha_h


def _h_psi_factory(R: int, S: int, C: int, C0: float):
    log2R = int(round(math.log2(R)))
    log2S = int(round(math.log2(S)))

    def psi(tau):
        out = np.ones_like(tau)
        if log2R > 0:
            out = out * _usinc(C0 * R * tau) ** (C * log2R)
        for i in range(log2S + 1):
            out = out * _usinc((C0 * S / 2 ** i) * tau) ** (C * 2 ** i)
        return out

    return psi


class _SlidingIntegral:
    """Antiderivative of psi on a fine Gauss-Legendre panel grid.

    The sliding-window value is the integral of psi over a window of fixed
    width centered at u; evaluating many u's reuses one global panel
    accumulation plus a partial panel at each end.  Arguments beyond the
    tabulated span clip to its edge (psi must be negligible out there).
    """

    def __init__(self, psi, span: float, panel_width: float, window_width: float = 1.0):
        n = max(64, int(math.ceil(2 * span / panel_width)))
        self.psi = psi
        self.window_width = window_width
        self.edges = np.linspace(-span, span, n + 1)
        mid = 0.5 * (self.edges[:-1] + self.edges[1:])
        half = 0.5 * (self.edges[1] - self.edges[0])
        taus = mid[:, None] + half * _GL_NODES[None, :]
        panel_ints = half * (psi(taus) @ _GL_WEIGHTS)
        self.cum = np.concatenate([[0.0], np.cumsum(panel_ints)])

    def antideriv(self, x: np.ndarray) -> np.ndarray:
        x = np.clip(x, self.edges[0], self.edges[-1])
        idx = np.clip(np.searchsorted(self.edges, x, side="right") - 1,
                      0, len(self.edges) - 2)
        lo = self.edges[idx]
        half = 0.5 * (x - lo)
        taus = (lo + half)[:, None] + half[:, None] * _GL_NODES[None, :]
        partial = half * (self.psi(taus) @ _GL_WEIGHTS)
        return self.cum[idx] + partial

    def window(self, u: np.ndarray) -> np.ndarray:
        hw = 0.5 * self.window_width
        return self.antideriv(u + hw) - self.antideriv(u - hw)


def _next_pow2(x: float) -> int:
    return 1 << max(0, math.ceil(math.log2(max(1.0, x))))


def build_filter_h(k: int, delta1: float, T: float,
                   knobs: FilterHKnobs | None = None) -> FilterH:
    """Construct the time gate for sparsity k at ripple delta1 on [0, T].

    Raises NumericFailureError if the tabulation fails its own sanity checks
    (center normalization, peak bound, normalization-factor bound).
    """
    if k < 1 or not (0 < delta1 < 0.5) or T <= 0:
        raise InvalidInputError("need k >= 1, 0 < delta1 < 1/2, T > 0")
    knobs = knobs or FilterHKnobs()

    if knobs.cache_dir is not None:
        cached = _load_h_cache(k, delta1, T, knobs)
        if cached is not None:
            return cached

    R = max(4, _next_pow2(knobs.c_r * k * k))
    S = R
    C = max(2, 2 * math.ceil(math.log2(1.0 / delta1) / 2))
    C0 = math.pi * math.ceil(C / math.pi)
    alpha_h = 0.5 + 1.2 / (math.pi * C0 * R)

    psi = _h_psi_factory(R, S, C, C0)
    lobe = math.pi / (C0 * R)
    sliding = _SlidingIntegral(psi, span=1.5 * alpha_h + 0.6,
                               panel_width=lobe / knobs.panels_per_lobe)

    i0 = float(sliding.window(np.array([0.0]))[0])
    if not np.isfinite(i0) or i0 <= 0:
        raise NumericFailureError(f"H quadrature degenerate: center integral {i0}")
    s0 = 1.0 / i0

    n = knobs.table_size
    t_grid = np.linspace(-0.25 * T, 1.25 * T, n)
    u = alpha_h * (2.0 * t_grid / T - 1.0)
    table = s0 * sliding.window(u)

    center = table[(n - 1) // 2]
    if abs(center - 1.0) > 1e-9:
        raise NumericFailureError(f"H center normalization off: H(T/2) = {center}")
    peak = float(np.max(np.abs(table)))
    if peak > 1.01:
        raise NumericFailureError(f"H peak {peak} exceeds 1.01")
    log2R = int(round(math.log2(R)))
    if log2R >= 1:
        bound = math.pi * C * R * math.sqrt(2 * C * log2R) * (1 + 1e-6)
        if s0 > bound:
            raise NumericFailureError(f"normalization s0 = {s0} above bound {bound}")

    dh = (2.0 * alpha_h / T) * (C * C0 / math.pi) * (
        R * log2R + S * (int(round(math.log2(S))) + 1)
    )

    h = FilterH(R=R, S=S, C=C, C0=C0, alpha_h=alpha_h, s0=s0, T=T,
                delta1=delta1, table=table, table_lo=-0.25 * T,
                table_dt=1.5 * T / (n - 1), dh=dh, k=k)
    if knobs.cache_dir is not None:
        _save_h_cache(h, k, knobs)
    return h


def eval_h(h: FilterH, t) -> float | np.ndarray:
    """Cubic interpolation of the H table; exactly 0 outside [-T/4, 5T/4]."""
    scalar = np.isscalar(t)
    ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = table_cubic(h.table, h.table_lo, h.table_dt, ts)
    return float(out[0]) if scalar else out


# --- optional binary cache for the H table ---------------------------------

_H_MAGIC = b"SIHTAB01"


def _h_cache_path(k: int, delta1: float, T: float, knobs: FilterHKnobs) -> Path:
    key = repr((k, delta1, T, knobs.c_r, knobs.table_size, knobs.panels_per_lobe))
    digest = hashlib.sha256(key.encode()).hexdigest()[:16]
    return Path(knobs.cache_dir) / f"htab_{digest}.bin"


def _save_h_cache(h: FilterH, k: int, knobs: FilterHKnobs) -> None:
    path = _h_cache_path(k, h.delta1, h.T, knobs)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = struct.pack(
        "<iiiddddddddq", h.R, h.S, h.C, h.C0, h.alpha_h, h.s0, h.T,
        h.delta1, h.dh, h.table_lo, h.table_dt, len(h.table),
    )
    with open(path, "wb") as fh:
        fh.write(_H_MAGIC)
        fh.write(header)
        fh.write(h.table.astype("<f8").tobytes())


def _load_h_cache(k: int, delta1: float, T: float,
                  knobs: FilterHKnobs) -> FilterH | None:
    path = _h_cache_path(k, delta1, T, knobs)
    if not path.exists():
        return None
    raw = path.read_bytes()
    if raw[:8] != _H_MAGIC:
        return None
    hdr_size = struct.calcsize("<iiiddddddddq")
    R, S, C, C0, alpha_h, s0, T2, d1, dh, lo, dt, n = struct.unpack(
        "<iiiddddddddq", raw[8:8 + hdr_size]
    )
    if T2 != T or d1 != delta1:
        return None
    table = np.frombuffer(raw[8 + hdr_size:], dtype="<f8", count=n).copy()
    return FilterH(R=R, S=S, C=C, C0=C0, alpha_h=alpha_h, s0=s0, T=T,
                   delta1=delta1, table=table, table_lo=lo, table_dt=dt,
                   dh=dh, k=k)


# ---------------------------------------------------------------------------
# frequency-domain bin filter G
# ---------------------------------------------------------------------------

def cardinal_bspline(u, l: int):
    """Cardinal B-spline of order l (l-fold convolution of the unit box).

    Divided-difference closed form; binomial coefficients move to log domain
    for l > 20 to avoid overflow (precision degrades with cancellation for
    very large l, which desk-scale configurations do not reach).
    """
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    out = np.zeros_like(u)
    inside = np.abs(u) < l / 2.0
    ui = u[inside]
    acc = np.zeros_like(ui)
    if l <= 20:
        fact = math.factorial(l - 1)
        for j in range(l + 1):
            term = math.comb(l, j) / fact * np.maximum(0.0, ui + l / 2.0 - j) ** (l - 1)
            acc += term if j % 2 == 0 else -term
    else:
        log_fact = math.lgamma(l)
        for j in range(l + 1):
            base = np.maximum(0.0, ui + l / 2.0 - j)
            pos = base > 0
            log_c = math.lgamma(l + 1) - math.lgamma(j + 1) - math.lgamma(l - j + 1)
            term = np.zeros_like(base)
            term[pos] = np.exp(log_c - log_fact + (l - 1) * np.log(base[pos]))
            acc += term if j % 2 == 0 else -term
    out[inside] = acc
    return out


@dataclass(frozen=True, eq=False)
class FilterG:
    """Flat-top bin filter for B bins.

    In the hashed frequency variable (period 1, bin centers at j/B) the
    response is >= 1 - delta/k for offsets within 1/(2B) of a center (so the
    B pass bands tile the period), falls through a transition layer of width
    alpha_g/(2B), and is below delta/k in magnitude beyond (1 + alpha_g)/(2B).
    In time the filter is a B-spline times a sinc with support radius
    l * w_box / 2.
    """

    B: int
    l: int
    alpha_g: float
    delta: float
    b0: float
    w_box: float
    w_f: float
    i0: float   # integral of sinc^l over the centered frequency window
    k: int
    phi: _SlidingIntegral  # antiderivative of sinc^l for fast response evals

    @property
    def support_radius(self) -> float:
        return self.l * self.w_box / 2.0

    def integer_support(self) -> np.ndarray:
        """All integers m with G(m) != 0."""
        m_max = int(math.ceil(self.support_radius)) - 1
        m_max = max(m_max, 0)
        return np.arange(-m_max, m_max + 1)


def build_filter_g(k: int, B: int, delta: float, alpha_g: float = 0.04,
                   c_l: float = 1.0) -> FilterG:
    """Construct the bin filter: B bins, stop-band leakage <= delta/k.

    The smoothing order is ``l = ceil(c_l * log2(k/delta))`` rounded up to an
    even integer so the frequency response stays nonnegative.
    """
    if B < 2 or (B & (B - 1)) != 0:
        raise InvalidInputError("B must be a power of two >= 2")
    if not (0 < alpha_g < 1) or delta <= 0 or k < 1:
        raise InvalidInputError("need 0 < alpha_g < 1, delta > 0, k >= 1")
    l = max(2, math.ceil(c_l * math.log2(max(2.0, k / delta))))
    if l % 2 == 1:
        l += 1
    # kernel tail radius alpha_g/(4B) puts the pass edge at the half-bin
    # offset 1/(2B) and the stop edge at (1 + alpha_g)/(2B)
    u_eff = 1.25 * (k / delta) ** (1.0 / l)
    w_box = 4.0 * u_eff * B / (math.pi * alpha_g)
    w_f = (1.0 + alpha_g / 2.0) / B

    def psi(nu):
        return _usinc(math.pi * w_box * nu) ** l

    # the response is negligible beyond the window edge plus a few dozen
    # kernel lobes; the antiderivative clips to that span
    span = w_f / 2.0 + 40.0 / w_box
    phi = _SlidingIntegral(psi, span=span, panel_width=1.0 / (6.0 * w_box),
                           window_width=w_f)
    i0 = float(phi.window(np.array([0.0]))[0])
    if not np.isfinite(i0) or i0 <= 0:
        raise NumericFailureError("G normalization integral degenerate")
    # b0 = 1 / (w_box^l * i0); informational, may underflow for very large l
    log_b0 = -l * math.log(w_box) - math.log(i0)
    b0 = math.exp(log_b0) if log_b0 > -700 else 0.0
    return FilterG(B=B, l=l, alpha_g=alpha_g, delta=delta, b0=b0,
                   w_box=w_box, w_f=w_f, i0=i0, k=k, phi=phi)


def eval_g_time(g: FilterG, t) -> float | np.ndarray:
    """Time-domain filter value; exactly 0 outside the compact support."""
    scalar = np.isscalar(t)
    ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
    # b0 * w_box^(l-1) == 1 / (w_box * i0): evaluate in that stable form
    spline = cardinal_bspline(ts / g.w_box, g.l)
    out = (spline / (g.w_box * g.i0)) * (g.w_f * _usinc(math.pi * ts * g.w_f))
    return float(out[0]) if scalar else out


def _ghat_hashvar(g: FilterG, theta) -> np.ndarray:
    """Frequency response in the hashed variable (one period, centered at 0)."""
    th = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    return g.phi.window(th) / g.i0


def eval_g_hat(g: FilterG, f) -> float | np.ndarray:
    """Frequency response in the pre-rescale argument.

    The pass band |f| <= (1 - alpha_g) * 2*pi/(2B) carries values in
    [1 - delta/k, 1]; beyond |f| = 2*pi/(2B) the response is at most delta/k
    in magnitude.  The hashed-variable response used by the bin filters is
    this function evaluated at 2*pi*(1 - alpha_g) times the bin offset.
    """
    scalar = np.isscalar(f)
    fs = np.atleast_1d(np.asarray(f, dtype=np.float64))
    theta = fs / (2.0 * math.pi * (1.0 - g.alpha_g))
    out = _ghat_hashvar(g, theta)
    return float(out[0]) if scalar else out


def eval_g_bin_hat(g: FilterG, sigma: float, b: float, j: int, f) -> float | np.ndarray:
    """Response of bin j at physical frequency f under hash parameters (sigma, b).

    Sums the periodized copies of the single-bin response at
    ``sigma*f + sigma*b - i - j/B`` over the finitely many integers i whose
    copy is non-negligible.
    """
    if not (0 <= j < g.B) or sigma <= 0:
        raise InvalidInputError("need 0 <= j < B and sigma > 0")
    scalar = np.isscalar(f)
    fs = np.atleast_1d(np.asarray(f, dtype=np.float64))
    theta = sigma * fs + sigma * b - j / g.B
    base = np.round(theta)
    out = np.zeros_like(fs)
    for di in (-1, 0, 1):
        out += _ghat_hashvar(g, theta - (base + di))
    return float(out[0]) if scalar else out
