"""Hot numeric kernels with numba acceleration and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``RECOVER_NO_NUMBA`` is unset (or "0").  Set ``RECOVER_NO_NUMBA=1``
to force the numpy path; `benchmarks/bench_kernels.py` compares the two.

Both paths of each kernel are bit-deterministic for a fixed input: summation
order is fixed (tone order, then time order) and never depends on batch
composition, so querying the same time alone or inside a batch returns the
same bits.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via RECOVER_NO_NUMBA instead
    numba = None
    _HAS_NUMBA = False

USE_NUMBA = _HAS_NUMBA and os.environ.get("RECOVER_NO_NUMBA", "0") != "1"

_TWO_PI = 2.0 * math.pi

# splitmix64 constants
_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_M2 = np.uint64(0x94D049BB133111EB)
_SM_TWEAK = np.uint64(0xD1B54A32D192ED03)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53


# ---------------------------------------------------------------------------
# pure numpy implementations
# ---------------------------------------------------------------------------

def _tone_sum_np(freqs, coeffs, times):
    out = np.zeros(times.shape[0], dtype=np.complex128)
    # accumulate tone by tone: order fixed, independent of batching
    for j in range(freqs.shape[0]):
        out += coeffs[j] * np.exp((_TWO_PI * 1j * freqs[j]) * times)
    return out


def _splitmix_np(x):
    with np.errstate(over="ignore"):
        z = (x + _SM_GAMMA).astype(np.uint64)
        z = (z ^ (z >> np.uint64(30))) * _SM_M1
        z = (z ^ (z >> np.uint64(27))) * _SM_M2
        return z ^ (z >> np.uint64(31))


def _prf_gauss_np(seed, t_bits, std):
    key = t_bits ^ _splitmix_np(np.full(1, seed, dtype=np.uint64))[0]
    z1 = _splitmix_np(key)
    z2 = _splitmix_np(key ^ _SM_TWEAK)
    u1 = ((z1 >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53
    u2 = ((z2 >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53
    r = std * np.sqrt(-np.log(u1))
    ang = _TWO_PI * u2
    return r * np.cos(ang) + 1j * (r * np.sin(ang))


def _table_cubic_np(table, lo, dt, ts):
    """Catmull-Rom cubic through a uniform table; 0 outside its span."""
    n = table.shape[0]
    out = np.zeros(ts.shape[0])
    x = (ts - lo) / dt
    inside = (x >= 0.0) & (x <= n - 1)
    xi = x[inside]
    i1 = np.floor(xi).astype(np.int64)
    np.clip(i1, 0, n - 2, out=i1)
    s = xi - i1
    i0 = np.maximum(i1 - 1, 0)
    i2 = i1 + 1
    i3 = np.minimum(i1 + 2, n - 1)
    p0, p1, p2, p3 = table[i0], table[i1], table[i2], table[i3]
    out[inside] = p1 + 0.5 * s * (
        p2 - p0 + s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + s * (3.0 * (p1 - p2) + p3 - p0))
    )
    return out


# ---------------------------------------------------------------------------
# numba implementations (same bit-level arithmetic, scalar loops)
# ---------------------------------------------------------------------------

if USE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _tone_sum_nb(freqs, coeffs, times):
        n = times.shape[0]
        k = freqs.shape[0]
        out = np.zeros(n, dtype=np.complex128)
        for j in range(k):
            w = _TWO_PI * freqs[j]
            c = coeffs[j]
            for i in range(n):
                ph = w * times[i]
                out[i] += c * complex(math.cos(ph), math.sin(ph))
        return out

    @numba.njit(cache=True, nogil=True)
    def _splitmix_scalar(x):
        z = (x + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
        z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(0xFFFFFFFFFFFFFFFF)
        z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(0xFFFFFFFFFFFFFFFF)
        return z ^ (z >> np.uint64(31))

    @numba.njit(cache=True, nogil=True)
    def _prf_gauss_nb(seed, t_bits, std):
        n = t_bits.shape[0]
        out = np.empty(n, dtype=np.complex128)
        skey = _splitmix_scalar(seed)
        for i in range(n):
            key = t_bits[i] ^ skey
            z1 = _splitmix_scalar(key)
            z2 = _splitmix_scalar(key ^ np.uint64(0xD1B54A32D192ED03))
            u1 = (float(z1 >> np.uint64(11)) + 0.5) * _INV_2_53
            u2 = (float(z2 >> np.uint64(11)) + 0.5) * _INV_2_53
            r = std * math.sqrt(-math.log(u1))
            ang = _TWO_PI * u2
            out[i] = complex(r * math.cos(ang), r * math.sin(ang))
        return out

    @numba.njit(cache=True, nogil=True)
    def _table_cubic_nb(table, lo, dt, ts):
        n = table.shape[0]
        m = ts.shape[0]
        out = np.zeros(m)
        for q in range(m):
            x = (ts[q] - lo) / dt
            if x < 0.0 or x > n - 1:
                continue
            i1 = int(math.floor(x))
            if i1 > n - 2:
                i1 = n - 2
            if i1 < 0:
                i1 = 0
            s = x - i1
            i0 = i1 - 1 if i1 > 0 else 0
            i2 = i1 + 1
            i3 = i1 + 2 if i1 + 2 < n else n - 1
            p0 = table[i0]
            p1 = table[i1]
            p2 = table[i2]
            p3 = table[i3]
            out[q] = p1 + 0.5 * s * (
                p2 - p0 + s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + s * (3.0 * (p1 - p2) + p3 - p0))
            )
        return out

    tone_sum = _tone_sum_nb
    prf_gauss = _prf_gauss_nb
    table_cubic = _table_cubic_nb
else:
    tone_sum = _tone_sum_np
    prf_gauss = _prf_gauss_np
    table_cubic = _table_cubic_np


def tone_sum_at(freqs, coeffs, times):
    """Sum of complex tones at the given times (1-D float64 array)."""
    if freqs.shape[0] == 0:
        return np.zeros(times.shape[0], dtype=np.complex128)
    return tone_sum(freqs, coeffs, times)
