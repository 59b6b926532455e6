import math

import numpy as np
import pytest

from sparseinterp import (InvalidInputError, SparseSignal, build_dist,
                          draw_weighted, eval_sparse, signal_norm_sq,
                          weighted_norm_sq)


class TestBuildDist:
    def test_closed_form_normalizer(self):
        # c^{-1} = 2 ln k + 2 for the full window; k = e^2 gives exactly 1/6
        dist = build_dist(math.e ** 2, 1.0)
        assert dist.c == pytest.approx(1.0 / 6.0, rel=1e-12)

    def test_density_integrates_to_one(self):
        for k in (2, 5, 16):
            dist = build_dist(k, 2.0)
            ts = np.linspace(-2.0, 2.0, 400001)
            assert np.trapezoid(dist.density(ts), ts) == pytest.approx(1.0, abs=1e-4)

    def test_density_center_and_edge(self):
        k, T = 8, 3.0
        dist = build_dist(k, T)
        assert dist.density(0.0)[0] == pytest.approx(dist.c / T)
        t_edge = T * (1 - 1 / (2 * k))
        assert dist.density(t_edge)[0] == pytest.approx(dist.c * k / T)

    def test_restricted_normalizer(self):
        k, T = 4, 1.0
        be = T * (1 - 1 / k)
        dist = build_dist(k, T, (-T, be))  # clip the right edge band entirely
        ts = np.linspace(-T, T, 400001)
        assert np.trapezoid(dist.density(ts), ts) == pytest.approx(1.0, abs=1e-4)

    def test_rejects_bad_restriction(self):
        with pytest.raises(InvalidInputError):
            build_dist(4, 1.0, (-0.5, 0.5))   # does not contain the bulk
        with pytest.raises(InvalidInputError):
            build_dist(4, 1.0, (-2.0, 1.0))   # exceeds the window
        with pytest.raises(InvalidInputError):
            build_dist(1, 1.0)


class TestInverseCdf:
    def test_roundtrip(self):
        dist = build_dist(6, 1.5, (-1.4, 1.45))
        ts = np.linspace(-1.39, 1.44, 97)
        back = dist.inv_cdf(dist.cdf(ts))
        assert np.allclose(back, ts, atol=1e-9)

    def test_ks_statistic(self):
        dist = build_dist(4, 1.0)
        rng = np.random.default_rng(0)
        draws = np.sort(dist.inv_cdf(rng.random(100000)))
        cdf = dist.cdf(draws)
        n = draws.shape[0]
        ecdf_hi = np.arange(1, n + 1) / n
        ks = np.max(np.maximum(np.abs(ecdf_hi - cdf), np.abs(cdf - (ecdf_hi - 1 / n))))
        assert ks < 0.01


class TestDrawWeighted:
    def test_single_sample(self, rng):
        dist = build_dist(3, 1.0)
        ws = draw_weighted(dist, 1, rng)
        t = ws.times[0]
        assert dist.L <= t <= dist.R
        want = 1.0 / (dist.window_length * dist.density(t)[0])
        assert ws.weights[0] == pytest.approx(want)

    def test_constant_function_estimator(self):
        # ||1||^2_{S,w} = sum(w) ~ 1 at s = O(k log k); the per-sample std is
        # ~0.53/sqrt(s), so +-0.05 at 95% needs the constant at 64, not 10
        k = 4
        s = int(64 * k * math.log2(k))
        dist = build_dist(k, 1.0)
        hits = 0
        for trial in range(100):
            ws = draw_weighted(dist, s, np.random.default_rng(trial))
            if abs(ws.weights.sum() - 1.0) <= 0.05:
                hits += 1
        assert hits >= 95

    def test_unbiasedness(self):
        # average of many single-sample estimates reproduces window energy
        dist = build_dist(3, 1.0)
        rng = np.random.default_rng(7)
        fns = [lambda t: np.ones_like(t),
               lambda t: np.exp(2j * np.pi * 1.7 * t),
               lambda t: 1.0 + 0.5 * np.exp(2j * np.pi * 3.0 * t)]
        grid = np.linspace(-1, 1, 40001)
        for fn in fns:
            want = np.trapezoid(np.abs(fn(grid)) ** 2, grid) / 2.0
            ws = draw_weighted(dist, 10000, rng)
            # treat the 10^4 draws as 10^4 single-sample estimates
            est = np.mean(10000 * ws.weights * np.abs(fn(ws.times)) ** 2)
            assert est == pytest.approx(want, rel=0.02)


class TestWeightedNorm:
    def test_zeros(self):
        assert weighted_norm_sq(np.zeros(5), np.ones(5)) == 0.0

    def test_single(self):
        assert weighted_norm_sq([3.0 + 4.0j], [0.1]) == pytest.approx(2.5)

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            weighted_norm_sq([1.0, 2.0], [1.0])

    @pytest.mark.parametrize("k", [2, 4])
    def test_energy_sandwich_sparse_signal(self, k):
        # the (1 +- 0.2) sandwich at s = 50 k log2 k, >= 90/100 seeded trials
        T = 1.0
        s = int(50 * k * math.log2(k))
        hits = 0
        for trial in range(100):
            rng = np.random.default_rng(1000 + trial)
            freqs = rng.uniform(-40, 40, k)
            coeffs = rng.normal(size=k) + 1j * rng.normal(size=k)
            x = SparseSignal.from_arrays(freqs, coeffs, 40.0)
            truth = signal_norm_sq(x, T)
            dist = build_dist(k, T / 2)
            ws = draw_weighted(dist, s, rng)
            vals = eval_sparse(x, ws.times + T / 2)
            est = weighted_norm_sq(vals, ws.weights)
            if 0.8 * truth <= est <= 1.2 * truth:
                hits += 1
        assert hits >= 90
