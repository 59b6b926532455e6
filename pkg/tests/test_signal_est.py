import math

import numpy as np
import pytest

from sparseinterp import (InvalidInputError, MixedPolySignal, NoiseSpec,
                          SparseSignal, eval_sparse, make_oracle,
                          mixed_poly_eval, poly_to_fourier, signal_estimation,
                          signal_norm_sq, t_norm_sq, weighted_sketch)
from sparseinterp.signal_est import _design_matrix, dedup_freqs


class TestWeightedSketch:
    def test_single_point(self, rng):
        plan = weighted_sketch(1, 2, 1.0, rng)
        assert plan.renormalized.tolist() == [1.0]
        assert 0.0 <= plan.times[0] <= 1.0

    def test_renormalized_masses(self, rng):
        plan = weighted_sketch(500, 4, 2.0, rng)
        assert plan.renormalized.sum() == pytest.approx(1.0, abs=1e-12)

    def test_constant_estimator(self):
        k = 4
        m = int(64 * k * math.log2(k))
        hits = 0
        for trial in range(100):
            plan = weighted_sketch(m, k, 1.0, np.random.default_rng(trial))
            if abs(plan.weights.sum() - 1.0) <= 0.1:
                hits += 1
        assert hits >= 90


class TestSignalEstimation:
    def test_exact_interpolation_single_tone(self, rng):
        x = SparseSignal.from_arrays([5.0], [2.0 - 1.0j], 10.0)
        oracle = make_oracle(x, NoiseSpec("none"), 1.0, seed=0)
        mixed = signal_estimation(oracle, [5.0], d=0, T=1.0, rng=rng)
        assert mixed.coeffs[0, 0] == pytest.approx(2.0 - 1.0j, abs=1e-6)
        ts = np.linspace(0, 1, 513)
        resid = t_norm_sq(mixed_poly_eval(mixed, ts) - eval_sparse(x, ts), 1.0)
        assert resid < 1e-12

    def test_polynomial_absorbs_frequency_offset(self, rng):
        # tone at f0 + df fit over {f0} with degree 8, df*T = 0.5
        f0, df, T = 20.0, 0.5, 1.0
        x = SparseSignal.from_arrays([f0 + df], [1.0], 30.0)
        oracle = make_oracle(x, NoiseSpec("none"), T, seed=0)
        mixed = signal_estimation(oracle, [f0], d=8, T=T, rng=rng)
        ts = np.linspace(0, T, 2049)
        err = t_norm_sq(mixed_poly_eval(mixed, ts) - eval_sparse(x, ts), T)
        assert math.sqrt(err) <= 0.05 * math.sqrt(signal_norm_sq(x, T))

    def test_dedup(self):
        fr = dedup_freqs(np.array([10.0, 10.001, 12.0]), T=1.0)
        assert fr.tolist() == [10.0, 12.0]

    def test_needs_a_frequency(self, rng):
        oracle = make_oracle(SparseSignal((), 1.0), NoiseSpec("none"), 1.0, 0)
        with pytest.raises(InvalidInputError):
            signal_estimation(oracle, [], d=0, T=1.0, rng=rng)

    def test_first_order_optimality(self, rng):
        # perturbing the solution never lowers the residual of the weighted
        # system the fit actually solved
        x = SparseSignal.from_arrays([3.0, -7.0], [1.0, 0.5j], 10.0)
        oracle = make_oracle(x, NoiseSpec("hashed-gaussian", 0.2), 1.0, seed=4)
        d = 2
        plan = weighted_sketch(400, 2 * (d + 1), 1.0, np.random.default_rng(123))
        mixed = signal_estimation(oracle, [3.0, -7.0], d=d, T=1.0, rng=rng,
                                  plan=plan)
        a = _design_matrix(mixed.freqs, d, plan.times, 1.0)
        b = oracle.query(plan.times)
        sw = np.sqrt(plan.weights)
        v0 = mixed.coeffs.reshape(-1)
        base = np.linalg.norm((a @ v0 - b) * sw)
        perturb_rng = np.random.default_rng(7)
        for _ in range(20):
            dv = perturb_rng.normal(size=v0.shape) + 1j * perturb_rng.normal(size=v0.shape)
            dv *= 1e-4 / np.linalg.norm(dv)
            assert np.linalg.norm((a @ (v0 + dv) - b) * sw) >= base - 1e-12


class TestMixedPolyEval:
    def test_zero_coeffs(self):
        sig = MixedPolySignal(freqs=np.array([1.0]), coeffs=np.zeros((1, 3), complex),
                              degree=2, T=1.0)
        assert np.all(mixed_poly_eval(sig, np.linspace(0, 1, 7)) == 0)

    def test_constant_polynomial_is_pure_tone(self):
        c = np.zeros((1, 2), complex)
        c[0, 0] = 2.0
        sig = MixedPolySignal(freqs=np.array([3.0]), coeffs=c, degree=1, T=1.0)
        ts = np.linspace(0, 1, 11)
        want = 2.0 * np.exp(2j * np.pi * 3.0 * ts)
        assert np.allclose(mixed_poly_eval(sig, ts), want, atol=1e-12)

    def test_matches_naive_monomial_sum(self, rng):
        n, d = 3, 4
        freqs = rng.uniform(-5, 5, n)
        coeffs = rng.normal(size=(n, d + 1)) + 1j * rng.normal(size=(n, d + 1))
        sig = MixedPolySignal(freqs=freqs, coeffs=coeffs, degree=d, T=2.0)
        ts = rng.uniform(0, 2.0, 64)
        tau = 2 * ts / 2.0 - 1
        naive = np.zeros(64, complex)
        for j in range(n):
            poly = sum(coeffs[j, m] * tau ** m for m in range(d + 1))
            naive += poly * np.exp(2j * np.pi * freqs[j] * ts)
        assert np.allclose(mixed_poly_eval(sig, ts), naive, atol=1e-9)


class TestPolyToFourier:
    def test_constant_is_single_exact_tone(self):
        c = np.array([[1.5 - 2.0j]])
        sig = MixedPolySignal(freqs=np.array([7.0]), coeffs=c, degree=0, T=1.0)
        y = poly_to_fourier(sig, 1.0, eps=1e-9)
        assert y.k == 1
        assert y.tones[0].freq == pytest.approx(7.0)
        assert y.tones[0].coeff == pytest.approx(1.5 - 2.0j)

    def test_linear_polynomial_two_tones(self):
        # P(t) = t on [0,1]: tau-basis coefficients (1/2, 1/2)
        c = np.array([[0.5, 0.5]], dtype=complex)
        sig = MixedPolySignal(freqs=np.array([0.0]), coeffs=c, degree=1, T=1.0)
        y = poly_to_fourier(sig, 1.0, eps=1e-3)
        assert y.k == 2
        ts = np.linspace(0, 1, 1001)
        err = np.abs(eval_sparse(y, ts) - ts)
        assert np.max(err) <= 2e-3  # eps at the nodes; same order between them

    def test_output_sparsity(self, rng):
        d, n = 3, 2
        coeffs = 0.1 * (rng.normal(size=(n, d + 1)) + 1j * rng.normal(size=(n, d + 1)))
        sig = MixedPolySignal(freqs=np.array([5.0, -3.0]), coeffs=coeffs,
                              degree=d, T=1.0)
        y = poly_to_fourier(sig, 1.0, eps=1e-3)
        assert y.k == n * (d + 1)

    def test_round_trip(self, rng):
        for d in (2, 5, 8):
            coeffs = rng.normal(size=(1, d + 1)) + 1j * rng.normal(size=(1, d + 1))
            sig = MixedPolySignal(freqs=np.array([11.0]), coeffs=coeffs,
                                  degree=d, T=1.0)
            scale = np.abs(coeffs).max()
            eps = 5e-3 * scale
            y = poly_to_fourier(sig, 1.0, eps=eps)
            ts = rng.uniform(0, 1.0, 1000)
            err = np.abs(eval_sparse(y, ts) - mixed_poly_eval(sig, ts))
            assert np.max(err) <= 2 * eps

    def test_bad_eps(self):
        sig = MixedPolySignal(freqs=np.array([0.0]),
                              coeffs=np.array([[1.0 + 0j]]), degree=0, T=1.0)
        with pytest.raises(InvalidInputError):
            poly_to_fourier(sig, 1.0, eps=0.0)

    def test_unreachable_eps_raises(self, rng):
        # float64 cannot fit a dense degree-8 polynomial to 1e-12
        from sparseinterp import ConversionFailureError
        coeffs = rng.normal(size=(1, 9)) + 1j * rng.normal(size=(1, 9))
        sig = MixedPolySignal(freqs=np.array([0.0]), coeffs=coeffs,
                              degree=8, T=1.0)
        with pytest.raises(ConversionFailureError):
            poly_to_fourier(sig, 1.0, eps=1e-12)


class TestSetQuery:
    def test_recovery_against_noise_energy(self):
        # ||y - x_S||_T^2 <= 25 ||g||_T^2 with the true support known
        T, F, k = 1.0, 100.0, 2
        hits = 0
        for trial in range(30):
            rng = np.random.default_rng(9000 + trial)
            freqs = rng.uniform(-F, F, k)
            coeffs = np.exp(1j * rng.uniform(0, 2 * np.pi, k))
            x = SparseSignal.from_arrays(freqs, coeffs, F)
            oracle = make_oracle(x, NoiseSpec("fixed-tones", 0.1), T, seed=trial)
            mixed = signal_estimation(oracle, freqs, d=2, T=T, rng=rng)
            ts = np.linspace(0, T, 4097)
            err = t_norm_sq(mixed_poly_eval(mixed, ts) - eval_sparse(x, ts), T)
            gn = t_norm_sq(oracle.noise_values(ts), T)
            if err <= 25 * gn:
                hits += 1
        assert hits >= 27
