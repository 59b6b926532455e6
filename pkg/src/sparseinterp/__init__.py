"""Sparse Fourier interpolation from noisy continuous-time samples.

Recover a k-tone band-limited signal observed on [0, T]: hash frequencies
into bins with randomized window filters, estimate each bin's dominant
frequency by multi-scale vote search over significant samples, fit tone
amplitudes (with polynomial slack) by importance-weighted least squares, and
boost the success probability with a min-of-median pick among independent
runs.
"""

from .errors import (ConfigurationError, ConversionFailureError,
                     InvalidInputError, NumericFailureError, SparseInterpError)
from .filters import (FilterG, FilterH, FilterHKnobs, build_filter_g,
                      build_filter_h, eval_g_bin_hat, eval_g_hat, eval_g_time,
                      eval_h)
from .freq_est import (FrequencyList, SampleTensor, SearchConfig, ary_search,
                       frequency_estimation_x, frequency_estimation_z,
                       precompute_samples, rounds_for)
from .hashing import BinVector, HashParams, draw_hash_params, hash_bin, hash_to_bins
from .pipeline import (PipelineConfig, RecoveryReport,
                       constant_prob_interpolate, high_prob_interpolate,
                       merge_signals, resolve)
from .sampling import (TimeDistribution, WeightedSampleSet, build_dist,
                       draw_weighted, weighted_norm_sq)
from .signal_core import (NoiseSpec, SampleOracle, SparseSignal, Tone,
                          eval_sparse, make_oracle, signal_norm_sq, t_norm_sq)
from .signal_est import (MixedPolySignal, SketchPlan, mixed_poly_eval,
                         poly_to_fourier, signal_estimation, weighted_sketch)
from .significant import (GoodIntervalU, SignificantSampleBatch,
                          compute_good_interval, generate_significant_samples)

__version__ = "0.1.0"

__all__ = [
    "BinVector", "ConfigurationError", "ConversionFailureError", "FilterG",
    "FilterH", "FilterHKnobs", "FrequencyList", "GoodIntervalU", "HashParams",
    "InvalidInputError", "MixedPolySignal", "NoiseSpec", "NumericFailureError",
    "PipelineConfig", "RecoveryReport", "SampleOracle", "SampleTensor",
    "SearchConfig", "SignificantSampleBatch", "SketchPlan", "SparseInterpError",
    "SparseSignal", "TimeDistribution", "Tone", "WeightedSampleSet",
    "ary_search", "build_dist", "build_filter_g", "build_filter_h",
    "compute_good_interval", "constant_prob_interpolate", "draw_hash_params",
    "draw_weighted", "eval_g_bin_hat", "eval_g_hat", "eval_g_time", "eval_h",
    "eval_sparse", "frequency_estimation_x", "frequency_estimation_z",
    "generate_significant_samples", "hash_bin", "hash_to_bins",
    "high_prob_interpolate", "make_oracle", "merge_signals", "mixed_poly_eval",
    "poly_to_fourier", "precompute_samples", "resolve", "rounds_for",
    "signal_estimation", "signal_norm_sq", "t_norm_sq", "weighted_norm_sq",
    "weighted_sketch",
]
