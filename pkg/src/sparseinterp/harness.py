"""Experiment runner: instance generation, trials, metrics, reports.

Configs are JSON in / JSON + CSV out with a pinned schema_version; a fixed
seed reproduces a byte-identical report (wall-clock timings go to a separate
sidecar file so the main report stays deterministic).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .freq_est import frequency_estimation_x
from .hashing import draw_hash_params
from .pipeline import PipelineConfig, RecoveryReport, high_prob_interpolate, resolve
from .signal_core import (NoiseSpec, SparseSignal, eval_sparse, make_oracle,
                          signal_norm_sq, t_norm_sq)

SCHEMA_VERSION = 3

CSV_COLUMNS = [
    "schema_version", "trial", "seed", "k", "noise_level", "rel_error",
    "abs_error", "noise_norm", "freq_queries", "signal_queries",
    "total_queries", "output_sparsity",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: instance law, noise, pipeline knobs, trial count."""

    k: int
    F: float
    T: float
    trials: int = 10
    seed: int = 0
    sep_mult: float = 8.0            # min pairwise gap, in units of delta_freq
    amplitude_law: str = "unit"      # "unit" (random phase) or "loguniform"
    amp_lo: float = 0.5
    amp_hi: float = 2.0
    hard_mode: bool = False          # drop the separation floor entirely
    noise_kind: str = "none"
    noise_level: float = 0.0
    label_bins: bool = False         # run the slow diagnostics per trial
    pipeline: dict = field(default_factory=dict)
    out_dir: str | None = None

    def pipeline_config(self, seed: int) -> PipelineConfig:
        return PipelineConfig(k=self.k, F=self.F, T=self.T, seed=seed,
                              **self.pipeline)


@dataclass
class TrialRecord:
    trial: int
    seed: int
    rel_error: float
    abs_error: float
    noise_norm: float
    freq_queries: int
    signal_queries: int
    total_queries: int
    output_sparsity: int
    wall_time: float
    bin_labels: list = field(default_factory=list)

    def __post_init__(self):
        if self.rel_error < 0 or self.abs_error < 0:
            raise InvalidInputError("error fields must be nonnegative")


def config_to_json(cfg: ExperimentConfig) -> str:
    return json.dumps(dataclasses.asdict(cfg), indent=2, sort_keys=True)


def config_from_json(text: str) -> ExperimentConfig:
    data = json.loads(text)
    return ExperimentConfig(**data)


def generate_instance(cfg: ExperimentConfig, rng: np.random.Generator,
                      min_gap: float) -> SparseSignal:
    """Random k-tone ground truth with the configured separation and amplitudes."""
    freqs: list[float] = []
    gap = 0.0 if cfg.hard_mode else min_gap
    tries = 0
    while len(freqs) < cfg.k:
        f = rng.uniform(-cfg.F, cfg.F)
        if all(abs(f - f2) >= gap for f2 in freqs):
            freqs.append(f)
        tries += 1
        if tries > 10000 * max(1, cfg.k):
            raise InvalidInputError(
                "cannot place tones with the requested separation; "
                "lower sep_mult or k"
            )
    if cfg.amplitude_law == "loguniform":
        mag = np.exp(rng.uniform(math.log(cfg.amp_lo), math.log(cfg.amp_hi), cfg.k))
    else:
        mag = np.ones(cfg.k)
    phase = rng.uniform(0.0, 2.0 * math.pi, cfg.k)
    coeffs = mag * np.exp(1j * phase)
    return SparseSignal.from_arrays(freqs, coeffs, cfg.F)


def _measure_error(xstar: SparseSignal, y: SparseSignal, T: float,
                   n_grid: int) -> tuple[float, float]:
    ts = np.linspace(0.0, T, n_grid)
    diff = eval_sparse(y, ts) - eval_sparse(xstar, ts) if (y.k or xstar.k) else np.zeros(n_grid)
    abs_err = math.sqrt(t_norm_sq(diff, T))
    ref = math.sqrt(signal_norm_sq(xstar, T, n_grid)) if xstar.k else 1.0
    return abs_err, abs_err / ref if ref > 0 else abs_err


def run_trial(cfg: ExperimentConfig, trial: int, seed: int) -> TrialRecord:
    rng = np.random.default_rng(np.random.SeedSequence([seed, trial]))
    pcfg = cfg.pipeline_config(seed=int(rng.integers(0, 2 ** 62)))
    rp = resolve(pcfg)
    min_gap = cfg.sep_mult * rp.delta_freq
    xstar = generate_instance(cfg, rng, min_gap)
    noise = NoiseSpec(cfg.noise_kind, cfg.noise_level)
    oracle = make_oracle(xstar, noise, cfg.T, seed=int(rng.integers(0, 2 ** 62)))

    t0 = time.perf_counter()
    report: RecoveryReport = high_prob_interpolate(oracle, pcfg)
    wall = time.perf_counter() - t0

    n_grid = 4096 * max(1, cfg.k) + 1
    abs_err, rel_err = _measure_error(xstar, report.output, cfg.T, n_grid)
    gnorm = 0.0
    if cfg.noise_kind != "none" and cfg.noise_level > 0:
        ts = np.linspace(0.0, cfg.T, n_grid)
        gnorm = math.sqrt(t_norm_sq(oracle.noise_values(ts), cfg.T))

    labels: list = []
    if cfg.label_bins and xstar.k:
        from .diagnostics import label_bins as diag_labels
        p = draw_hash_params(rp.delta0, rp.B, cfg.F,
                             np.random.default_rng(np.random.SeedSequence([seed, 1])),
                             sigma_range=pcfg.sigma_range)
        g_split = (oracle._g_tones if cfg.noise_kind == "fixed-tones"
                   and oracle._g_tones is not None else SparseSignal((), cfg.F))
        nsq = gnorm ** 2 + pcfg.delta * signal_norm_sq(xstar, cfg.T, n_grid)
        labels = [dataclasses.asdict(lb) for lb in diag_labels(
            xstar, g_split, rp.h, rp.g, p, rp.delta_freq, 1.0, nsq)]

    return TrialRecord(
        trial=trial, seed=seed, rel_error=rel_err, abs_error=abs_err,
        noise_norm=gnorm, freq_queries=sum(report.freq_queries),
        signal_queries=sum(report.signal_queries),
        total_queries=report.total_queries,
        output_sparsity=report.output.k, wall_time=wall,
        bin_labels=labels,
    )


def _pool_size() -> int:
    env = os.environ.get("RECOVER_THREADS")
    if env:
        return max(1, int(env))
    return 1


def run_experiment(cfg: ExperimentConfig) -> list[TrialRecord]:
    """Run all trials (each with a derived seed) and optionally emit reports."""
    seeds = [int(s.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFFFFFFFFFF)
             for s in np.random.SeedSequence(cfg.seed).spawn(max(cfg.trials, 1))]
    records: list[TrialRecord] = []
    if cfg.trials > 0:
        workers = _pool_size()
        if workers == 1:
            records = [run_trial(cfg, i, seeds[i]) for i in range(cfg.trials)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futs = [pool.submit(run_trial, cfg, i, seeds[i])
                        for i in range(cfg.trials)]
                records = [f.result() for f in futs]
            records.sort(key=lambda r: r.trial)
    if cfg.out_dir is not None:
        write_reports(cfg, records, Path(cfg.out_dir))
    return records


def write_reports(cfg: ExperimentConfig, records: list[TrialRecord],
                  out_dir: Path) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise InvalidInputError(f"output path not writable: {out_dir}") from exc

    cfg_dict = dataclasses.asdict(cfg)
    cfg_dict.pop("out_dir", None)  # environment detail, not experiment identity
    body = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg_dict,
        "records": [
            {k: v for k, v in dataclasses.asdict(r).items() if k != "wall_time"}
            for r in records
        ],
    }
    (out_dir / "report.json").write_text(json.dumps(body, indent=2, sort_keys=True))
    (out_dir / "timings.json").write_text(json.dumps(
        {"wall_times": [r.wall_time for r in records]}, indent=2))
    with open(out_dir / "trials.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([
                SCHEMA_VERSION, r.trial, r.seed, cfg.k, cfg.noise_level,
                f"{r.rel_error:.12g}", f"{r.abs_error:.12g}",
                f"{r.noise_norm:.12g}", r.freq_queries, r.signal_queries,
                r.total_queries, r.output_sparsity,
            ])


def run_freq_stage(cfg: ExperimentConfig, trial: int, seed: int) -> dict:
    """Frequency-estimation-only trial: query counts and per-tone errors."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, trial]))
    pcfg = cfg.pipeline_config(seed=int(rng.integers(0, 2 ** 62)))
    rp = resolve(pcfg)
    xstar = generate_instance(cfg, rng, cfg.sep_mult * rp.delta_freq)
    noise = NoiseSpec(cfg.noise_kind, cfg.noise_level)
    oracle = make_oracle(xstar, noise, cfg.T, seed=int(rng.integers(0, 2 ** 62)))
    p = draw_hash_params(rp.delta0, rp.B, cfg.F, rng, sigma_range=pcfg.sigma_range)
    q0 = oracle.query_count
    flist = frequency_estimation_x(oracle, rp.h, rp.g, p, cfg.F, cfg.T,
                                   rp.delta_freq, rp.search, rng)
    queries = oracle.query_count - q0
    errors = []
    est = flist.freqs()
    for tone in xstar.tones:
        errors.append(float(np.min(np.abs(est - tone.freq))) if est.size else math.inf)
    return {"trial": trial, "queries": queries, "n_found": len(flist),
            "tone_errors": errors, "delta_freq": rp.delta_freq}


def scaling_sweep(cfg: ExperimentConfig, k_list: list[int]) -> dict:
    """Median frequency-stage query counts per k and the log-log slope."""
    if not k_list or sorted(k_list) != list(k_list):
        raise InvalidInputError("k_list must be nonempty and ascending")
    rows = []
    for k in k_list:
        sub = dataclasses.replace(cfg, k=k)
        seeds = [int(s.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFFFFFFFFFF)
                 for s in np.random.SeedSequence(cfg.seed + k).spawn(cfg.trials)]
        stats = [run_freq_stage(sub, i, seeds[i]) for i in range(cfg.trials)]
        rows.append({
            "k": k,
            "median_freq_queries": float(np.median([s["queries"] for s in stats])),
            "trials": cfg.trials,
        })
    ks = np.log2([r["k"] for r in rows])
    qs = np.log2([r["median_freq_queries"] for r in rows])
    slope = float(np.polyfit(ks, qs, 1)[0]) if len(rows) > 1 else float("nan")
    return {"schema_version": SCHEMA_VERSION, "rows": rows,
            "freq_query_slope": slope}
