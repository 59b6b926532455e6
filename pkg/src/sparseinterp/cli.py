"""Command-line experiment runner (`recover`).

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

from .errors import InvalidInputError, NumericFailureError, SparseInterpError
from .harness import (SCHEMA_VERSION, config_from_json, run_experiment,
                      scaling_sweep, write_reports)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="recover",
        description="Recover a sparse tone sum from noisy samples and report metrics.",
    )
    ap.add_argument("--config", required=True, help="experiment config (JSON)")
    ap.add_argument("--seed", type=int, default=None, help="override config seed")
    ap.add_argument("--trials", type=int, default=None, help="override trial count")
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("--stage", choices=["freq", "full"], default="full",
                    help="run only frequency estimation, or the full pipeline")
    ap.add_argument("--sweep", default=None,
                    help="scaling sweep over k, e.g. k=2,4,8,16")
    ap.add_argument("--emit-plots", action="store_true",
                    help="write simple static plots next to the CSVs")
    return ap


def _parse_sweep(arg: str) -> list[int]:
    if not arg.startswith("k="):
        raise InvalidInputError("--sweep expects k=2,4,8,16")
    ks = [int(x) for x in arg[2:].split(",") if x]
    if not ks:
        raise InvalidInputError("--sweep got an empty k list")
    return ks


def _emit_plots(out_dir: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    trials_csv = out_dir / "trials.csv"
    if trials_csv.exists():
        with open(trials_csv) as fh:
            rows = list(csv.DictReader(fh))
        if rows:
            errs = [float(r["rel_error"]) for r in rows]
            fig, ax = plt.subplots()
            ax.hist(errs, bins=20)
            ax.set_xlabel("relative error")
            ax.set_ylabel("trials")
            fig.savefig(out_dir / "rel_error_hist.png", dpi=120)
            plt.close(fig)
    sweep_json = out_dir / "sweep.json"
    if sweep_json.exists():
        data = json.loads(sweep_json.read_text())
        ks = [r["k"] for r in data["rows"]]
        qs = [r["median_freq_queries"] for r in data["rows"]]
        fig, ax = plt.subplots()
        ax.loglog(ks, qs, "o-")
        ax.set_xlabel("k")
        ax.set_ylabel("median frequency-stage queries")
        ax.set_title(f"slope {data['freq_query_slope']:.2f}")
        fig.savefig(out_dir / "query_scaling.png", dpi=120)
        plt.close(fig)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = config_from_json(Path(args.config).read_text())
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.trials is not None:
            cfg = dataclasses.replace(cfg, trials=args.trials)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, out_dir=args.out)

        out_dir = Path(cfg.out_dir) if cfg.out_dir else None
        if args.sweep:
            ks = _parse_sweep(args.sweep)
            table = scaling_sweep(cfg, ks)
            text = json.dumps(table, indent=2, sort_keys=True)
            print(text)
            if out_dir:
                out_dir.mkdir(parents=True, exist_ok=True)
                (out_dir / "sweep.json").write_text(text)
        elif args.stage == "freq":
            from .harness import run_freq_stage
            import numpy as np
            seeds = [int(s.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFFFFFFFFFF)
                     for s in np.random.SeedSequence(cfg.seed).spawn(max(1, cfg.trials))]
            stats = [run_freq_stage(cfg, i, seeds[i]) for i in range(cfg.trials)]
            print(json.dumps({"schema_version": SCHEMA_VERSION, "stats": stats},
                             indent=2))
        else:
            records = run_experiment(cfg)
            ok = sum(1 for r in records)
            print(f"ran {ok} trials; median relative error "
                  f"{sorted(r.rel_error for r in records)[ok // 2]:.4g}"
                  if ok else "ran 0 trials")
            if out_dir and not records:
                write_reports(cfg, [], out_dir)
        if args.emit_plots and out_dir:
            _emit_plots(out_dir)
    except (OSError, json.JSONDecodeError, TypeError, InvalidInputError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericFailureError, SparseInterpError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
