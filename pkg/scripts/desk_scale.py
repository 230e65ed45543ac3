#!/usr/bin/env python3
"""
Desk-scale acceptance runs: rank recovery, detection ordering, strong interference.

Runs the sweeps in config/desk_rank.conf, config/desk_snr.conf and
config/desk_sir.conf, prints each summary table and a PASS/FAIL line per check.
Expect several minutes on a desktop.

Usage:
    pip install -e .
    python scripts/desk_scale.py --threads 4
"""

import argparse
import logging
import sys
from pathlib import Path

from structglrt.harness.config_file import load_experiment
from structglrt.harness.sweep import run_sweep

CONFIG_DIR = Path(__file__).parent.parent / "config"


def run(name: str, threads: int, trials: int | None):
    experiment = load_experiment(CONFIG_DIR / name)
    result = run_sweep(
        experiment.sweep, experiment.scenario, experiment.detectors, threads, trials
    )
    print(f"\n{name}  ({experiment.sweep.axis}, {experiment.sweep.metric})")
    for row in result.rows:
        print(f"  {row.axis_value:>8g}  {row.detector:<18} value={row.value:.4f} "
              f"N_hat={row.mean_n_hat:.2f} iters={row.mean_iterations:.1f} errors={row.errors}")
    table: dict[str, list] = {}
    for row in result.rows:
        table.setdefault(row.detector, []).append(row)
    return table


def check(label: str, ok: bool) -> bool:
    print(f"{'PASS' if ok else 'FAIL'}  {label}")
    return ok


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument("--threads", type=int, default=4)
    parser.add_argument("--trials", type=int, help="Override sweep.trials in every file")
    args = parser.parse_args()
    logging.basicConfig(level=logging.WARNING)

    results = []

    rank = run("desk_rank.conf", args.threads, args.trials)
    results.append(check(
        "mean N_hat within 1 of N (kmr-em, mcw-em)",
        all(abs(r.mean_n_hat - r.axis_value) <= 1 for rows in rank.values() for r in rows),
    ))

    pd = {name: [r.value for r in rows]
          for name, rows in run("desk_snr.conf", args.threads, args.trials).items()}
    results.append(check(
        "EM at least as good as training-only at every point",
        all(pd["kmr-em"][i] >= pd["kmr-tr"][i] and pd["mcw-em"][i] >= pd["mcw-tr"][i]
            for i in range(len(pd["kmr-em"]))),
    ))
    results.append(check(
        "margin of 0.02 at the middle point",
        pd["kmr-em"][1] - pd["kmr-tr"][1] >= 0.02 and pd["mcw-em"][1] - pd["mcw-tr"][1] >= 0.02,
    ))
    results.append(check(
        "soft decisions at least as good as hard",
        all(pd["kmr-em"][i] >= pd["forsythe-lowrank"][i]
            and pd["mcw-em"][i] >= pd["hard-mcw-em"][i]
            for i in range(len(pd["kmr-em"]))),
    ))

    sir = run("desk_sir.conf", args.threads, args.trials)
    results.append(check(
        "min error <= 0.01 at the strongest interference (kmr-em, mcw-em)",
        all(sir[name][-1].value <= 0.01 for name in ("kmr-em", "mcw-em")),
    ))

    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
