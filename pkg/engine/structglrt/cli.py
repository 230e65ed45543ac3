"""Command-line entry point: simulate, sweep, calibrate, report."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from structglrt.config import settings
from structglrt.errors import ConfigError, DetectionError
from structglrt.harness.calibrate import summarize
from structglrt.harness.config_file import ExperimentConfig, load_experiment, parse_experiment
from structglrt.harness.report import emit_report, read_manifest, read_records
from structglrt.harness.runner import run_point
from structglrt.harness.sweep import run_sweep
from structglrt.schemas.experiment import SummaryRow

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DEFAULT_TRIALS = 100
POINT_AXIS = "point"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="structglrt",
        description="Monte Carlo experiments for structured-signal GLRT detectors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Experiment file (key = value)")
    common.add_argument("--out", type=Path, help=f"Output directory (default {settings.out_dir})")
    common.add_argument("--seed", type=int, help="Master seed; overrides scenario.seed")
    common.add_argument("--trials", type=int, help="Paired trials per point")
    common.add_argument("--detectors", help="Comma-separated detector names")
    common.add_argument("--threads", type=int, help=f"Worker threads (default {settings.threads})")

    sub.add_parser("simulate", parents=[common], help="Run one scenario point")
    sub.add_parser("sweep", parents=[common], help="Run every value of sweep.axis")

    for name, text in (
        ("calibrate", "Print thresholds from saved records"),
        ("report", "Re-emit summary, plot script and manifest from saved records"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--metric", choices=["pd_at_pfa", "min_error"])
        p.add_argument("--pfa", type=float)
    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    names = None
    if args.detectors:
        names = [n.strip() for n in args.detectors.split(",") if n.strip()]
    if args.config is not None:
        experiment = load_experiment(args.config, settings.default_seed, names)
    else:
        experiment = parse_experiment("", settings.default_seed, names)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError(f"--seed must be >= 0, got {args.seed}")
        experiment.scenario = experiment.scenario.model_copy(update={"seed": args.seed})
    return experiment


def _manifest(command: str, experiment: ExperimentConfig, axis: str, trials: int) -> dict:
    return {
        "command": command,
        "axis": axis,
        "seed": experiment.scenario.seed,
        "trials": trials,
        "config": experiment.echo(),
    }


def _print_rows(rows: Sequence[SummaryRow]) -> None:
    print(f"{'axis_value':>12} {'detector':<18} {'metric':<10} {'value':>8} "
          f"{'threshold':>12} {'N_hat':>6} {'iters':>6} {'errors':>6}")
    for row in rows:
        axis_value = "-" if row.axis_value is None else f"{row.axis_value:g}"
        print(f"{axis_value:>12} {row.detector:<18} {row.metric:<10} {row.value:>8.4f} "
              f"{row.threshold:>12.5g} {row.mean_n_hat:>6.2f} {row.mean_iterations:>6.1f} "
              f"{row.errors:>6d}")


def cmd_simulate(args: argparse.Namespace) -> int:
    experiment = _load(args)
    trials = args.trials or (experiment.sweep.trials if experiment.sweep else DEFAULT_TRIALS)
    metric = experiment.sweep.metric if experiment.sweep else "pd_at_pfa"
    pfa = experiment.sweep.pfa if experiment.sweep else 0.01
    threads = args.threads or settings.threads

    timings: dict[str, float] = {}
    records = run_point(experiment.scenario, experiment.detectors, trials, threads,
                        timings=timings)
    rows = summarize(records, POINT_AXIS, metric, pfa, experiment.detector_names)
    out = args.out or Path(settings.out_dir)
    emit_report(
        out, POINT_AXIS, records, rows,
        _manifest("simulate", experiment, POINT_AXIS, trials),
        timings=[(float("nan"), name, seconds) for name, seconds in timings.items()],
    )
    _print_rows(rows)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    experiment = _load(args)
    if experiment.sweep is None:
        raise ConfigError("sweep needs sweep.values in the config file")
    sweep = experiment.sweep
    if args.trials is not None:
        sweep = sweep.model_copy(update={"trials": args.trials})
    threads = args.threads or settings.threads

    result = run_sweep(sweep, experiment.scenario, experiment.detectors, threads)
    out = args.out or Path(settings.out_dir)
    emit_report(
        out, sweep.axis, result.records, result.rows,
        _manifest("sweep", experiment, sweep.axis, sweep.trials),
        timings=result.timings,
    )
    _print_rows(result.rows)
    return 0


def _saved(args: argparse.Namespace):
    out = args.out or Path(settings.out_dir)
    records = read_records(out / "records.jsonl")
    manifest = read_manifest(out)
    sweep = (manifest.get("config") or {}).get("sweep") or {}
    metric = args.metric or sweep.get("metric", "pd_at_pfa")
    pfa = args.pfa if args.pfa is not None else sweep.get("pfa", 0.01)
    axis = manifest.get("axis", POINT_AXIS)
    order = [d["name"] for d in (manifest.get("config") or {}).get("detectors", [])] or None
    rows = summarize(records, axis, metric, pfa, order)
    return out, manifest, axis, rows


def cmd_calibrate(args: argparse.Namespace) -> int:
    _, _, _, rows = _saved(args)
    _print_rows(rows)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    out, manifest, axis, rows = _saved(args)
    emit_report(out, axis, None, rows, {k: v for k, v in manifest.items() if k != "files"})
    _print_rows(rows)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "calibrate": cmd_calibrate,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=settings.log_level.upper(), format=LOG_FORMAT)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValidationError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (DetectionError, OSError) as e:
        logger.error("%s failed: %s", args.command, e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
