"""Result files: JSON-lines records, CSV summaries, plotting script, manifest.

Files written into the output directory:

  records.jsonl          one TrialRecord per line
  summary_<axis>.csv     one SummaryRow per line, header first
  timings_<axis>.csv     detector seconds per axis value (kept apart so the
                         summary is byte-reproducible)
  plot_<axis>.py         matplotlib script reading summary_<axis>.csv
  manifest.json          config echo, seed, package version, conventions
"""

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence

from structglrt import __version__
from structglrt.harness.calibrate import CONVENTIONS
from structglrt.schemas.experiment import SummaryRow, TrialRecord

logger = logging.getLogger(__name__)

SUMMARY_FIELDS = list(SummaryRow.model_fields)
TIMING_FIELDS = ["axis_value", "detector", "seconds"]

_INT_FIELDS = {"errors", "trials"}
_OPTIONAL_FIELDS = {"axis_value", "pfa"}
_STRING_FIELDS = {"axis", "detector", "metric"}


# --- Records ---


def write_records(records: Iterable[TrialRecord], path: Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(record.model_dump_json() + "\n")
            count += 1
    return count


def read_records(path: Path) -> list[TrialRecord]:
    with open(path, encoding="utf-8") as f:
        return [TrialRecord.model_validate_json(line) for line in f if line.strip()]


# --- Summaries ---


def _format(value) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def write_summary_csv(rows: Sequence[SummaryRow], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_FIELDS)
        for row in rows:
            data = row.model_dump()
            writer.writerow([_format(data[name]) for name in SUMMARY_FIELDS])


def _parse_cell(name: str, text: str):
    if name in _STRING_FIELDS:
        return text
    if text == "" and name in _OPTIONAL_FIELDS:
        return None
    if name in _INT_FIELDS:
        return int(text)
    return float(text)


def read_summary_csv(path: Path) -> list[SummaryRow]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        return [
            SummaryRow(**{name: _parse_cell(name, row[name]) for name in SUMMARY_FIELDS})
            for row in reader
        ]


def write_timings_csv(timings: Sequence[tuple[float, str, float]], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TIMING_FIELDS)
        for axis_value, detector, seconds in timings:
            writer.writerow([_format(axis_value), detector, f"{seconds:.6f}"])


# --- Plotting script ---

_PLOT_TEMPLATE = '''"""Plot {metric} versus {axis} from {csv_name}. Requires matplotlib."""

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
curves = defaultdict(list)
with open(HERE / "{csv_name}", newline="") as f:
    for row in csv.DictReader(f):
        x = float(row["axis_value"] or "nan")
        curves[row["detector"]].append((x, float(row["{column}"])))

fig, ax = plt.subplots()
for detector, points in curves.items():
    points.sort()
    ax.plot([p[0] for p in points], [p[1] for p in points], marker="o", label=detector)
ax.set_xlabel("{axis}")
ax.set_ylabel("{ylabel}")
{log_scale}ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "plot_{axis}.png", dpi=150)
plt.show()
'''


def write_plot_script(axis: str, metric: str, path: Path, rank_plot: bool = False) -> None:
    column = "mean_n_hat" if rank_plot else "value"
    if rank_plot:
        ylabel = "average rank estimate"
    elif metric == "pd_at_pfa":
        ylabel = "detection probability"
    else:
        ylabel = "(P_miss + P_fa) / 2"
    text = _PLOT_TEMPLATE.format(
        axis=axis,
        metric=column if rank_plot else metric,
        csv_name=f"summary_{axis}.csv",
        column=column,
        ylabel=ylabel,
        log_scale="" if rank_plot or axis in ("N", "tau") else 'ax.set_xscale("log")\n',
    )
    path.write_text(text, encoding="utf-8")


# --- Emission ---


def emit_report(
    out_dir: Path,
    axis: str,
    records: Optional[Sequence[TrialRecord]],
    rows: Sequence[SummaryRow],
    manifest: dict,
    timings: Optional[Sequence[tuple[float, str, float]]] = None,
) -> list[Path]:
    """Write the result files; ``records=None`` leaves an existing records.jsonl alone."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if records is not None:
        path = out_dir / "records.jsonl"
        count = write_records(records, path)
        logger.info("wrote %d records to %s", count, path)
        written.append(path)

    summary = out_dir / f"summary_{axis}.csv"
    write_summary_csv(rows, summary)
    written.append(summary)

    if timings is not None:
        path = out_dir / f"timings_{axis}.csv"
        write_timings_csv(timings, path)
        written.append(path)

    metric = rows[0].metric if rows else manifest.get("sweep", {}).get("metric", "pd_at_pfa")
    plot = out_dir / f"plot_{axis}.py"
    write_plot_script(axis, metric, plot, rank_plot=axis == "N")
    written.append(plot)

    manifest_path = out_dir / "manifest.json"
    body = {
        "version": __version__,
        **manifest,
        "conventions": CONVENTIONS,
        "files": sorted(
            {p.name for p in written} | {manifest_path.name} | _existing(manifest_path)
        ),
    }
    manifest_path.write_text(json.dumps(body, indent=2, sort_keys=True, default=str))
    written.append(manifest_path)
    logger.info("wrote %s (%d rows)", summary, len(rows))
    return written


def _existing(manifest_path: Path) -> set[str]:
    if not manifest_path.exists():
        return set()
    try:
        return set(json.loads(manifest_path.read_text()).get("files", []))
    except (OSError, ValueError):
        return set()


def read_manifest(out_dir: Path) -> dict:
    return json.loads((Path(out_dir) / "manifest.json").read_text())
