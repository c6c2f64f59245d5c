"""Writing and reading sweep results.

``csv`` output is ``results.csv`` (one row per record), ``delays.csv`` (one
row per relay per adapted record) and ``summary.csv``. ``structured``
output is a single ``results.json``. Both formats also write one
``time_ns,value`` table per record under ``impulse/``.

Floats in CSV files carry 9 significant digits so that repeated runs
produce byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InvalidArgumentError
from .scenario import RunRecord, summarize

RESULT_COLUMNS = (
    "scenario", "mode", "x_m", "y_m", "z_m", "mu_ns", "D_ns",
    "total_gain", "peak_gain", "peak_time_ns", "reduction_pct",
)
SUMMARY_COLUMNS = ("scenario", "positions", "mean_D_conv_ns", "mean_D_da_ns", "mean_reduction_pct")


def fmt(v) -> str:
    if isinstance(v, bool) or isinstance(v, (int, str)):
        return str(v)
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{v:.9g}"


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def result_rows(records: Sequence[RunRecord]) -> list[tuple]:
    rows = []
    for r in records:
        s = r.stats
        x, y, z = r.position
        rows.append((
            r.scenario, r.mode, x, y, z, s.mean_delay * 1e9, s.rms_spread * 1e9,
            s.total, s.peak, s.peak_time * 1e9, r.reduction * 100,
        ))
    return rows


def results_csv(records: Sequence[RunRecord]) -> str:
    return _csv_text(RESULT_COLUMNS, result_rows(records))


def summary_csv(records: Sequence[RunRecord]) -> str:
    return _csv_text(SUMMARY_COLUMNS, [[row[c] for c in SUMMARY_COLUMNS] for row in summarize(records)])


def delays_csv(records: Sequence[RunRecord]) -> str:
    rows = []
    for r in records:
        if r.mode != "da":
            continue
        for rid, d in r.delays_ns.items():
            rows.append((r.scenario, *r.position, rid, d))
    return _csv_text(("scenario", "x_m", "y_m", "z_m", "relay_id", "delay_ns"), rows)


def structured_text(records: Sequence[RunRecord]) -> str:
    doc = {"records": [r.to_dict() for r in records], "summary": summarize(records)}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def parse_structured(text: str) -> list[RunRecord]:
    return [RunRecord.from_dict(d) for d in json.loads(text)["records"]]


def emit(records: Sequence[RunRecord], out_dir: str | Path, fmt_name: str = "csv", impulses: bool = True) -> list[Path]:
    """Write records to ``out_dir``; returns the written paths in order."""
    if not records:
        raise InvalidArgumentError("nothing to emit: no records")
    if fmt_name not in ("csv", "structured"):
        raise InvalidArgumentError(f"unknown output format {fmt_name!r}")
    out = Path(out_dir)
    files: dict[str, str] = {}
    if fmt_name == "csv":
        files["results.csv"] = results_csv(records)
        files["delays.csv"] = delays_csv(records)
        files["summary.csv"] = summary_csv(records)
    else:
        files["results.json"] = structured_text(records)
    if impulses:
        for r in records:
            if r.signal is not None:
                files[r.impulse_file] = r.signal.to_table("value")
    written = []
    try:
        for name, text in files.items():
            path = out / name
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write results under {out}: {exc}") from exc
    return written
