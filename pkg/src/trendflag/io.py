"""Panel CSV ingestion and deterministic report emission.

The report is a JSON document with a fixed key order and floats printed
with 17 significant digits, so identical inputs, config, and seed always
produce byte-identical files.  The CSV summary uses the same number
formatting.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyPanelError, ParseError
from .pipeline import RunConfig, SeriesReport
from .types import TimeSeries

__all__ = [
    "Panel",
    "read_panel",
    "write_report",
    "read_report",
    "dumps_report",
    "write_csv_summary",
    "format_float",
]

CSV_SUMMARY_HEADER = [
    "series",
    "year",
    "observed",
    "predicted",
    "sd",
    "z",
    "side",
    "outermost_band",
    "p_analytic",
    "p_mc",
    "joint_probability",
]


@dataclass
class Panel:
    """Parsed panel: good columns in file order plus per-column failures."""

    series: list[TimeSeries]
    corrupted: dict[str, str] = field(default_factory=dict)

    def __iter__(self):
        return iter(self.series)

    def names(self) -> list[str]:
        return [s.name for s in self.series] + list(self.corrupted)


def read_panel(path) -> Panel:
    """Read a wide panel CSV: header ``year,<name>,...``, empty cell = missing.

    Rows may arrive in any order and year gaps become missing values, so
    every returned series has consecutive years.  Structural problems
    (bad header, duplicate years or names, unreadable year cells) raise
    :class:`ParseError`; a malformed value cell corrupts only its own
    column, which is reported in ``Panel.corrupted`` instead of a series.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if any(cell.strip() for cell in row)]
    if not rows:
        raise EmptyPanelError(f"{path}: empty panel file")
    header = [cell.strip() for cell in rows[0]]
    if not header or header[0] != "year":
        raise ParseError(f"{path}: first header column must be 'year'")
    names = header[1:]
    if not names:
        raise EmptyPanelError(f"{path}: no series columns")
    if len(set(names)) != len(names):
        dup = next(n for n in names if names.count(n) > 1)
        raise ParseError(f"{path}: duplicate series name {dup!r}")
    body = rows[1:]
    if not body:
        raise EmptyPanelError(f"{path}: no data rows")

    years = []
    for row in body:
        if len(row) > len(header):
            raise ParseError(
                f"{path}: row has {len(row)} cells, header has {len(header)}"
            )
        text = row[0].strip() if row else ""
        try:
            years.append(int(text))
        except ValueError:
            raise ParseError(f"{path}: malformed year {text!r}") from None
    seen: set[int] = set()
    for year in years:
        if year in seen:
            raise ParseError(f"{path}: duplicate year {year}")
        seen.add(year)

    order = np.argsort(years, kind="stable")
    first, last = min(years), max(years)
    span = last - first + 1
    offsets = [years[i] - first for i in order]

    series: list[TimeSeries] = []
    corrupted: dict[str, str] = {}
    for j, name in enumerate(names):
        column = np.full(span, np.nan)
        bad: str | None = None
        for i in order:
            row = body[i]
            text = row[j + 1].strip() if len(row) > j + 1 else ""
            if not text:
                continue
            try:
                value = float(text)
                if not math.isfinite(value):
                    raise ValueError
            except ValueError:
                bad = f"malformed value {text!r} at year {years[i]}"
                break
            column[years[i] - first] = value
        if bad is not None:
            corrupted[name] = bad
            continue
        series.append(TimeSeries.from_pairs(name, first + np.arange(span), column))
    return Panel(series, corrupted)


def format_float(x: float) -> str:
    """17 significant digits: enough to reproduce the double exactly."""
    return format(float(x), ".17g")


def _dump(value, out: list[str], indent: int) -> None:
    pad = "  " * indent
    if value is None:
        out.append("null")
    elif isinstance(value, (bool, np.bool_)):
        out.append("true" if value else "false")
    elif isinstance(value, (int, np.integer)):
        out.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError(f"cannot serialise non-finite number {value!r}")
        out.append(format_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        for i, (key, item) in enumerate(value.items()):
            out.append(f"{pad}  {json.dumps(str(key), ensure_ascii=False)}: ")
            _dump(item, out, indent + 1)
            out.append(",\n" if i < len(value) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(value, (list, tuple)):
        if not len(value):
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(value):
            out.append(pad + "  ")
            _dump(item, out, indent + 1)
            out.append(",\n" if i < len(value) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialise {type(value).__name__}")


def _dumps(value) -> str:
    out: list[str] = []
    _dump(value, out, 0)
    out.append("\n")
    return "".join(out)


def config_payload(config: RunConfig) -> dict:
    lo, hi, step = config.q_grid
    payload = {
        "trainEnd": config.train_end,
        "horizon": config.horizon,
        "order": config.order,
        "qGrid": {"min": lo, "max": hi, "step": step},
        "bands": [[label, mult] for label, mult in config.bands.levels],
        "mcDraws": config.mc_draws,
        "mcReps": config.mc_reps,
        "seed": config.seed,
        "initMode": config.init_mode.value,
        "burnIn": config.burn_in,
        "series": list(config.series) if config.series is not None else None,
        "rOverride": config.r_override,
    }
    if config.overrides:
        payload["overrides"] = {name: dict(entry) for name, entry in config.overrides.items()}
    return payload


def series_payload(rep: SeriesReport) -> dict:
    """JSON-ready dict for one series, with a fixed key order."""
    if rep.skipped is not None:
        return {"skipped": rep.skipped}
    model = rep.model
    fd = rep.forecast
    body: dict = {
        "units": rep.units,
        "model": {
            "d": model.spec.order,
            "qRatio": model.q_ratio,
            "Q": model.q,
            "R": model.r,
            "logLik": model.log_lik,
            "aic": model.aic,
        },
        "trend": [
            {"year": int(year), "mean": float(mean), "var": float(var)}
            for year, mean, var in zip(
                model.run.epochs, model.smoothed_mean, model.smoothed_var
            )
        ],
        "forecast": [
            {
                "year": int(year),
                "mean": float(fd.mean[i]),
                "sd": float(fd.sd[i]),
                "bands": {
                    band.label: [float(band.lower[i]), float(band.upper[i])]
                    for band in rep.bands
                },
            }
            for i, year in enumerate(fd.epochs)
        ],
        "flags": [
            {
                "year": flag.epoch,
                "observed": flag.observed,
                "z": flag.z,
                "side": flag.side.value,
                "outside": list(flag.outside_levels),
                "pAnalytic": flag.p_analytic,
                "pMc": flag.p_mc,
            }
            for flag in rep.flags
        ],
        "tendency": {
            "perYearP": list(rep.tendency.per_year_p),
            "joint": rep.tendency.joint_probability,
            "sameSide": rep.tendency.same_side,
            "draws": rep.tendency.mc_draws,
            "reps": rep.tendency.mc_reps,
            "seed": rep.tendency.seed,
        },
        "anomalies": [
            {"year": int(year), "value": float(value)}
            for year, value in zip(rep.anomaly.epochs, rep.anomaly.values)
            if math.isfinite(value)
        ],
        "observations": [
            {"year": int(year), "value": float(value) if math.isfinite(value) else None}
            for year, value in zip(rep.series.epochs, rep.series.values)
        ],
    }
    return body


def report_payload(reports, config: RunConfig, version: str) -> dict:
    return {
        "meta": {
            "toolkit": "trendflag",
            "version": version,
            "config": config_payload(config),
        },
        "series": {rep.name: series_payload(rep) for rep in reports},
    }


def dumps_report(reports, config: RunConfig, version: str) -> str:
    """Serialise reports to the deterministic JSON dialect."""
    return _dumps(report_payload(reports, config, version))


def write_report(reports, path, config: RunConfig, version: str) -> None:
    """Write the JSON report; identical inputs give identical bytes."""
    text = dumps_report(reports, config, version)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_csv_summary(reports, path) -> None:
    """One row per (series, observed held-out year) plus a joint row per series."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_SUMMARY_HEADER)
        for rep in reports:
            if rep.skipped is not None:
                continue
            for flag in rep.flags:
                outermost = flag.outside_levels[0] if flag.outside_levels else "none"
                writer.writerow(
                    [
                        rep.name,
                        flag.epoch,
                        format_float(flag.observed),
                        format_float(flag.mean),
                        format_float(flag.sd),
                        format_float(flag.z),
                        flag.side.value,
                        outermost,
                        format_float(flag.p_analytic),
                        format_float(flag.p_mc),
                        "",
                    ]
                )
            writer.writerow(
                [rep.name, "", "", "", "", "", "", "", "", "",
                 format_float(rep.tendency.joint_probability)]
            )
