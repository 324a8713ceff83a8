"""Command-line interface: fit, scan, plot, and anomaly subcommands.

Every flag has a config-file equivalent (same JSON dialect as the report
meta block); flags win over the config file.  The optional environment
variable TRENDFLAG_CONFIG selects a default config path.

Exit codes: 0 success (possibly with skipped series), 1 configuration or
parse error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys

from . import __version__
from .errors import ConfigError, ParseError, TrendflagError
from .estimation import estimate_r, grid_search_q
from .flags import anomalies
from .io import format_float, read_panel, read_report, write_csv_summary, write_report
from .pipeline import RunConfig, run_scan
from .plotting import figure_from_payload, save_figure

ENV_CONFIG = "TRENDFLAG_CONFIG"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep exit codes stable
        raise ConfigError(message)


def _add_model_flags(sub) -> None:
    sub.add_argument("--order", type=int, help="difference order (1 or 2)")
    sub.add_argument("--grid", help="q-ratio grid as MIN:MAX:STEP")
    sub.add_argument("--init-mode", choices=["DIFFUSE", "ZERO"], help="initial state mode")
    sub.add_argument("--burn-in", type=int, help="innovations excluded from the likelihood")
    sub.add_argument("--r-override", type=float, help="fix the observation variance")
    sub.add_argument("--series", action="append", help="restrict to this series (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trendflag", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"trendflag {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    scan = subs.add_parser("scan", help="full pipeline: fit, forecast, flag, report")
    scan.add_argument("--panel", help="input panel CSV")
    scan.add_argument("--config", help="config file (JSON)")
    scan.add_argument("--train-end", type=int, help="last year used for fitting")
    scan.add_argument("--horizon", type=int, help="held-out years to compare")
    _add_model_flags(scan)
    scan.add_argument("--bands", help="band levels as LABEL:MULT,LABEL:MULT,...")
    scan.add_argument("--mc-draws", type=int, help="draws per tail estimate")
    scan.add_argument("--mc-reps", type=int, help="tendency replicates")
    scan.add_argument("--seed", type=int, help="master seed")
    scan.add_argument("--report", help="output JSON report path")
    scan.add_argument("--summary", help="output CSV summary path")
    scan.set_defaults(func=cmd_scan)

    fit = subs.add_parser("fit", help="grid-fit each series and print the results")
    fit.add_argument("--panel", help="input panel CSV")
    fit.add_argument("--config", help="config file (JSON)")
    fit.add_argument("--train-end", type=int, help="last year used for fitting (default: all)")
    _add_model_flags(fit)
    fit.set_defaults(func=cmd_fit)

    plot = subs.add_parser("plot", help="render figures from a JSON report")
    plot.add_argument("--report", required=True, help="JSON report from `scan`")
    plot.add_argument("--out-dir", default=".", help="directory for the images")
    plot.add_argument("--series", action="append", help="only these series (repeatable)")
    plot.add_argument("--format", default="svg", choices=["svg", "pdf"])
    plot.set_defaults(func=cmd_plot)

    anomaly = subs.add_parser("anomaly", help="per-year deviations from a window mean")
    anomaly.add_argument("--panel", help="input panel CSV")
    anomaly.add_argument("--config", help="config file (JSON)")
    anomaly.add_argument("--window", help="mean window as START:END (default: full series)")
    anomaly.add_argument("--series", action="append", help="only these series (repeatable)")
    anomaly.add_argument("--out", help="output CSV path (default: stdout)")
    anomaly.set_defaults(func=cmd_anomaly)
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        path = os.environ.get(ENV_CONFIG) or None
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return cfg


def _parse_grid_flag(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be MIN:MAX:STEP, got {text!r}")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise ConfigError(f"grid must be numeric, got {text!r}") from None


def _parse_bands_flag(text: str) -> tuple[tuple[str, float], ...]:
    levels = []
    for item in text.split(","):
        label, sep, mult = item.partition(":")
        if not sep:
            raise ConfigError(f"band level must be LABEL:MULT, got {item!r}")
        try:
            levels.append((label, float(mult)))
        except ValueError:
            raise ConfigError(f"band multiplier must be numeric in {item!r}") from None
    return tuple(levels)


def _pick(args, cfg: dict, flag: str, key: str, default=None):
    value = getattr(args, flag, None)
    if value is not None:
        return value
    return cfg.get(key, default)


def _panel_path(args, cfg: dict) -> str:
    path = _pick(args, cfg, "panel", "panel")
    if path is None:
        raise ConfigError("no panel file given (use --panel or the config file)")
    return path


def _run_config(args, cfg: dict, *, require_train_end: bool) -> RunConfig:
    train_end = _pick(args, cfg, "train_end", "trainEnd")
    if train_end is None:
        if require_train_end:
            raise ConfigError("no train-end year given (use --train-end or the config file)")
        train_end = 10**9  # fit-only: treat every year as training data
    grid = getattr(args, "grid", None)
    grid = _parse_grid_flag(grid) if grid is not None else cfg.get("qGrid", (0.05, 0.50, 0.01))
    bands = getattr(args, "bands", None)
    bands = _parse_bands_flag(bands) if bands is not None else cfg.get(
        "bands", [["95%", 1.96], ["80%", 1.28], ["~70%", 1.0]]
    )
    from .flags import BandSpec

    series = getattr(args, "series", None) or cfg.get("series")
    return RunConfig(
        train_end=int(train_end),
        horizon=int(_pick(args, cfg, "horizon", "horizon", 3)),
        order=int(_pick(args, cfg, "order", "order", 2)),
        q_grid=grid,
        bands=BandSpec(tuple((str(l), float(m)) for l, m in bands)),
        mc_draws=int(_pick(args, cfg, "mc_draws", "mcDraws", 10000)),
        mc_reps=int(_pick(args, cfg, "mc_reps", "mcReps", 1000)),
        seed=int(_pick(args, cfg, "seed", "seed", 0)),
        init_mode=_pick(args, cfg, "init_mode", "initMode", "DIFFUSE"),
        burn_in=_pick(args, cfg, "burn_in", "burnIn"),
        series=tuple(series) if series else None,
        r_override=_pick(args, cfg, "r_override", "rOverride"),
        overrides=cfg.get("overrides"),
    )


def cmd_scan(args) -> int:
    cfg = _load_config(args.config)
    config = _run_config(args, cfg, require_train_end=True)
    panel = read_panel(_panel_path(args, cfg))
    reports = run_scan(panel, config)
    report_path = _pick(args, cfg, "report", "report", "report.json")
    summary_path = _pick(args, cfg, "summary", "summary", "summary.csv")
    write_report(reports, report_path, config, __version__)
    write_csv_summary(reports, summary_path)
    skipped = [rep for rep in reports if rep.skipped is not None]
    print(f"scanned {len(reports) - len(skipped)} series "
          f"({len(skipped)} skipped) -> {report_path}, {summary_path}")
    for rep in skipped:
        print(f"  skipped {rep.name}: {rep.skipped}", file=sys.stderr)
    return 0


def cmd_fit(args) -> int:
    cfg = _load_config(args.config)
    config = _run_config(args, cfg, require_train_end=False)
    panel = read_panel(_panel_path(args, cfg))
    print(f"{'series':<12} {'n':>4} {'qRatio':>7} {'Q':>12} {'logLik':>10} {'AIC':>10}")
    for series in panel.series:
        if config.series is not None and series.name not in config.series:
            continue
        spec = config.model_spec(series.name)
        try:
            fixed_r = config.r_for(series.name)
            train = series if spec.train_end is None else series.up_to(spec.train_end)
            r = estimate_r(train.values) if fixed_r is None else float(fixed_r)
            model, _ = grid_search_q(series, spec, r)
        except TrendflagError as exc:
            print(f"{series.name:<12} skipped: {exc}", file=sys.stderr)
            continue
        print(
            f"{series.name:<12} {model.run.n_steps:>4} {model.q_ratio:>7.2f} "
            f"{model.q:>12.6g} {model.log_lik:>10.1f} {model.aic:>10.1f}"
        )
    for name, reason in panel.corrupted.items():
        print(f"{name:<12} skipped: {reason}", file=sys.stderr)
    return 0


def _safe_filename(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name) or "series"


def cmd_plot(args) -> int:
    payload = read_report(args.report)
    series = payload.get("series", {})
    wanted = set(args.series) if args.series else None
    os.makedirs(args.out_dir, exist_ok=True)
    count = 0
    for name, entry in series.items():
        if wanted is not None and name not in wanted:
            continue
        if "skipped" in entry:
            print(f"  skipped {name}: {entry['skipped']}", file=sys.stderr)
            continue
        path = os.path.join(args.out_dir, f"{_safe_filename(name)}.{args.format}")
        save_figure(figure_from_payload(name, entry), path)
        count += 1
    print(f"wrote {count} figure(s) to {args.out_dir}")
    return 0


def _parse_window(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    start, sep, end = text.partition(":")
    if not sep:
        raise ConfigError(f"window must be START:END, got {text!r}")
    try:
        return int(start), int(end)
    except ValueError:
        raise ConfigError(f"window years must be integers, got {text!r}") from None


def cmd_anomaly(args) -> int:
    cfg = _load_config(args.config)
    panel = read_panel(_panel_path(args, cfg))
    window = _parse_window(args.window)
    wanted = set(args.series) if args.series else None
    deviations = []
    for series in panel.series:
        if wanted is not None and series.name not in wanted:
            continue
        deviations.append(anomalies(series, window))
    if not deviations:
        raise ConfigError("no series to compute anomalies for")

    first = min(dev.first_epoch for dev in deviations)
    last = max(dev.last_epoch for dev in deviations)
    rows = [["year"] + [dev.name for dev in deviations]]
    for year in range(first, last + 1):
        row = [str(year)]
        for dev in deviations:
            cell = ""
            if dev.first_epoch <= year <= dev.last_epoch:
                value = dev.values[year - dev.first_epoch]
                if value == value:  # skip NaN
                    cell = format_float(value)
            row.append(cell)
        rows.append(row)

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
        print(f"wrote anomalies for {len(deviations)} series to {args.out}")
    else:
        csv.writer(sys.stdout, lineterminator="\n").writerows(rows)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ConfigError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TrendflagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
