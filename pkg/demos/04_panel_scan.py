"""Scanning a whole panel: CSV in, report + summary + figures out.

A panel is a wide CSV (`year` first, one column per series, blank cells
missing).  The scan fits every analysable column, forecasts the held-out
years, flags deviations, and writes a deterministic JSON report and CSV
summary.  Series that cannot be analysed are skipped with a reason and
never abort the rest.

The same run is available from the command line:

    trendflag scan --panel panel.csv --train-end 2016 --horizon 3 \
        --report report.json --summary summary.csv
    trendflag plot --report report.json --out-dir figs/
"""
import json
import os

import numpy as np

from trendflag import RunConfig, read_panel, run_scan, simulate_trend_series, write_csv_summary, write_report
from trendflag import __version__
from trendflag.io import format_float
from trendflag.plotting import build_figure, save_figure

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# Build a small synthetic panel: two healthy series, one with a shifted
# ending, one too short to analyse, and one with a corrupted cell.
names = ["heat", "plankton", "recruits"]
columns = {}
for i, name in enumerate(names):
    series, _ = simulate_trend_series(
        40, order=2, q=0.0008, r=1.0, seed=40 + i, start_epoch=1980, name=name
    )
    columns[name] = series.values.copy()
columns["recruits"][-3:] += 4.5          # an unexpected late increase
columns["stub"] = np.full(40, np.nan)
columns["stub"][-6:] = np.linspace(0, 1, 6)   # starts far too late
columns["broken"] = columns["heat"] * 0.5

panel_path = os.path.join(OUT, "panel.csv")
with open(panel_path, "w", encoding="utf-8") as fh:
    fh.write("year," + ",".join(columns) + "\n")
    for i, year in enumerate(range(1980, 2020)):
        cells = []
        for name in columns:
            v = columns[name][i]
            cells.append("" if np.isnan(v) else format_float(v))
        if year == 1999:
            cells[-1] = "not-a-number"  # corrupt one cell of `broken`
        fh.write(f"{year}," + ",".join(cells) + "\n")
print(f"wrote {panel_path}")

# Ingest and scan.
panel = read_panel(panel_path)
print(f"parsed {len(panel.series)} series; corrupted columns: {list(panel.corrupted)}")

config = RunConfig(train_end=2016, horizon=3, mc_draws=10000, mc_reps=500, seed=2024)
reports = run_scan(panel, config)

for rep in reports:
    if rep.skipped:
        print(f"  {rep.name:<9} skipped: {rep.skipped}")
        continue
    outside = sorted({level for f in rep.flags for level in f.outside_levels})
    print(f"  {rep.name:<9} ratio {rep.model.q_ratio:.2f}  "
          f"joint {rep.tendency.joint_probability:.2e}  "
          f"flags outside: {outside or '-'}")

# Emit the artefacts: report, summary, and one figure per analysed series.
report_path = os.path.join(OUT, "report.json")
summary_path = os.path.join(OUT, "summary.csv")
write_report(reports, report_path, config, __version__)
write_csv_summary(reports, summary_path)
print(f"wrote {report_path}")
print(f"wrote {summary_path}")

for rep in reports:
    if rep.skipped is None:
        path = os.path.join(OUT, f"04_scan_{rep.name}.svg")
        save_figure(build_figure(rep), path)
        print(f"wrote {path}")

# The report is plain JSON: the per-series `model` block is a ready-made
# fit table, `flags` and `tendency` carry the headline numbers.
with open(report_path, encoding="utf-8") as fh:
    payload = json.load(fh)
print("\nfit table from the report:")
for name, entry in payload["series"].items():
    if "model" in entry:
        m = entry["model"]
        print(f"  {name:<9} qRatio {m['qRatio']:.2f}  logLik {m['logLik']:.1f}")
