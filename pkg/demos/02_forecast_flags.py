"""Forecast bands and flagging of recent observations.

Fit on the years up to a chosen split, forecast the next three, and ask
whether the actually observed values fall outside the 95% / 80% / ~70%
forecast bands.  An observation outside a band is a candidate for closer
inspection; here we inject a level shift so the flags have something to
find.
"""
import os

import matplotlib.pyplot as plt
import numpy as np

from trendflag import RunConfig, TimeSeries, run_scan, simulate_trend_series
from trendflag.plotting import build_figure

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

TRAIN_END, HORIZON = 2016, 3

# A well-behaved series, then the same series with its last three years
# pushed upward by a level shift.
series, _ = simulate_trend_series(
    40, order=2, q=0.0006, r=1.0, seed=25, start_epoch=1980, name="calm", units="index"
)
shifted_values = series.values.copy()
shifted_values[-HORIZON:] += 5.0
shifted = TimeSeries("shifted", series.epochs, shifted_values, series.units)

config = RunConfig(train_end=TRAIN_END, horizon=HORIZON, mc_draws=10000, mc_reps=500, seed=1)
reports = run_scan([series, shifted], config)

for rep in reports:
    print(f"\n{rep.name}: ratio {rep.model.q_ratio:.2f}, R {rep.model.r:.2f}")
    print("  year  observed  forecast    sd      z   outside")
    for flag in rep.flags:
        outside = ",".join(flag.outside_levels) or "-"
        print(f"  {flag.epoch}  {flag.observed:8.2f}  {flag.mean:8.2f}  "
              f"{flag.sd:5.2f}  {flag.z:5.2f}   {outside}")

# The calm series stays inside every band; the shifted one breaks out.
for rep in reports:
    fig = build_figure(rep)
    path = os.path.join(OUT, f"02_bands_{rep.name}.svg")
    fig.savefig(path)
    plt.close(fig)
    print(f"wrote {path}")
