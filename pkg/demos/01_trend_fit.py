"""Fitting a stochastic trend to one short annual series.

The trend model penalises second differences, so it bends only as much
as the data insist.  Its single free knob is the system-noise variance
Q, searched on a grid of ratios of the observation variance R; the
observation variance itself is fixed directly from the training data.
"""
import os

import matplotlib.pyplot as plt
import numpy as np

from trendflag import ModelSpec, estimate_r, grid_search_q, simulate_trend_series

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# A synthetic 40-year series with a gently wandering trend.
series, truth = simulate_trend_series(
    40, order=2, q=0.0006, r=1.0, seed=7, start_epoch=1984, name="demo", units="index"
)

# Step 1: fix the observation variance from the data.
r = estimate_r(series.values)
print(f"observation variance R = {r:.3f}")

# Step 2: maximise the innovation log-likelihood over the ratio grid.
spec = ModelSpec(order=2)  # grid 0.05..0.50 step 0.01, diffuse start
model, trace = grid_search_q(series, spec, r)
print(f"selected ratio {model.q_ratio:.2f} -> Q = {model.q:.3f}, "
      f"log-likelihood {model.log_lik:.1f}, AIC {model.aic:.1f}")

# The trace shows how flat the likelihood is around the optimum.
print("\nratio  log-likelihood")
for point in trace.grid[::9]:
    marker = "  <-- best" if point.q_ratio == model.q_ratio else ""
    print(f"{point.q_ratio:5.2f}  {point.log_lik:10.2f}{marker}")

# Step 3: the smoothed trend conditions every year on the whole series.
fig, ax = plt.subplots(figsize=(8, 4.5))
ax.plot(series.epochs, series.values, "o", ms=4, color="0.5", label="observations")
ax.plot(series.epochs, truth, color="0.2", lw=1, ls="--", label="latent trend (truth)")
ax.plot(series.epochs, model.smoothed_mean, color="tab:blue", lw=2, label="smoothed trend")
sd = np.sqrt(model.smoothed_var)
ax.fill_between(series.epochs, model.smoothed_mean - 2 * sd, model.smoothed_mean + 2 * sd,
                color="tab:blue", alpha=0.15, label="trend +/- 2 sd")
ax.set_xlabel("year")
ax.set_ylabel(series.units)
ax.legend()
fig.tight_layout()
path = os.path.join(OUT, "01_trend_fit.svg")
fig.savefig(path)
print(f"\nwrote {path}")
