"""Synthetic series from the stochastic difference trend model.

Used by the demos and by simulation studies; the trend is generated
directly from its difference equation, not through the filter.
"""
from __future__ import annotations

import numpy as np

from .errors import UnsupportedOrderError
from .types import SUPPORTED_ORDERS, TimeSeries

__all__ = ["simulate_trend_series"]


def simulate_trend_series(
    n: int,
    order: int = 2,
    q: float = 0.1,
    r: float = 1.0,
    seed: int = 0,
    name: str = "sim",
    start_epoch: int = 2000,
    level: float = 0.0,
    slope: float = 0.0,
    units: str = "",
) -> tuple[TimeSeries, np.ndarray]:
    """Draw one series of length ``n`` and return it with its latent trend.

    The trend starts at ``level`` with initial per-year ``slope`` (order 2
    only) and accumulates N(0, q) innovations in its order-th difference;
    observations add N(0, r) noise.
    """
    if order not in SUPPORTED_ORDERS:
        raise UnsupportedOrderError(
            f"difference order must be one of {SUPPORTED_ORDERS}, got {order}"
        )
    if n < 1:
        raise ValueError("need at least one step")
    rng = np.random.default_rng(seed)
    shocks = np.sqrt(q) * rng.standard_normal(n)
    trend = np.empty(n)
    if order == 1:
        trend[0] = level + shocks[0]
        for i in range(1, n):
            trend[i] = trend[i - 1] + shocks[i]
    else:
        prev2, prev1 = level - slope, level  # implied values before the window
        for i in range(n):
            trend[i] = 2.0 * prev1 - prev2 + shocks[i]
            prev2, prev1 = prev1, trend[i]
    values = trend + np.sqrt(r) * rng.standard_normal(n)
    epochs = start_epoch + np.arange(n)
    return TimeSeries(name, epochs, values, units), trend
