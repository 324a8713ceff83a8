"""Observation-variance estimate, likelihood grid search, and AIC."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateVarianceWarning,
    InsufficientDataError,
    NumericalFailureError,
)
from .statespace import (
    build_matrices,
    fixed_interval_smoother,
    initial_condition,
    kalman_filter,
    log_likelihood,
)
from .types import FittedModel, ModelSpec, TimeSeries

__all__ = ["estimate_r", "grid_search_q", "aic", "FitTrace", "GridPoint"]

# theta = (order, system-noise variance, observation variance)
N_MODEL_PARAMS = 3


def estimate_r(values) -> float:
    """Sample variance (denominator N-1) of the non-missing values.

    This is the default observation-noise variance: set it directly from
    the training data rather than estimating it jointly with the system
    noise.  A zero result is returned with a warning, since fits then need
    positive system noise to be well defined.
    """
    vals = np.asarray(values, dtype=np.float64)
    obs = vals[np.isfinite(vals)]
    if obs.size < 2:
        raise InsufficientDataError(
            f"variance needs at least 2 observed values, got {obs.size}"
        )
    r = float(np.var(obs, ddof=1))
    if r == 0.0:
        warnings.warn(
            "training values are constant; observation variance is 0 "
            "(fits require Q > 0)",
            DegenerateVarianceWarning,
            stacklevel=2,
        )
    return r


def aic(log_lik: float, n_params: int = N_MODEL_PARAMS) -> float:
    """Akaike information criterion: -2 * log-likelihood + 2 * parameters."""
    return -2.0 * float(log_lik) + 2.0 * int(n_params)


@dataclass(frozen=True)
class GridPoint:
    """One grid evaluation: ratio, absolute variance, and its score."""

    q_ratio: float
    q: float
    log_lik: float


@dataclass(frozen=True)
class FitTrace:
    """All grid evaluations in grid order plus the argmax index.

    Ties are broken toward the smaller ratio (the smoother trend).
    """

    grid: tuple[GridPoint, ...]
    argmax: int

    def __post_init__(self) -> None:
        if not self.grid:
            raise ValueError("fit trace needs at least one grid point")
        if not (0 <= self.argmax < len(self.grid)):
            raise ValueError("argmax index outside the grid")
        best = self.grid[self.argmax].log_lik
        for i, point in enumerate(self.grid):
            if point.log_lik > best:
                raise ValueError("argmax does not attain the maximum log-likelihood")
            if i < self.argmax and point.log_lik == best:
                raise ValueError("tie not broken toward the smaller ratio")


def grid_search_q(
    series: TimeSeries, spec: ModelSpec, r: float
) -> tuple[FittedModel, FitTrace]:
    """Fit the trend model by maximising the log-likelihood over the Q grid.

    Parameters
    ----------
    series : TimeSeries
        Full series; fitting uses years up to ``spec.train_end`` (all years
        when that is None).
    spec : ModelSpec
        Order, ratio grid, initialisation, and burn-in settings.
    r : float
        Observation-noise variance, normally from :func:`estimate_r` but
        any externally fixed value may be supplied.

    Returns
    -------
    (FittedModel, FitTrace)
        The model at the maximising grid point, fully populated with its
        filter run, smoothed trend, and AIC, plus the whole trace.

    Grid points that fail numerically score -inf and are skipped; if every
    point fails a :class:`NumericalFailureError` is raised.
    """
    if r < 0:
        raise ValueError("observation variance must be non-negative")
    train = series if spec.train_end is None else series.up_to(spec.train_end)
    need = spec.order + 2
    if train.n_observed < need:
        raise InsufficientDataError(
            f"series {series.name!r}: {train.n_observed} observed training values; "
            f"an order-{spec.order} fit needs at least {need}"
        )
    if spec.burn_in >= train.n_observed:
        raise InsufficientDataError(
            f"series {series.name!r}: burn-in {spec.burn_in} must be below the "
            f"{train.n_observed} observed training values"
        )
    matrices = build_matrices(spec.order)
    init = initial_condition(train, spec, r)

    points: list[GridPoint] = []
    best_idx: int | None = None
    best_run = None
    for i, ratio in enumerate(spec.ratios()):
        ratio = float(ratio)
        q = ratio * r
        if q + r <= 0:
            points.append(GridPoint(ratio, q, float("-inf")))
            continue
        try:
            run = kalman_filter(train, matrices, q, r, init)
            ll = log_likelihood(run, spec.burn_in)
            if not np.isfinite(ll):
                raise NumericalFailureError("non-finite log-likelihood")
        except NumericalFailureError:
            points.append(GridPoint(ratio, q, float("-inf")))
            continue
        points.append(GridPoint(ratio, q, ll))
        if best_idx is None or ll > points[best_idx].log_lik:
            best_idx = i
            best_run = run

    if best_idx is None or best_run is None:
        raise NumericalFailureError(
            f"series {series.name!r}: no grid point yielded a finite log-likelihood"
        )
    best = points[best_idx]
    z_s, v_s = fixed_interval_smoother(best_run)
    model = FittedModel(
        spec=spec,
        q_ratio=best.q_ratio,
        q=best.q,
        r=float(r),
        log_lik=best.log_lik,
        aic=aic(best.log_lik),
        run=best_run,
        smoothed_mean=z_s[:, 0],
        smoothed_var=v_s[:, 0, 0],
    )
    return model, FitTrace(tuple(points), best_idx)
