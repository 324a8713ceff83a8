"""State-space form of the stochastic difference trend model.

The trend follows a d-th order difference equation driven by white noise
and is observed through additive Gaussian noise:

    diff^d t(n) = v(n),   v ~ N(0, Q)
    y(n) = t(n) + w(n),   w ~ N(0, R)

This module builds the system matrices, runs the forward Kalman
recursion, evaluates the exact Gaussian log-likelihood from the
innovations, applies a fixed-interval (backward) smoother, and
extrapolates the predictive distribution several years ahead.
"""
from __future__ import annotations

import warnings

import numpy as np

from .errors import (
    InsufficientDataError,
    NumericalFailureError,
    SingularPredictedVarianceWarning,
    UnsupportedOrderError,
)
from .types import (
    DIFFUSE_VARIANCE_SCALE,
    SUPPORTED_ORDERS,
    FilterRun,
    ForecastDistribution,
    InitMode,
    ModelSpec,
    StateSpaceMatrices,
    TimeSeries,
)

__all__ = [
    "build_matrices",
    "initial_condition",
    "kalman_filter",
    "log_likelihood",
    "fixed_interval_smoother",
    "multistep_predict",
]

LOG_TWO_PI = float(np.log(2.0 * np.pi))


def build_matrices(order: int) -> StateSpaceMatrices:
    """Return the transition/loading/observation system for one order.

    Order 1 is a random-walk trend.  Order 2 penalises second differences
    of the trend, so the state carries the two most recent trend values
    and extrapolation is linear.
    """
    if order == 1:
        f = np.array([[1.0]])
        g = np.array([[1.0]])
        h = np.array([[1.0]])
    elif order == 2:
        f = np.array([[2.0, -1.0], [1.0, 0.0]])
        g = np.array([[1.0], [0.0]])
        h = np.array([[1.0, 0.0]])
    else:
        raise UnsupportedOrderError(
            f"difference order must be one of {SUPPORTED_ORDERS}, got {order}"
        )
    return StateSpaceMatrices(order, f, g, h)


def initial_condition(
    series: TimeSeries, spec: ModelSpec, r: float
) -> tuple[np.ndarray, np.ndarray]:
    """Seed (state, covariance) for the first prediction step.

    DIFFUSE sets every state component to the first observed value, with a
    wide covariance proportional to the observation variance, so the data
    dominate after a few steps.  ZERO seeds both the state and its
    covariance at exactly zero, which pins the early trend to zero until
    system noise has accumulated.
    """
    d = spec.order
    obs_values = series.values[series.observed]
    if obs_values.size < d:
        raise InsufficientDataError(
            f"series {series.name!r}: need at least {d} observed values "
            f"to initialise an order-{d} fit"
        )
    if spec.init_mode is InitMode.ZERO:
        return np.zeros(d), np.zeros((d, d))
    first = float(obs_values[0])
    return np.full(d, first), DIFFUSE_VARIANCE_SCALE * float(r) * np.eye(d)


def kalman_filter(
    series: TimeSeries,
    matrices: StateSpaceMatrices,
    q: float,
    r: float,
    init: tuple[np.ndarray, np.ndarray],
) -> FilterRun:
    """Run the forward filter over one series.

    Parameters
    ----------
    series : TimeSeries
        Training window; NaN values produce prediction-only steps whose
        innovations are excluded from any likelihood built on the run.
    matrices : StateSpaceMatrices
        System for the chosen difference order.
    q, r : float
        System- and observation-noise variances.  Both must be
        non-negative and they may not both be zero.
    init : (ndarray, ndarray)
        Mean and covariance seeding the first prediction step.

    Returns
    -------
    FilterRun

    Raises
    ------
    NumericalFailureError
        If any predictive observation variance is non-positive.
    """
    if q < 0 or r < 0 or q + r <= 0:
        raise ValueError("need q >= 0, r >= 0 and q + r > 0")
    n = len(series)
    if n == 0:
        raise InsufficientDataError(f"series {series.name!r}: empty training window")
    d = matrices.d
    f, g, h = matrices.F, matrices.G, matrices.H
    z = np.asarray(init[0], dtype=np.float64).reshape(d).copy()
    v = np.asarray(init[1], dtype=np.float64).reshape(d, d)
    v = 0.5 * (v + v.T)
    gqg = q * (g @ g.T)

    z_pred = np.empty((n, d))
    v_pred = np.empty((n, d, d))
    z_filt = np.empty((n, d))
    v_filt = np.empty((n, d, d))
    innovation = np.full(n, np.nan)
    innovation_var = np.empty(n)
    gain = np.zeros((n, d))
    observed = series.observed

    for i in range(n):
        if i > 0:
            z = f @ z
            v = f @ v @ f.T + gqg
            v = 0.5 * (v + v.T)
        z_pred[i] = z
        v_pred[i] = v
        s = (h @ v @ h.T).item() + r
        innovation_var[i] = s
        if s <= 0:
            raise NumericalFailureError(
                f"series {series.name!r}: non-positive innovation variance {s!r} "
                f"at year {int(series.epochs[i])}"
            )
        if observed[i]:
            hv = (h @ v).reshape(d)
            k = hv / s
            dy = float(series.values[i]) - (h @ z).item()
            z = z + k * dy
            v = v - np.outer(k, hv)
            v = 0.5 * (v + v.T)
            innovation[i] = dy
            gain[i] = k
        z_filt[i] = z
        v_filt[i] = v

    return FilterRun(
        epochs=series.epochs.copy(),
        observed=observed.copy(),
        z_pred=z_pred,
        v_pred=v_pred,
        z_filt=z_filt,
        v_filt=v_filt,
        innovation=innovation,
        innovation_var=innovation_var,
        gain=gain,
        matrices=matrices,
    )


def log_likelihood(run: FilterRun, burn_in: int = 0) -> float:
    """Gaussian log-likelihood accumulated from the filter innovations.

    Each observed step past the burn-in contributes the log-density of its
    innovation under N(0, innovation variance).  The first ``burn_in``
    observed innovations are excluded so the score is not dominated by the
    arbitrary initial state.
    """
    if burn_in < 0:
        raise ValueError("burn-in must be non-negative")
    idx = np.flatnonzero(run.observed)
    if burn_in >= idx.size:
        raise InsufficientDataError(
            f"burn-in {burn_in} leaves no innovations to score "
            f"({idx.size} observed steps)"
        )
    use = idx[burn_in:]
    dy = run.innovation[use]
    s = run.innovation_var[use]
    return float(-0.5 * np.sum(LOG_TWO_PI + np.log(s) + dy * dy / s))


def fixed_interval_smoother(run: FilterRun) -> tuple[np.ndarray, np.ndarray]:
    """Backward pass conditioning every state on the whole window.

    Returns
    -------
    (ndarray, ndarray)
        Smoothed state means (n, d) and covariances (n, d, d).  The last
        entry equals the filtered terminal point.

    A singular predicted covariance (reachable with zero system noise and
    a zero initial covariance) falls back to a pseudo-inverse and emits
    :class:`SingularPredictedVarianceWarning` instead of failing.
    """
    f = run.matrices.F
    n = run.n_steps
    z_s = run.z_filt.copy()
    v_s = run.v_filt.copy()
    for i in range(n - 2, -1, -1):
        vp = run.v_pred[i + 1]
        try:
            vp_inv = np.linalg.inv(vp)
            if not np.all(np.isfinite(vp_inv)):
                raise np.linalg.LinAlgError("non-finite inverse")
        except np.linalg.LinAlgError:
            warnings.warn(
                f"predicted covariance singular at year {int(run.epochs[i + 1])}; "
                "using a pseudo-inverse",
                SingularPredictedVarianceWarning,
                stacklevel=2,
            )
            vp_inv = np.linalg.pinv(vp)
        a = run.v_filt[i] @ f.T @ vp_inv
        z_s[i] = run.z_filt[i] + a @ (z_s[i + 1] - run.z_pred[i + 1])
        vv = run.v_filt[i] + a @ (v_s[i + 1] - vp) @ a.T
        v_s[i] = 0.5 * (vv + vv.T)
    return z_s, v_s


def multistep_predict(
    run: FilterRun,
    matrices: StateSpaceMatrices,
    q: float,
    r: float,
    horizon: int,
) -> ForecastDistribution:
    """Extrapolate the predictive distribution ``horizon`` years ahead.

    Iterates the prediction step from the filtered terminal state; the
    observation noise enters every horizon's variance once.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    f, g, h = matrices.F, matrices.G, matrices.H
    gqg = q * (g @ g.T)
    z = run.terminal_state.copy()
    v = run.terminal_var.copy()
    mean = np.empty(horizon)
    var = np.empty(horizon)
    for j in range(horizon):
        z = f @ z
        v = f @ v @ f.T + gqg
        v = 0.5 * (v + v.T)
        mean[j] = (h @ z).item()
        var[j] = (h @ v @ h.T).item() + r
    return ForecastDistribution(base_epoch=int(run.epochs[-1]), mean=mean, var=var)
