"""Core value types: series, model settings, and fitted artefacts.

Everything here is an immutable container with construction-time
validation; the algorithms live in the sibling modules.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import UnsupportedOrderError

SUPPORTED_ORDERS = (1, 2)

# Scale of the wide initial covariance, in units of the observation variance.
DIFFUSE_VARIANCE_SCALE = 100.0


@dataclass(frozen=True)
class TimeSeries:
    """One named annual series; NaN marks a missing year.

    Years must be consecutive: gaps inside a series are represented by NaN
    values, never by absent rows.  Use :meth:`from_pairs` to normalise raw
    (year, value) data into this form.
    """

    name: str
    epochs: np.ndarray
    values: np.ndarray
    units: str = ""

    def __post_init__(self) -> None:
        epochs = np.asarray(self.epochs, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "epochs", epochs)
        object.__setattr__(self, "values", values)
        if epochs.ndim != 1 or values.shape != epochs.shape:
            raise ValueError(
                f"series {self.name!r}: epochs and values must be matching 1-D arrays"
            )
        if epochs.size > 1 and not np.all(np.diff(epochs) == 1):
            raise ValueError(
                f"series {self.name!r}: years must be consecutive (gaps are NaN values)"
            )
        if np.isinf(values).any():
            raise ValueError(f"series {self.name!r}: values must be finite or NaN")

    @classmethod
    def from_pairs(cls, name, years, values, units: str = "") -> "TimeSeries":
        """Build a series from unordered (year, value) data.

        Sorts by year, fills interior gaps with NaN, and trims missing
        leading/trailing years.
        """
        years = np.asarray(years, dtype=np.int64)
        vals = np.asarray(values, dtype=np.float64)
        if years.shape != vals.shape or years.ndim != 1:
            raise ValueError("years and values must be matching 1-D sequences")
        if years.size == 0:
            return cls(name, years, vals, units)
        order = np.argsort(years, kind="stable")
        years, vals = years[order], vals[order]
        if np.any(np.diff(years) == 0):
            dup = int(years[np.flatnonzero(np.diff(years) == 0)[0]])
            raise ValueError(f"series {name!r}: duplicate year {dup}")
        full = np.arange(years[0], years[-1] + 1)
        filled = np.full(full.shape, np.nan)
        filled[years - years[0]] = vals
        present = np.flatnonzero(np.isfinite(filled))
        if present.size == 0:
            return cls(name, full[:0], filled[:0], units)
        lo, hi = present[0], present[-1] + 1
        return cls(name, full[lo:hi], filled[lo:hi], units)

    def __len__(self) -> int:
        return int(self.epochs.size)

    @property
    def observed(self) -> np.ndarray:
        """Boolean mask of non-missing values."""
        return np.isfinite(self.values)

    @property
    def n_observed(self) -> int:
        return int(np.count_nonzero(self.observed))

    @property
    def first_epoch(self) -> int:
        return int(self.epochs[0])

    @property
    def last_epoch(self) -> int:
        return int(self.epochs[-1])

    def window(self, start: int, end: int) -> "TimeSeries":
        """Sub-series with start <= year <= end (may be empty)."""
        mask = (self.epochs >= start) & (self.epochs <= end)
        return TimeSeries(self.name, self.epochs[mask], self.values[mask], self.units)

    def up_to(self, epoch: int) -> "TimeSeries":
        """Sub-series with year <= epoch."""
        mask = self.epochs <= epoch
        return TimeSeries(self.name, self.epochs[mask], self.values[mask], self.units)


class InitMode(Enum):
    """How the first predictive state and covariance are seeded."""

    DIFFUSE = "DIFFUSE"  # state at the first observation, wide covariance
    ZERO = "ZERO"        # zero state and zero covariance


@dataclass(frozen=True)
class ModelSpec:
    """Trend-model settings: difference order, noise grid, likelihood options.

    The system-noise variance is searched on a grid of ratios of the
    observation variance, ``Q = ratio * R``, so the same grid applies to
    series of any scale.
    """

    order: int = 2
    q_ratio_grid: tuple[float, float, float] = (0.05, 0.50, 0.01)
    init_mode: InitMode = InitMode.DIFFUSE
    likelihood_burn_in: int | None = None  # None -> order
    train_end: int | None = None           # None -> last year of the series

    def __post_init__(self) -> None:
        if self.order not in SUPPORTED_ORDERS:
            raise UnsupportedOrderError(
                f"difference order must be one of {SUPPORTED_ORDERS}, got {self.order}"
            )
        lo, hi, step = (float(v) for v in self.q_ratio_grid)
        if not (lo > 0 and hi > 0 and step > 0):
            raise ValueError("q-ratio grid entries must all be positive")
        if lo > hi:
            raise ValueError("q-ratio grid requires min <= max")
        object.__setattr__(self, "q_ratio_grid", (lo, hi, step))
        if self.likelihood_burn_in is not None and self.likelihood_burn_in < 0:
            raise ValueError("likelihood burn-in must be non-negative")
        if not isinstance(self.init_mode, InitMode):
            raise ValueError(f"unknown init mode {self.init_mode!r}")

    @property
    def burn_in(self) -> int:
        """Leading innovations excluded from the log-likelihood."""
        return self.order if self.likelihood_burn_in is None else self.likelihood_burn_in

    def ratios(self) -> np.ndarray:
        """All grid ratios, smallest first."""
        lo, hi, step = self.q_ratio_grid
        count = int(np.floor((hi - lo) / step + 1e-9)) + 1
        return lo + step * np.arange(count)


@dataclass(frozen=True)
class StateSpaceMatrices:
    """Transition F, noise loading G, and observation row H for one order."""

    d: int
    F: np.ndarray
    G: np.ndarray
    H: np.ndarray

    def __post_init__(self) -> None:
        f = np.asarray(self.F, dtype=np.float64)
        g = np.asarray(self.G, dtype=np.float64)
        h = np.asarray(self.H, dtype=np.float64)
        object.__setattr__(self, "F", f)
        object.__setattr__(self, "G", g)
        object.__setattr__(self, "H", h)
        if self.d == 1:
            expected = (np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]]))
        elif self.d == 2:
            expected = (
                np.array([[2.0, -1.0], [1.0, 0.0]]),
                np.array([[1.0], [0.0]]),
                np.array([[1.0, 0.0]]),
            )
        else:
            raise UnsupportedOrderError(
                f"difference order must be one of {SUPPORTED_ORDERS}, got {self.d}"
            )
        for got, want, label in zip((f, g, h), expected, "FGH"):
            if got.shape != want.shape or not np.array_equal(got, want):
                raise ValueError(f"matrix {label} does not match the order-{self.d} system")


def _check_symmetric_psd(v: np.ndarray, label: str) -> None:
    """Vectorised symmetry / positive-semidefiniteness check for (n, d, d)."""
    scale = max(1.0, float(np.abs(v).max(initial=0.0)))
    tol = 1e-8 * scale
    if not np.allclose(v, np.swapaxes(v, -1, -2), atol=tol):
        raise ValueError(f"{label}: covariance not symmetric")
    d = v.shape[-1]
    diag = v[:, np.arange(d), np.arange(d)]
    if np.any(diag < -tol):
        raise ValueError(f"{label}: negative covariance diagonal")
    if d == 2:
        det = v[:, 0, 0] * v[:, 1, 1] - v[:, 0, 1] * v[:, 1, 0]
        if np.any(det < -tol * scale):
            raise ValueError(f"{label}: covariance not positive semi-definite")


@dataclass(frozen=True)
class FilterRun:
    """Stepwise output of one forward filter pass over a training window.

    Attributes
    ----------
    epochs : ndarray (n,)
        Year of each step.
    observed : ndarray (n,) of bool
        False where the observation is missing (prediction-only step).
    z_pred, v_pred : ndarray (n, d) and (n, d, d)
        One-step state predictions and their covariances.
    z_filt, v_filt : ndarray (n, d) and (n, d, d)
        Filtered states and covariances.
    innovation : ndarray (n,)
        One-step prediction errors; NaN at missing steps.
    innovation_var : ndarray (n,)
        Predictive variance of each observation.
    gain : ndarray (n, d)
        Filter gain; zero at missing steps.
    matrices : StateSpaceMatrices
        The system the run was produced with.
    """

    epochs: np.ndarray
    observed: np.ndarray
    z_pred: np.ndarray
    v_pred: np.ndarray
    z_filt: np.ndarray
    v_filt: np.ndarray
    innovation: np.ndarray
    innovation_var: np.ndarray
    gain: np.ndarray
    matrices: StateSpaceMatrices

    def __post_init__(self) -> None:
        n = self.epochs.size
        d = self.matrices.d
        shapes = {
            "observed": (self.observed, (n,)),
            "z_pred": (self.z_pred, (n, d)),
            "v_pred": (self.v_pred, (n, d, d)),
            "z_filt": (self.z_filt, (n, d)),
            "v_filt": (self.v_filt, (n, d, d)),
            "innovation": (self.innovation, (n,)),
            "innovation_var": (self.innovation_var, (n,)),
            "gain": (self.gain, (n, d)),
        }
        for label, (arr, shape) in shapes.items():
            if arr.shape != shape:
                raise ValueError(f"filter run field {label} has shape {arr.shape}, expected {shape}")
        if n:
            _check_symmetric_psd(self.v_pred, "predicted covariance")
            _check_symmetric_psd(self.v_filt, "filtered covariance")

    @property
    def n_steps(self) -> int:
        return int(self.epochs.size)

    @property
    def terminal_state(self) -> np.ndarray:
        return self.z_filt[-1]

    @property
    def terminal_var(self) -> np.ndarray:
        return self.v_filt[-1]


@dataclass(frozen=True)
class FittedModel:
    """Grid-selected trend model with its filter run and smoothed trend."""

    spec: ModelSpec
    q_ratio: float
    q: float          # system-noise variance, squared data units
    r: float          # observation-noise variance, squared data units
    log_lik: float
    aic: float
    run: FilterRun
    smoothed_mean: np.ndarray
    smoothed_var: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "smoothed_mean", np.asarray(self.smoothed_mean, dtype=np.float64))
        object.__setattr__(self, "smoothed_var", np.asarray(self.smoothed_var, dtype=np.float64))
        n = self.run.n_steps
        if self.smoothed_mean.shape != (n,) or self.smoothed_var.shape != (n,):
            raise ValueError("smoothed trend length does not match the filter run")
        if abs(self.q - self.q_ratio * self.r) > 1e-9 * max(1.0, abs(self.q)):
            raise ValueError("system-noise variance is not ratio * observation variance")
        filtered = self.run.v_filt[:, 0, 0]
        tol = 1e-8 * max(1.0, float(np.max(filtered, initial=0.0)))
        if np.any(self.smoothed_var > filtered + tol):
            raise ValueError("smoothed variance exceeds filtered variance")


@dataclass(frozen=True)
class ForecastDistribution:
    """Per-horizon predictive mean and variance for the years after ``base_epoch``."""

    base_epoch: int
    mean: np.ndarray
    var: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        var = np.asarray(self.var, dtype=np.float64)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "var", var)
        if mean.ndim != 1 or mean.shape != var.shape or mean.size < 1:
            raise ValueError("forecast mean/var must be matching 1-D arrays with >= 1 horizon")
        if not (np.isfinite(mean).all() and np.isfinite(var).all()):
            raise ValueError("forecast moments must be finite")
        if np.any(var < -1e-12 * max(1.0, float(np.abs(var).max()))):
            raise ValueError("forecast variance must be non-negative")

    @property
    def horizon(self) -> int:
        return int(self.mean.size)

    @property
    def epochs(self) -> np.ndarray:
        """Years covered by the forecast: base_epoch + 1 .. base_epoch + horizon."""
        return self.base_epoch + 1 + np.arange(self.horizon)

    @property
    def sd(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.var, 0.0))


class Side(Enum):
    """Position of an observation relative to the predicted mean."""

    ABOVE = "ABOVE"
    BELOW = "BELOW"
    ON = "ON"


@dataclass(frozen=True)
class FlagResult:
    """Comparison of one held-out observation against its forecast."""

    epoch: int
    observed: float
    mean: float
    sd: float
    z: float
    side: Side
    outside_levels: tuple[str, ...]
    p_analytic: float
    p_mc: float

    def __post_init__(self) -> None:
        if (self.side is Side.ABOVE) != (self.z > 0) and np.isfinite(self.z):
            raise ValueError("side must be ABOVE exactly when z > 0")
        for label, p in (("p_analytic", self.p_analytic), ("p_mc", self.p_mc)):
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"{label} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class TendencyResult:
    """Monte-Carlo averaged joint tail probability over the held-out years."""

    per_year_p: tuple[float, ...]
    joint_probability: float
    same_side: bool
    mc_draws: int
    mc_reps: int
    seed: int

    def __post_init__(self) -> None:
        for p in self.per_year_p:
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"per-year probability {p} outside [0, 1]")
        if not (0.0 <= self.joint_probability <= 1.0):
            raise ValueError(f"joint probability {self.joint_probability} outside [0, 1]")
        if self.per_year_p and self.joint_probability > min(self.per_year_p) + 1e-12:
            raise ValueError("joint probability exceeds the smallest per-year probability")
        if self.joint_probability == 0.0:
            import warnings

            from .errors import ZeroJointProbabilityWarning

            warnings.warn(
                "joint probability underflowed to zero at the configured draw count",
                ZeroJointProbabilityWarning,
                stacklevel=2,
            )
