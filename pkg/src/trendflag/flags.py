"""Forecast bands, per-year flags, tail probabilities, and the tendency test.

A held-out observation is compared against its forecast distribution in
three ways: which configured bands it falls outside of, its one-sided
Gaussian tail probability, and a Monte-Carlo estimate of the same.  The
tendency test multiplies the per-year Monte-Carlo probabilities within
each replicate and averages the products, which measures how surprising
the recent years are jointly.
"""
from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DegenerateSdWarning, EmptyWindowError, EpochMismatchError
from .types import FlagResult, ForecastDistribution, Side, TendencyResult, TimeSeries

__all__ = [
    "BandSpec",
    "BandInterval",
    "forecast_bands",
    "classify_flags",
    "pvalue_analytic",
    "pvalue_mc",
    "joint_probability",
    "averaged_joint_probability",
    "anomalies",
    "series_seed",
    "derive_rng",
]

DEFAULT_BAND_LEVELS = (("95%", 1.96), ("80%", 1.28), ("~70%", 1.0))

# Sub-stream tags so flag p-values and tendency replicates never share draws.
_FLAG_STREAM = 1
_TENDENCY_STREAM = 2


@dataclass(frozen=True)
class BandSpec:
    """Ordered (label, multiplier) pairs, widest band first."""

    levels: tuple[tuple[str, float], ...] = DEFAULT_BAND_LEVELS

    def __post_init__(self) -> None:
        levels = tuple((str(label), float(mult)) for label, mult in self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels:
            raise ValueError("band spec needs at least one level")
        mults = [m for _, m in levels]
        if any(m <= 0 for m in mults):
            raise ValueError("band multipliers must be positive")
        if any(a <= b for a, b in zip(mults, mults[1:])):
            raise ValueError("band multipliers must be strictly decreasing")
        labels = [label for label, _ in levels]
        if len(set(labels)) != len(labels):
            raise ValueError("band labels must be unique")


@dataclass(frozen=True)
class BandInterval:
    """Lower/upper band edges for every forecast horizon at one level."""

    label: str
    multiplier: float
    lower: np.ndarray
    upper: np.ndarray


def forecast_bands(
    fd: ForecastDistribution, bands: BandSpec = BandSpec()
) -> tuple[BandInterval, ...]:
    """Band edges ``mean -/+ multiplier * sd`` per horizon and level."""
    sd = fd.sd
    return tuple(
        BandInterval(label, mult, fd.mean - mult * sd, fd.mean + mult * sd)
        for label, mult in bands.levels
    )


def pvalue_analytic(observed: float, mean: float, sd: float) -> float:
    """One-sided Gaussian tail probability in the direction of deviation.

    Returns P(X >= observed) when the observation lies above the mean,
    P(X <= observed) below it, and 0.5 when they coincide.
    """
    if sd < 0:
        raise ValueError("standard deviation must be non-negative")
    if sd == 0:
        if observed == mean:
            return 0.5
        warnings.warn(
            "zero standard deviation with a deviating observation; "
            "tail probability is 0",
            DegenerateSdWarning,
            stacklevel=2,
        )
        return 0.0
    z = (observed - mean) / sd
    return float(norm.sf(abs(z)))


def pvalue_mc(
    observed: float,
    mean: float,
    sd: float,
    draws: int = 10000,
    rng: np.random.Generator | None = None,
) -> float:
    """Monte-Carlo estimate of :func:`pvalue_analytic`.

    Draws from N(mean, sd^2) and returns the fraction at least as extreme
    as the observation in the direction of deviation; ties count as
    extreme, so a zero-sd draw set against a coinciding observation gives
    exactly 1.
    """
    if draws < 1:
        raise ValueError("need at least one draw")
    if sd < 0:
        raise ValueError("standard deviation must be non-negative")
    if rng is None:
        rng = np.random.default_rng(0)
    samples = mean + sd * rng.standard_normal(draws)
    if observed >= mean:
        hits = samples >= observed
    else:
        hits = samples <= observed
    return float(np.count_nonzero(hits)) / float(draws)


def joint_probability(ps) -> float:
    """Product of per-year probabilities (1.0 for an empty list)."""
    out = 1.0
    for p in ps:
        p = float(p)
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"probability {p} outside [0, 1]")
        out *= p
    return out


def averaged_joint_probability(
    observed,
    fd: ForecastDistribution,
    draws: int = 10000,
    reps: int = 1000,
    seed: int = 0,
) -> TendencyResult:
    """Replicate the Monte-Carlo joint probability and average it.

    For each replicate, every per-year tail probability is re-estimated
    with fresh draws and the probabilities are multiplied; the products
    are then averaged across replicates.  This is the average of products,
    not the product of averages.  Missing held-out values are excluded.

    Parameters
    ----------
    observed : array-like
        Held-out values aligned with ``fd`` (NaN = missing).
    fd : ForecastDistribution
    draws, reps : int
        Draws per tail estimate and number of replicates.
    seed : int
        Non-negative stream seed; identical inputs and seed reproduce the
        result bit for bit regardless of evaluation order.
    """
    obs = np.asarray(observed, dtype=np.float64)
    if obs.shape != fd.mean.shape:
        raise EpochMismatchError(
            f"{obs.size} held-out values do not align with {fd.horizon} horizons"
        )
    if reps < 1:
        raise ValueError("need at least one replicate")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    mask = np.isfinite(obs)
    o = obs[mask]
    m = fd.mean[mask]
    s = fd.sd[mask]
    k = int(o.size)

    per_year = np.zeros(k)
    joint = 0.0
    for b in range(reps):
        rng = derive_rng(seed, _TENDENCY_STREAM, b)
        ps = np.array([pvalue_mc(o[i], m[i], s[i], draws, rng) for i in range(k)])
        per_year += ps
        joint += float(np.prod(ps))
    same_side = bool(k > 0 and (np.all(o > m) or np.all(o < m)))
    return TendencyResult(
        per_year_p=tuple(float(p) for p in per_year / reps),
        joint_probability=joint / reps,
        same_side=same_side,
        mc_draws=int(draws),
        mc_reps=int(reps),
        seed=int(seed),
    )


def classify_flags(
    observed: TimeSeries,
    fd: ForecastDistribution,
    bands: BandSpec = BandSpec(),
    draws: int = 10000,
    rng: np.random.Generator | None = None,
) -> tuple[FlagResult, ...]:
    """Score each observed held-out year against the forecast distribution.

    The held-out series must cover exactly the forecast years; years with
    missing values produce no result.  A year is outside a band when
    |z| strictly exceeds the band multiplier, so the outside set is
    downward closed: outside the widest band implies outside the rest.
    """
    if not np.array_equal(observed.epochs, fd.epochs):
        raise EpochMismatchError(
            f"held-out years {observed.epochs.tolist()} do not match "
            f"forecast years {fd.epochs.tolist()}"
        )
    if rng is None:
        rng = np.random.default_rng(0)
    sds = fd.sd
    results = []
    for i, epoch in enumerate(observed.epochs):
        y = float(observed.values[i])
        if not np.isfinite(y):
            continue
        m = float(fd.mean[i])
        sd = float(sds[i])
        if sd > 0:
            z = (y - m) / sd
        else:
            z = 0.0 if y == m else float(np.copysign(np.inf, y - m))
        side = Side.ABOVE if y > m else Side.BELOW if y < m else Side.ON
        outside = tuple(label for label, mult in bands.levels if abs(z) > mult)
        results.append(
            FlagResult(
                epoch=int(epoch),
                observed=y,
                mean=m,
                sd=sd,
                z=float(z),
                side=side,
                outside_levels=outside,
                p_analytic=pvalue_analytic(y, m, sd),
                p_mc=pvalue_mc(y, m, sd, draws, rng),
            )
        )
    return tuple(results)


def anomalies(series: TimeSeries, window: tuple[int, int] | None = None) -> TimeSeries:
    """Deviation of every value from the mean over ``window``.

    The mean is taken over the observed values inside the window (the
    whole series by default); missing values stay missing.
    """
    if len(series) == 0:
        raise EmptyWindowError(f"series {series.name!r} is empty")
    start, end = window if window is not None else (series.first_epoch, series.last_epoch)
    sel = (series.epochs >= start) & (series.epochs <= end)
    vals = series.values[sel]
    obs = np.isfinite(vals)
    if not obs.any():
        raise EmptyWindowError(
            f"series {series.name!r}: no observed values in {start}..{end}"
        )
    center = float(vals[obs].mean())
    return TimeSeries(series.name, series.epochs, series.values - center, series.units)


def series_seed(master_seed: int, name: str) -> int:
    """Stable per-series seed so panel order and scheduling cannot matter."""
    digest = hashlib.sha256(f"{int(master_seed)}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, *key)."""
    entropy = (int(seed),) + tuple(int(k) for k in key)
    return np.random.default_rng(np.random.SeedSequence(entropy=entropy))


def flag_rng(seed: int) -> np.random.Generator:
    """Generator for the per-year flag p-values of one series."""
    return derive_rng(seed, _FLAG_STREAM)
