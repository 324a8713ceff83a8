"""End-to-end scan: split, fit, forecast, flag, and summarise each series.

``run_scan`` applies the same procedure to every series of a panel: fix
the observation variance on the training window, grid-fit the system
noise, filter and smooth, extrapolate over the held-out horizon, build
forecast bands, flag the held-out observations, and run the Monte-Carlo
tendency test.  Series that cannot be analysed are reported as skipped
with a reason; they never abort the panel.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ConfigError, TrendflagError
from .estimation import estimate_r, grid_search_q
from .flags import (
    BandInterval,
    BandSpec,
    anomalies,
    averaged_joint_probability,
    classify_flags,
    flag_rng,
    forecast_bands,
    series_seed,
)
from .statespace import build_matrices, multistep_predict
from .types import (
    FittedModel,
    FlagResult,
    ForecastDistribution,
    InitMode,
    ModelSpec,
    TendencyResult,
    TimeSeries,
)

__all__ = ["RunConfig", "SeriesReport", "run_scan"]

# Per-series override keys accepted in config files.
_OVERRIDE_KEYS = {"order", "qGrid", "burnIn", "initMode", "rOverride"}


def _parse_grid(value) -> tuple[float, float, float]:
    if isinstance(value, Mapping):
        try:
            return (float(value["min"]), float(value["max"]), float(value["step"]))
        except KeyError as missing:
            raise ConfigError(f"q grid requires min/max/step, missing {missing}") from None
    grid = tuple(float(v) for v in value)
    if len(grid) != 3:
        raise ConfigError("q grid must be (min, max, step)")
    return grid


def _parse_init_mode(value) -> InitMode:
    if isinstance(value, InitMode):
        return value
    try:
        return InitMode(str(value))
    except ValueError:
        raise ConfigError(
            f"unknown init mode {value!r}; choose from "
            f"{[m.value for m in InitMode]}"
        ) from None


@dataclass(frozen=True)
class RunConfig:
    """Settings for one panel scan.

    ``train_end`` is the last year used for fitting and ``horizon`` the
    number of held-out years compared against the forecast.  A series is
    analysable only when its observations extend through the whole
    held-out window.
    """

    train_end: int
    horizon: int = 3
    order: int = 2
    q_grid: tuple[float, float, float] = (0.05, 0.50, 0.01)
    bands: BandSpec = field(default_factory=BandSpec)
    mc_draws: int = 10000
    mc_reps: int = 1000
    seed: int = 0
    init_mode: InitMode = InitMode.DIFFUSE
    burn_in: int | None = None
    series: tuple[str, ...] | None = None
    r_override: float | None = None
    overrides: Mapping[str, Mapping[str, object]] | None = None

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "train_end", int(self.train_end))
            object.__setattr__(self, "horizon", int(self.horizon))
        except (TypeError, ValueError):
            raise ConfigError("train_end and horizon must be integers") from None
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")
        if self.mc_draws < 1 or self.mc_reps < 1:
            raise ConfigError("mc_draws and mc_reps must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.r_override is not None and self.r_override < 0:
            raise ConfigError("r_override must be non-negative")
        object.__setattr__(self, "init_mode", _parse_init_mode(self.init_mode))
        object.__setattr__(self, "q_grid", _parse_grid(self.q_grid))
        if self.series is not None:
            object.__setattr__(self, "series", tuple(str(s) for s in self.series))
        if not isinstance(self.bands, BandSpec):
            object.__setattr__(self, "bands", BandSpec(tuple(self.bands)))
        if self.overrides is not None:
            norm: dict[str, dict[str, object]] = {}
            for name, entry in self.overrides.items():
                bad = set(entry) - _OVERRIDE_KEYS
                if bad:
                    raise ConfigError(
                        f"override for {name!r} has unknown keys {sorted(bad)}; "
                        f"allowed: {sorted(_OVERRIDE_KEYS)}"
                    )
                norm[str(name)] = dict(entry)
            object.__setattr__(self, "overrides", norm)
        # Validate the shared spec eagerly so bad settings fail before any scan.
        try:
            self.model_spec()
        except TrendflagError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.overrides:
            for name in self.overrides:
                try:
                    self.model_spec(name)
                except TrendflagError:
                    raise
                except ValueError as exc:
                    raise ConfigError(f"override for {name!r}: {exc}") from None

    def model_spec(self, name: str | None = None) -> ModelSpec:
        """Model settings for one series, with per-series overrides applied."""
        order = self.order
        grid = self.q_grid
        burn_in = self.burn_in
        init_mode = self.init_mode
        if name is not None and self.overrides and name in self.overrides:
            entry = self.overrides[name]
            if "order" in entry:
                order = int(entry["order"])  # type: ignore[arg-type]
            if "qGrid" in entry:
                grid = _parse_grid(entry["qGrid"])
            if "burnIn" in entry:
                burn_in = None if entry["burnIn"] is None else int(entry["burnIn"])  # type: ignore[arg-type]
            if "initMode" in entry:
                init_mode = _parse_init_mode(entry["initMode"])
        return ModelSpec(
            order=order,
            q_ratio_grid=grid,
            init_mode=init_mode,
            likelihood_burn_in=burn_in,
            train_end=self.train_end,
        )

    def r_for(self, name: str) -> float | None:
        """Fixed observation variance for one series, if configured."""
        if self.overrides and name in self.overrides:
            entry = self.overrides[name]
            if "rOverride" in entry:
                value = entry["rOverride"]
                return None if value is None else float(value)  # type: ignore[arg-type]
        return self.r_override


@dataclass(frozen=True)
class SeriesReport:
    """Everything the scan produced for one series, or why it was skipped."""

    name: str
    units: str = ""
    series: TimeSeries | None = None
    model: FittedModel | None = None
    forecast: ForecastDistribution | None = None
    bands: tuple[BandInterval, ...] = ()
    flags: tuple[FlagResult, ...] = ()
    tendency: TendencyResult | None = None
    anomaly: TimeSeries | None = None
    skipped: str | None = None


def _scan_one(series: TimeSeries, config: RunConfig) -> SeriesReport:
    def skipped(reason: str) -> SeriesReport:
        return SeriesReport(name=series.name, units=series.units, series=series, skipped=reason)

    if len(series) == 0 or series.n_observed == 0:
        return skipped("no observed values")
    if series.last_epoch <= config.train_end:
        return skipped("no held-out data")
    held_end = config.train_end + config.horizon
    if series.last_epoch < held_end:
        return skipped(
            f"held-out window {config.train_end + 1}-{held_end} extends beyond "
            f"last observed year {series.last_epoch}"
        )

    spec = config.model_spec(series.name)
    train = series.up_to(config.train_end)
    need = spec.order + 2
    if train.n_observed < need:
        return skipped(
            f"{train.n_observed} observed training values; an order-{spec.order} "
            f"fit needs at least {need}"
        )

    fixed_r = config.r_for(series.name)
    r = estimate_r(train.values) if fixed_r is None else float(fixed_r)
    model, _ = grid_search_q(series, spec, r)
    matrices = build_matrices(spec.order)
    fd = multistep_predict(model.run, matrices, model.q, model.r, config.horizon)
    band_geometry = forecast_bands(fd, config.bands)

    held = series.window(config.train_end + 1, held_end)
    seed = series_seed(config.seed, series.name)
    flags = classify_flags(held, fd, config.bands, config.mc_draws, flag_rng(seed))
    tendency = averaged_joint_probability(
        held.values, fd, draws=config.mc_draws, reps=config.mc_reps, seed=seed
    )
    anomaly = anomalies(series)
    return SeriesReport(
        name=series.name,
        units=series.units,
        series=series,
        model=model,
        forecast=fd,
        bands=band_geometry,
        flags=flags,
        tendency=tendency,
        anomaly=anomaly,
    )


def run_scan(panel, config: RunConfig) -> list[SeriesReport]:
    """Scan every analysable series of a panel.

    Parameters
    ----------
    panel : iterable of TimeSeries, or a Panel from :mod:`trendflag.io`
        Columns with parse failures (Panel only) are reported as skipped.
    config : RunConfig

    Returns
    -------
    list of SeriesReport
        One report per selected series, in panel order.  Per-series
        failures become skipped entries; only configuration problems
        raise.
    """
    if hasattr(panel, "series") and hasattr(panel, "corrupted"):
        series_list: list[TimeSeries] = list(panel.series)
        corrupted: dict[str, str] = dict(panel.corrupted)
    else:
        series_list = list(panel)
        corrupted = {}

    available = [s.name for s in series_list] + list(corrupted)
    if len(set(available)) != len(available):
        raise ConfigError("panel has duplicate series names")
    wanted = config.series
    if wanted is not None:
        unknown = [name for name in wanted if name not in available]
        if unknown:
            raise ConfigError(f"selected series not in panel: {unknown}")

    reports: list[SeriesReport] = []
    for series in series_list:
        if wanted is not None and series.name not in wanted:
            continue
        try:
            reports.append(_scan_one(series, config))
        except ConfigError:
            raise
        except TrendflagError as exc:
            reports.append(
                SeriesReport(
                    name=series.name, units=series.units, series=series, skipped=str(exc)
                )
            )
    for name, reason in corrupted.items():
        if wanted is not None and name not in wanted:
            continue
        reports.append(SeriesReport(name=name, skipped=f"column parse failure: {reason}"))
    return reports
