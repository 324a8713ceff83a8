"""Static vector figures: observations, trend, forecast bands, held-out points."""
from __future__ import annotations

import numpy as np

from .io import series_payload
from .pipeline import SeriesReport

__all__ = ["build_figure", "figure_from_payload", "write_plot", "save_figure"]

# Held-out observations are drawn as one scatter collection so a figure can
# be checked for exactly the expected number of points.
HELD_OUT_LABEL = "held-out observations"


def figure_from_payload(name: str, payload: dict):
    """Build the figure for one (non-skipped) series payload dict."""
    import matplotlib.pyplot as plt

    if "skipped" in payload:
        raise ValueError(f"series {name!r} was skipped: {payload['skipped']}")

    obs_years = np.array([row["year"] for row in payload["observations"]])
    obs_values = np.array(
        [row["value"] if row["value"] is not None else np.nan
         for row in payload["observations"]],
        dtype=float,
    )
    trend_years = np.array([row["year"] for row in payload["trend"]])
    trend_means = np.array([row["mean"] for row in payload["trend"]])
    fc = payload["forecast"]
    fc_years = np.array([row["year"] for row in fc])
    fc_means = np.array([row["mean"] for row in fc])
    base_year = int(fc_years[0]) - 1

    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    train_mask = obs_years <= base_year
    ax.plot(obs_years[train_mask], obs_values[train_mask],
            color="0.45", lw=1.2, label="observations")
    ax.plot(trend_years, trend_means, color="tab:blue", lw=1.6, label="smoothed trend")

    # Widest band first, progressively darker shading so the bands nest.
    labels = list(fc[0]["bands"])
    for i, label in enumerate(labels):
        lower = np.array([row["bands"][label][0] for row in fc])
        upper = np.array([row["bands"][label][1] for row in fc])
        ax.fill_between(fc_years, lower, upper, color="tab:blue",
                        alpha=0.12 + 0.08 * i, lw=0, label=f"{label} band")
    ax.plot(fc_years, fc_means, color="tab:blue", ls=":", lw=1.6, label="forecast mean")

    held_mask = (obs_years > base_year) & np.isfinite(obs_values)
    ax.scatter(obs_years[held_mask], obs_values[held_mask],
               color="black", zorder=5, s=28, label=HELD_OUT_LABEL)

    ax.set_title(name)
    ax.set_xlabel("year")
    ax.set_ylabel(payload.get("units") or "value")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def build_figure(report: SeriesReport):
    """Build the figure for one scanned series."""
    return figure_from_payload(report.name, series_payload(report))


def save_figure(fig, path) -> None:
    """Save as a vector image, suppressing volatile SVG metadata."""
    kwargs = {}
    if str(path).lower().endswith(".svg"):
        kwargs["metadata"] = {"Date": None}
    fig.savefig(path, **kwargs)
    import matplotlib.pyplot as plt

    plt.close(fig)


def write_plot(report: SeriesReport, path) -> None:
    """Render one series report to a vector-graphics file (SVG or PDF)."""
    save_figure(build_figure(report), path)


def held_out_point_count(fig) -> int:
    """Number of held-out observation points in a figure (for checks)."""
    ax = fig.axes[0]
    for collection in ax.collections:
        if collection.get_label() == HELD_OUT_LABEL:
            return len(collection.get_offsets())
    return 0
