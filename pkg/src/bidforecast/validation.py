"""Day-over-day forecast validation: the bias ratio rho between
yesterday's forecast (evaluated at today's realized control) and today's
normalized delivery, plus its distribution across lines."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptySummaryError, ExtrapolationError, UndefinedBiasError
from .forecast import ResponseCurves
from .normalization import TodModel, total_available

#: Production-scale reference intervals for rho (documentation constants;
#: desk-scale synthetic runs are expected to be much tighter).
PRODUCTION_CENTRAL_90 = (0.339, 4.459)
PRODUCTION_CENTRAL_50 = (0.726, 2.08)

QUANTILE_LEVELS = (0.05, 0.25, 0.50, 0.75, 0.95)
LOG_BIN_WIDTH = 0.25


@dataclass(frozen=True, slots=True)
class BiasRecord:
    """One line's forecast-vs-actual comparison for a single day."""

    line_id: str
    forecast: float
    actual_normalized: float
    rho: float
    log_rho: float

    def to_dict(self) -> dict:
        return {"line_id": self.line_id, "forecast": self.forecast,
                "actual_normalized": self.actual_normalized,
                "rho": self.rho, "log_rho": self.log_rho}


@dataclass(frozen=True, slots=True)
class BiasSummary:
    """Distributional view of rho across lines."""

    n: int
    quantiles: dict[float, float]
    central_90: tuple[float, float]
    central_50: tuple[float, float]
    histogram: list[tuple[float, int]]  # (log-rho bin left edge, count)

    def to_dict(self) -> dict:
        return {"n": self.n,
                "quantiles": {f"{int(q * 100)}": v for q, v in self.quantiles.items()},
                "central_90": list(self.central_90),
                "central_50": list(self.central_50),
                "histogram": [[left, count] for left, count in self.histogram],
                "production_reference": {"central_90": list(PRODUCTION_CENTRAL_90),
                                         "central_50": list(PRODUCTION_CENTRAL_50)}}


def interpolate_impressions(curves: ResponseCurves, u: float) -> float:
    """Forecast impressions at an off-grid control value, linear in
    (log u, n_I). Exact (bit-equal) at grid points; refuses to
    extrapolate outside the positive grid range."""
    pos = curves.grid > 0.0
    grid = curves.grid[pos]
    n_i = curves.n_i[pos]
    if len(grid) < 2:
        raise ExtrapolationError("curve has fewer than 2 positive grid points")
    if not (grid[0] <= u <= grid[-1]):
        raise ExtrapolationError(
            f"u = {u!r} outside forecast grid [{grid[0]!r}, {grid[-1]!r}]")
    return float(np.interp(math.log(u), np.log(grid), n_i))


def forecast_bias(forecast_curves: ResponseCurves, u_realized: float,
                  actual_counts: Sequence[float], actual_pacing: Sequence[float],
                  tod: TodModel, factor: float, r: float = 1.0,
                  line_id: str = "") -> BiasRecord:
    """rho = forecast(u_realized) / actual, with the actual delivery
    normalized exactly the way the forecast's inputs were."""
    forecast = interpolate_impressions(forecast_curves, u_realized)
    actual = total_available(actual_counts, actual_pacing, tod, factor, r)
    if actual <= 0.0:
        raise UndefinedBiasError("actual normalized delivery is zero")
    if forecast <= 0.0:
        raise UndefinedBiasError("forecast at realized control is zero")
    rho = forecast / actual
    return BiasRecord(line_id, forecast, actual, rho, math.log(rho))


def bias_summary(records: Sequence[BiasRecord]) -> BiasSummary:
    """Quantiles of rho (linear interpolation between order statistics)
    plus a fixed-width histogram of log rho."""
    if len(records) == 0:
        raise EmptySummaryError("no bias records to summarize")
    rho = np.array([r.rho for r in records], dtype=np.float64)
    qs = {q: float(np.quantile(rho, q)) for q in QUANTILE_LEVELS}
    log_rho = np.array([r.log_rho for r in records], dtype=np.float64)
    bins = np.floor(log_rho / LOG_BIN_WIDTH).astype(np.int64)
    histogram = [(float(b * LOG_BIN_WIDTH), int((bins == b).sum()))
                 for b in np.unique(bins)]
    return BiasSummary(n=len(records), quantiles=qs,
                       central_90=(qs[0.05], qs[0.95]),
                       central_50=(qs[0.25], qs[0.75]),
                       histogram=histogram)


def write_bias_report(records: Sequence[BiasRecord], path: str | Path) -> BiasSummary:
    """Bias report JSON: every per-line record plus the summary."""
    summary = bias_summary(records)
    doc = {"lines": [r.to_dict() for r in records], "summary": summary.to_dict()}
    Path(path).write_text(json.dumps(doc, indent=2), encoding="utf-8")
    return summary


def write_histogram_csv(summary: BiasSummary, path: str | Path) -> None:
    """(bin_left, count) rows of the log-rho histogram, for plotting."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("bin_left", "count"))
        for left, count in summary.histogram:
            w.writerow([repr(left), count])
