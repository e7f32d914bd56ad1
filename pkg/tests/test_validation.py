"""Forecast-vs-actual bias: interpolation, the rho ratio, quantile
summaries, and report writers."""

import csv
import json
import math

import numpy as np
import pytest

from bidforecast import (FLAT_TOD, BiasRecord, EmptySummaryError,
                         ExtrapolationError, ResponseCurves,
                         UndefinedBiasError, bias_summary, forecast_bias,
                         interpolate_impressions, write_bias_report,
                         write_histogram_csv)
from bidforecast.validation import (LOG_BIN_WIDTH, PRODUCTION_CENTRAL_50,
                                    PRODUCTION_CENTRAL_90, QUANTILE_LEVELS)


def _curves(scale=1.0):
    grid = np.concatenate([[0.0], np.geomspace(0.01, 10.0, 40)])
    n_i = np.concatenate([[0.0], scale * 1000 * (1 - np.exp(-np.geomspace(0.01, 10.0, 40)))])
    zero = np.zeros_like(grid)
    v = np.full_like(grid, math.nan)
    return ResponseCurves(grid=grid, n_i=n_i, c=n_i * 0.1, gain=zero,
                          n_a=zero, v=v)


def _counts(total):
    counts = np.zeros(288)
    counts[:96] = total / 96.0
    pacing = np.zeros(288)
    pacing[:96] = 1.0
    return counts, pacing


def test_interpolation_bit_equal_at_grid_points():
    curves = _curves()
    for j in (1, 7, 20, 40):
        u = float(curves.grid[j])
        assert interpolate_impressions(curves, u) == curves.n_i[j]


def test_interpolation_between_points_is_log_linear():
    curves = _curves()
    u1, u2 = float(curves.grid[5]), float(curves.grid[6])
    u_mid = math.exp(0.5 * (math.log(u1) + math.log(u2)))
    want = 0.5 * (curves.n_i[5] + curves.n_i[6])
    assert interpolate_impressions(curves, u_mid) == pytest.approx(want, rel=1e-12)


def test_interpolation_refuses_extrapolation():
    curves = _curves()
    with pytest.raises(ExtrapolationError):
        interpolate_impressions(curves, 0.001)
    with pytest.raises(ExtrapolationError):
        interpolate_impressions(curves, 20.0)


def test_bias_identity_and_ratio():
    curves = _curves()
    u = float(curves.grid[25])
    forecast = float(curves.n_i[25])
    # Arrange the actual delivery so its normalized total equals the
    # forecast exactly: factor 1, all-active flat day.
    counts = np.full(288, forecast / 288.0)
    rec = forecast_bias(curves, u, counts, np.ones(288), FLAT_TOD, 1.0,
                        line_id="L1")
    assert rec.rho == pytest.approx(1.0, rel=1e-12)
    assert rec.log_rho == pytest.approx(0.0, abs=1e-12)
    assert rec.line_id == "L1"

    half = forecast_bias(curves, u, counts / 2.0, np.ones(288), FLAT_TOD, 1.0)
    assert half.rho == pytest.approx(2.0, rel=1e-12)
    assert half.log_rho == pytest.approx(math.log(2.0), rel=1e-12)


def test_bias_scale_consistency():
    u = 0.5
    counts, pacing = _counts(5000.0)
    one = forecast_bias(_curves(1.0), u, counts, pacing, FLAT_TOD, 4.0, 0.8)
    both = forecast_bias(_curves(3.0), u, 3.0 * counts, pacing, FLAT_TOD, 4.0, 0.8)
    assert both.rho == pytest.approx(one.rho, rel=1e-12)


def test_bias_error_cases():
    curves = _curves()
    counts, pacing = _counts(100.0)
    with pytest.raises(ExtrapolationError):
        forecast_bias(curves, 100.0, counts, pacing, FLAT_TOD, 4.0)
    # Forecast of zero at the realized control is undefined bias.
    flat = ResponseCurves(grid=[0.0, 0.1, 1.0], n_i=[0.0, 0.0, 0.0],
                          c=[0.0, 0.0, 0.0], gain=[0.0, 0.0, 0.0],
                          n_a=[0.0, 0.0, 0.0], v=[math.nan] * 3)
    with pytest.raises(UndefinedBiasError):
        forecast_bias(flat, 0.5, counts, pacing, FLAT_TOD, 4.0)


def _records(rhos):
    return [BiasRecord(f"l{i}", r, 1.0, r, math.log(r))
            for i, r in enumerate(rhos)]


def test_summary_degenerate():
    s = bias_summary(_records([1.0] * 7))
    assert all(v == 1.0 for v in s.quantiles.values())
    assert s.central_90 == (1.0, 1.0)
    assert s.central_50 == (1.0, 1.0)
    assert s.n == 7


def test_summary_frozen_type7_quantiles():
    s = bias_summary(_records([0.5, 1.0, 2.0]))
    assert s.quantiles[0.05] == pytest.approx(0.55, abs=1e-12)
    assert s.quantiles[0.25] == pytest.approx(0.75, abs=1e-12)
    assert s.quantiles[0.50] == pytest.approx(1.0, abs=1e-12)
    assert s.quantiles[0.75] == pytest.approx(1.5, abs=1e-12)
    assert s.quantiles[0.95] == pytest.approx(1.9, abs=1e-12)
    assert s.central_50[0] >= 0.5 and s.central_50[1] <= 2.0


def test_summary_quantiles_are_ordered():
    rng = np.random.default_rng(13)
    rhos = np.exp(rng.normal(0, 0.7, 500))
    s = bias_summary(_records(rhos.tolist()))
    vals = [s.quantiles[q] for q in QUANTILE_LEVELS]
    assert vals == sorted(vals)
    assert rhos.min() <= vals[0] and vals[-1] <= rhos.max()


def test_summary_histogram_bins():
    s = bias_summary(_records([1.0, math.exp(0.3), math.exp(-0.1)]))
    hist = dict(s.histogram)
    assert hist[0.0] == 1          # log 1 = 0 falls in [0, 0.25)
    assert hist[0.25] == 1         # 0.3 falls in [0.25, 0.5)
    assert hist[-0.25] == 1        # -0.1 falls in [-0.25, 0)
    assert sum(hist.values()) == 3
    assert LOG_BIN_WIDTH == 0.25


def test_summary_empty_errors():
    with pytest.raises(EmptySummaryError):
        bias_summary([])


def test_report_writer(tmp_path):
    records = _records([0.8, 1.0, 1.3, 0.95])
    path = tmp_path / "bias.json"
    summary = write_bias_report(records, path)
    doc = json.loads(path.read_text())
    assert len(doc["lines"]) == 4
    assert doc["lines"][0]["line_id"] == "l0"
    assert doc["summary"]["n"] == 4
    assert doc["summary"]["quantiles"]["50"] == summary.quantiles[0.50]
    assert doc["summary"]["production_reference"]["central_90"] == list(PRODUCTION_CENTRAL_90)
    assert doc["summary"]["production_reference"]["central_50"] == list(PRODUCTION_CENTRAL_50)


def test_histogram_csv(tmp_path):
    summary = bias_summary(_records([1.0, 1.1, 0.5, 2.0]))
    path = tmp_path / "hist.csv"
    write_histogram_csv(summary, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["bin_left", "count"]
    assert sum(int(r[1]) for r in rows[1:]) == 4
    lefts = [float(r[0]) for r in rows[1:]]
    assert lefts == sorted(lefts)
