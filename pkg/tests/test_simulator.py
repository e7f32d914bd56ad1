"""Synthetic plant generator and its brute-force ground-truth curves."""

import json
import math

import numpy as np
import pytest

from bidforecast import (AuctionRecord, BidModel, EventRateModel,
                         ForecastInputs, PlantSpec, SimulatedDay,
                         brute_force_curves, empirical_impressions_at,
                         fit_and_forecast_roundtrip, gmm_cdf, generate_day,
                         spend_at, write_truth)
from bidforecast.simulator import COST_MODELS


def _erm(means=(0.3, 0.6), stds=(0.05, 0.05), weights=(0.5, 0.5)):
    return EventRateModel(np.array(weights), np.array(means), np.array(stds))


def _spec(**kw):
    base = dict(true_erm=_erm(), bstar_location=-0.5, bstar_scale=0.6,
                true_theta1=0.9, true_theta0=0.02, g=4.0, b_max=20.0,
                u_day=0.8, n_records=2000, pacing=np.ones(288), seed=5)
    base.update(kw)
    return PlantSpec(**base)


def test_cost_models():
    day = generate_day(_spec(cost_model="second_price_equal"))
    assert all(r.b_c == r.b_star for r in day.available)
    day = generate_day(_spec(cost_model="discounted", kappa=0.6))
    assert all(r.b_c == 0.6 * r.b_star for r in day.available)
    assert set(COST_MODELS) == {"second_price_equal", "discounted"}


def test_identity_theta_gives_exact_scores():
    spec = _spec(true_theta1=1.0, true_theta0=0.0, b_max=1e9)
    day = generate_day(spec)
    for r in day.available[:200]:
        assert r.b_s == spec.u_day * spec.g * r.e


def test_generate_day_deterministic():
    a = generate_day(_spec())
    b = generate_day(_spec())
    assert a.available == b.available
    assert a.observed == b.observed
    assert (a.unthinned_counts == b.unthinned_counts).all()
    c = generate_day(_spec(seed=6))
    assert a.available != c.available


def test_thinning_and_counts():
    pacing = np.full(288, 0.5)
    spec = _spec(pacing=pacing, log_sampling_factor=4.0, n_records=8000)
    day = generate_day(spec)
    assert day.unthinned_counts.sum() == spec.n_records
    assert len(day.available) == spec.n_records
    avail = set(id(r) for r in day.available)
    assert all(id(r) in avail for r in day.observed)
    # Expected keep rate 0.5 * 0.25 = 0.125; allow 5 sigma.
    p = 0.125
    sigma = math.sqrt(spec.n_records * p * (1 - p))
    assert abs(len(day.observed) - p * spec.n_records) < 5 * sigma
    assert day.observed_counts.sum() == len(day.observed)
    assert day.config.log_sampling_factor == 4.0


def test_generated_event_rates_match_mixture():
    erm = _erm(means=(0.35, 0.62), stds=(0.03, 0.04))
    spec = _spec(true_erm=erm, n_records=50_000)
    day = generate_day(spec)
    e = np.sort([r.e for r in day.available])
    assert e[0] > 0.0 and e[-1] < 1.0  # no clamping occurred
    n = len(e)
    cdf = gmm_cdf(erm, e)
    ks = max(np.abs(cdf - np.arange(1, n + 1) / n).max(),
             np.abs(cdf - np.arange(0, n) / n).max())
    assert ks < 1.63 / math.sqrt(n)


def test_brute_force_hand_enumeration():
    records = [AuctionRecord(e=0.5, b_s=0.0, b_star=0.4, b_c=0.4, bucket=0),
               AuctionRecord(e=0.2, b_s=0.0, b_star=0.3, b_c=0.3, bucket=0),
               AuctionRecord(e=0.8, b_s=0.0, b_star=1.0, b_c=1.0, bucket=0)]
    grid = [0.0, 0.5, 1.0, 2.0, 5.0]
    curves = brute_force_curves(records, 1.0, 0.0, 1.0, 1e6, 6.0, grid)
    assert curves.n_i.tolist() == [0.0, 0.0, 2.0, 6.0, 6.0]
    assert curves.c.tolist() == [0.0, 0.0, pytest.approx(0.8), pytest.approx(3.4),
                                 pytest.approx(3.4)]
    assert curves.n_a.tolist() == [0.0, 0.0, pytest.approx(1.0), pytest.approx(3.0),
                                   pytest.approx(3.0)]
    assert math.isnan(curves.v[0]) and math.isnan(curves.v[1])
    assert curves.v[2] == pytest.approx(0.8)
    assert curves.v[3] == pytest.approx(3.4 / 3.0)
    assert (curves.gain >= 0).all()


def test_brute_force_monotone_columns():
    day = generate_day(_spec(n_records=3000))
    grid = np.concatenate([[0.0], np.geomspace(1e-3, 5.0, 50)])
    curves = brute_force_curves(day.available, 0.9, 0.02, 4.0, 20.0,
                                3000.0, grid)
    assert (np.diff(curves.n_i) >= 0).all()
    assert (np.diff(curves.c) >= 0).all()
    assert (curves.n_i[:1] == 0).all() and (curves.c[:1] == 0).all()


def test_brute_force_matches_empirical_variant_exactly():
    rng = np.random.default_rng(40)
    for trial in range(20):
        n = int(rng.integers(3, 21))
        records = [AuctionRecord(e=float(rng.uniform(0, 1)), b_s=0.0,
                                 b_star=float(rng.lognormal(-0.8, 0.9)),
                                 b_c=float(rng.uniform(0.1, 2.0)),
                                 bucket=int(rng.integers(288)))
                   for _ in range(n)]
        theta1 = float(rng.uniform(0.3, 1.0))
        theta0 = float(rng.uniform(0.0, 0.2))
        g, b_max = 3.0, float(rng.uniform(0.5, 5.0))
        bid = BidModel(theta1, theta0, g, b_max, 1.0)
        erm = _erm()
        n_avail = float(2 * n)
        inp = ForecastInputs(records, bid, erm, n_avail)
        grid = np.concatenate([[0.0], np.geomspace(0.01, 4.0, 30)])
        curves = brute_force_curves(records, theta1, theta0, g, b_max,
                                    n_avail, grid)
        for j, u in enumerate(grid):
            assert curves.n_i[j] == empirical_impressions_at(inp, float(u))


def test_second_price_spend_bounded_by_total_competing():
    spec = _spec(cost_model="second_price_equal", n_records=1500)
    day = generate_day(spec)
    total = sum(r.b_star for r in day.observed)
    bid = BidModel(spec.true_theta1, spec.true_theta0, spec.g, spec.b_max,
                   spec.u_day)
    inp = ForecastInputs(day.observed, bid, _erm(), float(len(day.observed)))
    for u in (0.1, 0.5, 1.0, 10.0, 1e4):
        assert spend_at(inp, u) <= total + 1e-9


def test_roundtrip_curve_error_small_on_clean_line():
    spec = _spec(true_theta1=1.0, true_theta0=0.0, n_records=10_000, seed=2,
                 true_erm=_erm(means=(0.4,), stds=(0.06,), weights=(1.0,)))
    report = fit_and_forecast_roundtrip(spec, grid_points=60, k_max=2, seed=2)
    assert report.max_rel_error("n_i", min_truth=50.0) < 0.05
    assert report.n_available_true == 10_000.0
    assert report.erm_k == 1


def test_roundtrip_recovers_theta():
    spec = _spec(true_theta1=0.8, true_theta0=0.05, n_records=10_000,
                 true_erm=_erm(means=(0.4,), stds=(0.06,), weights=(1.0,)))
    report = fit_and_forecast_roundtrip(spec, grid_points=60, k_max=2, seed=0)
    assert abs(report.fitted_bid.theta1 - 0.8) < 0.01
    assert abs(report.fitted_bid.theta0 - 0.05) < 0.01
    d = report.to_dict()
    json.dumps(d)
    assert d["true_theta"] == [0.8, 0.05]


def test_roundtrip_deterministic():
    spec = _spec(n_records=2500)
    a = fit_and_forecast_roundtrip(spec, grid_points=40, k_max=2, seed=3)
    b = fit_and_forecast_roundtrip(spec, grid_points=40, k_max=2, seed=3)
    assert a.to_dict() == b.to_dict()


def test_write_truth(tmp_path):
    spec = _spec(n_records=500)
    day = generate_day(spec)
    path = tmp_path / "truth.json"
    write_truth(day, spec, path)
    doc = json.loads(path.read_text())
    assert doc["n_available"] == 500
    assert sum(doc["unthinned_counts"]) == 500
    assert doc["true_theta"] == [spec.true_theta1, spec.true_theta0]
    assert doc["u_day"] == spec.u_day
    assert doc["true_erm"] == spec.true_erm.to_dict()


def test_plant_spec_validation_and_roundtrip(tmp_path):
    with pytest.raises(ValueError):
        _spec(true_theta1=1.5)
    with pytest.raises(ValueError):
        _spec(bstar_scale=0.0)
    with pytest.raises(ValueError):
        _spec(n_records=0)
    with pytest.raises(ValueError):
        _spec(cost_model="first_price")
    with pytest.raises(ValueError):
        _spec(kappa=0.0)
    with pytest.raises(ValueError):
        _spec(pacing=np.ones(10))
    spec = _spec(cost_model="discounted", kappa=0.7)
    path = tmp_path / "plant.json"
    spec.save(path)
    back = PlantSpec.load(path)
    assert back.to_dict() == spec.to_dict()
    assert isinstance(generate_day(back), SimulatedDay)
