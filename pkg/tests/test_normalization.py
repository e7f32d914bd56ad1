"""Day-level impression normalization: pacing correction, time-of-day
shares, and the extrapolated full-day available count."""

import json
import math

import numpy as np
import pytest

from bidforecast import (FLAT_TOD, EmptyActivityError, InvalidTodError,
                         TodModel, bucket_share, bucket_shares, pacing_adjust,
                         tod_height, total_available)


def test_tod_height_examples():
    assert tod_height(FLAT_TOD, 3.0) == 0.0
    assert tod_height(FLAT_TOD, 17.5) == 0.0
    m = TodModel(0.2, 0.0, 0.0, 0.0)
    assert tod_height(m, 6.0) == pytest.approx(0.2, abs=1e-15)
    m2 = TodModel(0.1, 0.3, 0.25, -1.1)
    t = 13.4
    expected = 0.1 * math.sin(2 * math.pi * t / 24 + 0.3) \
        + 0.25 * math.sin(4 * math.pi * t / 24 - 1.1)
    assert tod_height(m2, t) == pytest.approx(expected, abs=1e-15)


def test_tod_height_zero_mean_over_full_period():
    rng = np.random.default_rng(9)
    grid = np.arange(1440) / 60.0
    for _ in range(20):
        m = TodModel(float(rng.uniform(-0.4, 0.4)), float(rng.uniform(-3, 3)),
                     float(rng.uniform(-0.4, 0.4)), float(rng.uniform(-3, 3)))
        vals = np.array([tod_height(m, float(t)) for t in grid])
        assert abs(vals.mean()) < 1e-9


def test_tod_model_rejects_nonpositive_profile():
    with pytest.raises(InvalidTodError):
        TodModel(1.5, 0.0, 0.0, 0.0)  # 1 + h dips to -0.5
    with pytest.raises(InvalidTodError):
        TodModel(float("nan"), 0.0, 0.0, 0.0)
    TodModel(0.99, 0.0, 0.0, 0.0)  # stays positive


def test_bucket_share_flat_is_uniform():
    shares = bucket_shares(FLAT_TOD)
    assert shares.shape == (288,)
    assert (shares == 1.0 / 288).all()
    assert bucket_share(FLAT_TOD, 0) == 1.0 / 288
    assert bucket_share(FLAT_TOD, 287) == 1.0 / 288


def test_bucket_share_peak_follows_sine():
    m = TodModel(0.2, 0.0, 0.0, 0.0)
    # sin peaks at t=6h (bucket 72), troughs at t=18h (bucket 216)
    assert bucket_share(m, 72) > bucket_share(m, 216)
    assert bucket_share(m, 71) > 1.0 / 288 > bucket_share(m, 215)


def test_bucket_shares_sum_to_exactly_one():
    rng = np.random.default_rng(10)
    for _ in range(20):
        m = TodModel(float(rng.uniform(-0.3, 0.3)), float(rng.uniform(-3, 3)),
                     float(rng.uniform(-0.3, 0.3)), float(rng.uniform(-3, 3)))
        assert abs(bucket_shares(m).sum() - 1.0) <= 1e-12
    with pytest.raises(ValueError):
        bucket_share(FLAT_TOD, 288)


def test_pacing_adjust_examples():
    counts = np.zeros(288)
    pacing = np.ones(288)
    counts[5] = 100.0
    adjusted, active = pacing_adjust(counts, pacing)
    assert adjusted[5] == 100.0
    assert active.all()

    pacing[5] = 0.25
    adjusted, _ = pacing_adjust(counts, pacing)
    assert adjusted[5] == 200.0

    pacing[5] = 0.0
    counts[5] = 0.0
    adjusted, active = pacing_adjust(counts, pacing)
    assert not active[5]
    assert adjusted[5] == 0.0


def test_pacing_adjust_identity_when_unthrottled():
    rng = np.random.default_rng(14)
    counts = rng.integers(0, 500, 288).astype(float)
    adjusted, active = pacing_adjust(counts, np.ones(288))
    assert (adjusted == counts).all()
    assert active.all()


def test_pacing_adjust_warns_on_counts_in_dead_bucket():
    counts = np.zeros(288)
    counts[3] = 7.0
    pacing = np.ones(288)
    pacing[3] = 0.0
    with pytest.warns(UserWarning):
        adjusted, active = pacing_adjust(counts, pacing)
    assert not active[3]
    assert adjusted[3] == 0.0


def test_pacing_adjust_validates_lengths():
    with pytest.raises(ValueError):
        pacing_adjust(np.zeros(100), np.ones(288))
    with pytest.raises(ValueError):
        pacing_adjust(np.zeros(288), np.full(288, 1.5))


def test_total_available_full_activity_exact():
    counts = np.full(288, 100.0)
    assert total_available(counts, np.ones(288), FLAT_TOD, 4.0, 1.0) == 115200.0


def test_total_available_half_day_exact():
    counts = np.zeros(288)
    counts[:144] = 100.0
    pacing = np.zeros(288)
    pacing[:144] = 1.0
    assert total_available(counts, pacing, FLAT_TOD, 4.0, 1.0) == 115200.0
    # Same answer from the other half: extrapolation consistency.
    counts2 = np.zeros(288)
    counts2[144:] = 100.0
    pacing2 = np.zeros(288)
    pacing2[144:] = 1.0
    assert total_available(counts2, pacing2, FLAT_TOD, 4.0, 1.0) == 115200.0


def test_total_available_pacing_adjusted_exact():
    counts = np.full(288, 100.0)
    pacing = np.full(288, 0.25)
    assert total_available(counts, pacing, FLAT_TOD, 4.0, 1.0) == 230400.0


def test_total_available_scales_in_factor_and_win_rate():
    rng = np.random.default_rng(15)
    counts = rng.integers(1, 300, 288).astype(float)
    pacing = rng.uniform(0.1, 1.0, 288)
    tod = TodModel(0.15, 0.4, 0.1, -0.2)
    base = total_available(counts, pacing, tod, 1.0, 1.0)
    assert total_available(counts, pacing, tod, 4.0, 1.0) == pytest.approx(4 * base, rel=1e-12)
    assert total_available(counts, pacing, tod, 1.0, 0.5) == pytest.approx(0.5 * base, rel=1e-12)
    assert total_available(counts, pacing, tod, 2.0, 0.25) == pytest.approx(0.5 * base, rel=1e-12)


def test_total_available_requires_activity():
    with pytest.raises(EmptyActivityError):
        total_available(np.zeros(288), np.zeros(288), FLAT_TOD, 4.0, 1.0)


def test_tod_model_json_roundtrip(tmp_path):
    m = TodModel(0.12, 0.5, -0.08, 1.2)
    d = json.loads(json.dumps(m.to_dict()))
    back = TodModel.from_dict(d)
    assert back == m
    assert set(d) == {"beta1", "phi1", "beta2", "phi2"}
