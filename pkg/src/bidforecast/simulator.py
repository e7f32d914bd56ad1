"""Synthetic auction plants with known ground truth.

A plant is a joint distribution over (event rate, highest competing bid,
advertiser cost) plus the line economics that turn event rates into bids.
Generated days feed the fitting/forecasting pipeline; the same generator
keeps the full pre-thinning sample so brute-force curves — direct win
counting against each record, no mixture CDFs, no shared kernels — serve
as an independent oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .bid_model import BidModel, fit_bid_params
from .config import LineConfig
from .event_rate import EventRateModel, gmm_sample, select_k_bic
from .forecast import ForecastInputs, ResponseCurves, build_response_curves
from .ingest import BUCKETS_PER_DAY, AuctionRecord, bucket_counts, to_arrays
from .normalization import FLAT_TOD, TodModel, bucket_shares, total_available

COST_MODELS = ("second_price_equal", "discounted")


@dataclass(frozen=True, eq=False)
class PlantSpec:
    """Ground-truth description of one synthetic line-day."""

    true_erm: EventRateModel
    bstar_location: float  # log-normal parameters of the competing bid
    bstar_scale: float
    true_theta1: float
    true_theta0: float
    g: float
    b_max: float
    u_day: float
    n_records: int
    pacing: np.ndarray
    tod: TodModel = FLAT_TOD
    cost_model: str = "second_price_equal"
    kappa: float = 1.0
    log_sampling_factor: float = 1.0
    line_id: str = "sim"
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.bstar_location) and self.bstar_scale > 0):
            raise ValueError("b* distribution needs finite location and scale > 0")
        if not (0.0 <= self.true_theta1 <= 1.0 and 0.0 <= self.true_theta0 <= 1.0):
            raise ValueError("true theta must lie in [0, 1]^2")
        for name in ("g", "b_max", "u_day"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.n_records < 1:
            raise ValueError(f"n_records must be >= 1, got {self.n_records}")
        if self.cost_model not in COST_MODELS:
            raise ValueError(f"cost_model must be one of {COST_MODELS}")
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError(f"kappa must be in (0, 1], got {self.kappa}")
        if self.log_sampling_factor < 1.0:
            raise ValueError("log_sampling_factor must be >= 1")
        a = np.asarray(self.pacing, dtype=np.float64)
        if a.shape != (BUCKETS_PER_DAY,) or ((a < 0) | (a > 1)).any():
            raise ValueError(f"pacing must be {BUCKETS_PER_DAY} rates in [0, 1]")
        object.__setattr__(self, "pacing", a)

    def to_dict(self) -> dict:
        return {"true_erm": self.true_erm.to_dict(),
                "bstar_dist": {"location": self.bstar_location, "scale": self.bstar_scale},
                "true_theta": [self.true_theta1, self.true_theta0],
                "g": self.g, "b_max": self.b_max, "u_day": self.u_day,
                "n_records": self.n_records, "pacing": self.pacing.tolist(),
                "tod": self.tod.to_dict(), "cost_model": self.cost_model,
                "kappa": self.kappa, "log_sampling_factor": self.log_sampling_factor,
                "line_id": self.line_id, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "PlantSpec":
        return cls(true_erm=EventRateModel.from_dict(d["true_erm"]),
                   bstar_location=float(d["bstar_dist"]["location"]),
                   bstar_scale=float(d["bstar_dist"]["scale"]),
                   true_theta1=float(d["true_theta"][0]),
                   true_theta0=float(d["true_theta"][1]),
                   g=float(d["g"]), b_max=float(d["b_max"]), u_day=float(d["u_day"]),
                   n_records=int(d["n_records"]),
                   pacing=np.asarray(d["pacing"], dtype=np.float64),
                   tod=TodModel.from_dict(d["tod"]) if "tod" in d else FLAT_TOD,
                   cost_model=str(d.get("cost_model", "second_price_equal")),
                   kappa=float(d.get("kappa", 1.0)),
                   log_sampling_factor=float(d.get("log_sampling_factor", 1.0)),
                   line_id=str(d.get("line_id", "sim")), seed=int(d.get("seed", 0)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "PlantSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True, eq=False)
class SimulatedDay:
    """One generated day: the log the pipeline sees plus the truth it
    does not."""

    observed: list[AuctionRecord]   # post pacing + log-sampling thinning
    config: LineConfig
    available: list[AuctionRecord]  # every generated auction, pre-thinning
    unthinned_counts: np.ndarray    # per-bucket available count
    u_day: float

    @property
    def observed_counts(self) -> np.ndarray:
        return bucket_counts(self.observed)


def generate_day(spec: PlantSpec) -> SimulatedDay:
    """Draw one day from the plant. Deterministic given spec.seed."""
    n = spec.n_records
    rng = np.random.default_rng(spec.seed)
    e = gmm_sample(spec.true_erm, n, rng)
    b_star = rng.lognormal(spec.bstar_location, spec.bstar_scale, n)
    b_c = b_star if spec.cost_model == "second_price_equal" else spec.kappa * b_star
    b_s = spec.true_theta1 * np.minimum(spec.u_day * spec.g * e, spec.b_max) - spec.true_theta0
    bucket = rng.choice(BUCKETS_PER_DAY, size=n, p=bucket_shares(spec.tod))
    unthinned = np.bincount(bucket, minlength=BUCKETS_PER_DAY)

    keep = rng.random(n) < spec.pacing[bucket]
    if spec.log_sampling_factor > 1.0:
        keep &= rng.random(n) < 1.0 / spec.log_sampling_factor

    available = [AuctionRecord(e=float(e[i]), b_s=float(b_s[i]), b_star=float(b_star[i]),
                               b_c=float(b_c[i]), bucket=int(bucket[i]))
                 for i in range(n)]
    observed = [available[i] for i in np.flatnonzero(keep)]
    config = LineConfig(line_id=spec.line_id, g=spec.g, b_max=spec.b_max,
                        u_train=spec.u_day, pacing=spec.pacing, tod=spec.tod,
                        log_sampling_factor=spec.log_sampling_factor)
    return SimulatedDay(observed=observed, config=config, available=available,
                        unthinned_counts=unthinned, u_day=spec.u_day)


def write_truth(day: SimulatedDay, spec: PlantSpec, path: str | Path) -> None:
    """Ground-truth sidecar for scoring: unthinned totals plus the plant
    parameters a fitted pipeline is trying to recover."""
    doc = {"n_available": spec.n_records,
           "unthinned_counts": day.unthinned_counts.tolist(),
           "true_theta": [spec.true_theta1, spec.true_theta0],
           "true_erm": spec.true_erm.to_dict(), "u_day": spec.u_day}
    Path(path).write_text(json.dumps(doc, indent=2), encoding="utf-8")


def brute_force_curves(records: Sequence[AuctionRecord], theta1: float, theta0: float,
                       g: float, b_max: float, n_available: float,
                       grid: Sequence[float]) -> ResponseCurves:
    """Ground-truth curves by direct enumeration: one pass per grid point
    counting f(e_i, u) > b*_i wins and summing costs and event rates over
    the winners. The derivative column is a central difference of spend.
    """
    if len(records) == 0 or len(grid) == 0:
        raise ValueError("records and grid must be nonempty")
    e, _, b_star, b_c, _ = to_arrays(records)
    grid = np.asarray(grid, dtype=np.float64)
    scale = n_available / len(records)
    n_i = np.zeros(len(grid))
    c = np.zeros(len(grid))
    n_a = np.zeros(len(grid))
    v = np.full(len(grid), math.nan)
    for j, u in enumerate(grid):
        if u <= 0.0:
            continue
        won = theta1 * np.minimum(u * g * e, b_max) - theta0 > b_star
        n_i[j] = scale * float(won.sum())
        c[j] = scale * float(b_c[won].sum())
        n_a[j] = scale * float(e[won].sum())
        if n_a[j] > 0.0:
            v[j] = c[j] / n_a[j]
    gain = _central_differences(grid, c)
    return ResponseCurves(grid, n_i, c, gain, n_a, v)


def _central_differences(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Second-order derivative estimate on a nonuniform grid, written as a
    convex combination of the two one-sided secants so a nondecreasing f
    yields a nonnegative result exactly, including in float arithmetic."""
    if len(x) < 2:
        return np.zeros(len(x))
    dx = np.diff(x)
    s = np.diff(f) / dx
    out = np.empty_like(f)
    out[0] = s[0]
    out[-1] = s[-1]
    out[1:-1] = (dx[1:] * s[:-1] + dx[:-1] * s[1:]) / (dx[:-1] + dx[1:])
    return out


@dataclass(frozen=True, eq=False)
class RoundtripReport:
    """Pipeline-vs-truth comparison for one synthetic line."""

    fitted_bid: BidModel
    true_theta: tuple[float, float]
    erm_k: int
    n_available_estimate: float
    n_available_true: float
    curves: ResponseCurves
    truth: ResponseCurves

    def rel_errors(self, metric: str = "n_i", min_truth: float = 0.0) -> np.ndarray:
        """|pipeline - truth| / truth per grid point; NaN where the truth
        column does not exceed ``min_truth``."""
        got = getattr(self.curves, metric)
        want = getattr(self.truth, metric)
        out = np.full(len(got), math.nan)
        mask = want > max(min_truth, 0.0)
        out[mask] = np.abs(got[mask] - want[mask]) / want[mask]
        return out

    def max_rel_error(self, metric: str = "n_i", min_truth: float = 50.0) -> float:
        errs = self.rel_errors(metric, min_truth)
        errs = errs[~np.isnan(errs)]
        return float(errs.max()) if len(errs) else math.nan

    def to_dict(self) -> dict:
        return {"fitted_theta": [self.fitted_bid.theta1, self.fitted_bid.theta0],
                "true_theta": list(self.true_theta), "erm_k": self.erm_k,
                "n_available_estimate": self.n_available_estimate,
                "n_available_true": self.n_available_true,
                "max_rel_error_n_i": self.max_rel_error("n_i"),
                "max_rel_error_spend": self.max_rel_error("c"),
                "curves": self.curves.to_dict(), "truth": self.truth.to_dict()}


def fit_and_forecast_roundtrip(spec: PlantSpec, grid_points: int = 200,
                               k_max: int = 5, seed: int = 0) -> RoundtripReport:
    """Run the full pipeline on one generated day and score it against
    the brute-force truth on the same grid."""
    day = generate_day(spec)
    obs = day.observed
    if len(obs) == 0:
        raise ValueError("thinning removed every record; raise n_records or pacing")
    e, b_s, _, _, _ = to_arrays(obs)
    bid = fit_bid_params(list(zip(e.tolist(), b_s.tolist())), spec.g, spec.b_max,
                         day.u_day)
    erm, _ = select_k_bic(e, k_max=k_max, seed=seed)
    n_hat = total_available(day.observed_counts, spec.pacing, spec.tod,
                            day.config.log_sampling_factor)
    inputs = ForecastInputs(obs, bid, erm, n_hat, seed=seed)
    curves = build_response_curves(inputs, grid_points)
    truth = brute_force_curves(day.available, spec.true_theta1, spec.true_theta0,
                               spec.g, spec.b_max, spec.n_records, curves.grid)
    return RoundtripReport(fitted_bid=bid, true_theta=(spec.true_theta1, spec.true_theta0),
                           erm_k=erm.k, n_available_estimate=n_hat,
                           n_available_true=float(spec.n_records),
                           curves=curves, truth=truth)
