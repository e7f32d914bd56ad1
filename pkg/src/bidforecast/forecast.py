"""Control-response curves: impressions, spend, plant gain, conversions
and eCPA as functions of the control signal u.

Impressions and spend have closed forms — per-record survival of the
fitted event-rate mixture above the win threshold (b* + theta0) /
(theta1 * u * g). Plant gain is the exact u-derivative of the spend sum.
Conversions have no closed form and use a Monte Carlo event-rate sample,
drawn once per input set and reused across the whole grid so the curve
is smooth and monotone.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .bid_model import BidModel, bid_price, eligibility_cap, u_max
from .errors import EmptyRangeError
from .event_rate import EventRateModel, gmm_sample
from .ingest import AuctionRecord, to_arrays

GRID_LOW_FRACTION = 1e-4
GRID_OVERSHOOT = 1.05

CSV_HEADER = ("u", "n_impressions", "spend", "plant_gain", "n_conversions", "ecpa")

_REL_SLACK = 1e-9  # rounding allowance on analytically-monotone columns


@dataclass(frozen=True, eq=False)
class ForecastInputs:
    """Everything a per-line forecast needs: the day's (downsampled)
    auction records, the fitted bid transform and event-rate mixture, the
    normalized full-day auction count N, and the conversion-sampler seed.
    """

    records: Sequence[AuctionRecord]
    bid: BidModel
    erm: EventRateModel
    n_available: float
    seed: int = 0

    def __post_init__(self):
        if len(self.records) == 0:
            raise ValueError("records must be nonempty")
        if not (math.isfinite(self.n_available) and self.n_available > 0):
            raise ValueError(f"n_available must be finite and > 0, got {self.n_available!r}")
        e, _, b_star, b_c, _ = to_arrays(self.records)
        cap = eligibility_cap(self.bid)
        eligible = b_star < cap
        denom = self.bid.theta1 * self.bid.g
        # Threshold coefficient A_i: win at control u iff e > A_i / u.
        # Ineligible records never enter a sum, so the +inf placeholder is
        # only there to keep the array finite-free of divide warnings.
        with np.errstate(divide="ignore"):
            acoef = np.where(eligible & (denom > 0), (b_star + self.bid.theta0) / denom,
                             np.inf)
        object.__setattr__(self, "_e", e)
        object.__setattr__(self, "_b_star", b_star)
        object.__setattr__(self, "_b_c", b_c)
        object.__setattr__(self, "_eligible", eligible)
        object.__setattr__(self, "_acoef_eligible",
                           np.ascontiguousarray(acoef[eligible]))
        object.__setattr__(self, "_b_c_eligible",
                           np.ascontiguousarray(b_c[eligible]))
        object.__setattr__(self, "_e_sample",
                           gmm_sample(self.erm, len(self.records), self.seed))

    @property
    def scale(self) -> float:
        """N / N': full-day availability per logged record."""
        return self.n_available / len(self.records)


def _terms(inp: ForecastInputs, u: float) -> tuple[float, float, float]:
    if len(inp._acoef_eligible) == 0:
        return 0.0, 0.0, 0.0
    return kernels.curve_terms(inp._acoef_eligible, inp._b_c_eligible,
                               inp.erm.weights, inp.erm.means, inp.erm.stds, u)


def impressions_at(inp: ForecastInputs, u: float) -> float:
    """Expected impressions won per day at control u."""
    if u < 0:
        raise ValueError(f"u must be >= 0, got {u}")
    if u == 0.0:
        return 0.0
    surv_sum, _, _ = _terms(inp, u)
    return inp.scale * surv_sum


def spend_at(inp: ForecastInputs, u: float) -> float:
    """Expected advertiser spend per day at control u."""
    if u < 0:
        raise ValueError(f"u must be >= 0, got {u}")
    if u == 0.0:
        return 0.0
    _, spend_sum, _ = _terms(inp, u)
    return inp.scale * spend_sum


def plant_gain_at(inp: ForecastInputs, u: float) -> float:
    """d(spend)/du at control u — the sensitivity a feedback controller
    needs. Continuously extended to 0 at u = 0."""
    if u < 0:
        raise ValueError(f"u must be >= 0, got {u}")
    if u == 0.0:
        return 0.0
    _, _, gain_sum = _terms(inp, u)
    return inp.scale * gain_sum / (u * u)


def conversions_at(inp: ForecastInputs, u: float) -> float:
    """Expected conversions per day at control u, via the fixed per-input
    event-rate sample paired with records in order."""
    if u < 0:
        raise ValueError(f"u must be >= 0, got {u}")
    if u == 0.0:
        return 0.0
    es = inp._e_sample
    won = bid_price(inp.bid, es, u) >= inp._b_star
    return inp.scale * float(es[won].sum())


def ecpa_at(inp: ForecastInputs, u: float) -> float:
    """Spend per conversion at control u; NaN marks the undefined case
    (zero conversions), which serializes to an absent value."""
    n_a = conversions_at(inp, u)
    if n_a == 0.0:
        return math.nan
    return spend_at(inp, u) / n_a


@dataclass(frozen=True, eq=False)
class ResponseCurves:
    """Forecast metrics tabulated over an ascending control grid. ``v``
    (eCPA) is NaN where conversions are zero."""

    grid: np.ndarray
    n_i: np.ndarray
    c: np.ndarray
    gain: np.ndarray
    n_a: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        cols = {}
        for name in ("grid", "n_i", "c", "gain", "n_a", "v"):
            cols[name] = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, cols[name])
        m = len(cols["grid"])
        if m == 0 or any(len(a) != m for a in cols.values()):
            raise ValueError("all columns must share one nonempty length")
        g = cols["grid"]
        if not np.isfinite(g).all() or (g < 0).any() or (np.diff(g) <= 0).any():
            raise ValueError("grid must be finite, >= 0 and strictly ascending")
        for name in ("n_i", "c", "gain", "n_a"):
            a = cols[name]
            if not np.isfinite(a).all() or (a < 0).any():
                raise ValueError(f"{name} must be finite and >= 0")
        vv = cols["v"]
        if (vv[~np.isnan(vv)] < 0).any():
            raise ValueError("v must be >= 0 where defined")
        for name in ("n_i", "c"):
            a = cols[name]
            slack = _REL_SLACK * (1.0 + np.abs(a[:-1]))
            if (np.diff(a) < -slack).any():
                raise ValueError(f"{name} must be nondecreasing along the grid")

    def __len__(self) -> int:
        return len(self.grid)

    def to_dict(self) -> dict:
        v = [None if math.isnan(x) else x for x in self.v.tolist()]
        return {"u": self.grid.tolist(), "n_impressions": self.n_i.tolist(),
                "spend": self.c.tolist(), "plant_gain": self.gain.tolist(),
                "n_conversions": self.n_a.tolist(), "ecpa": v}

    @classmethod
    def from_dict(cls, d: dict) -> "ResponseCurves":
        v = np.array([math.nan if x is None else float(x) for x in d["ecpa"]])
        return cls(np.asarray(d["u"]), np.asarray(d["n_impressions"]),
                   np.asarray(d["spend"]), np.asarray(d["plant_gain"]),
                   np.asarray(d["n_conversions"]), v)

    def save_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load_json(cls, path: str | Path) -> "ResponseCurves":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def save_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for j in range(len(self)):
                v = self.v[j]
                w.writerow([repr(float(self.grid[j])), repr(float(self.n_i[j])),
                            repr(float(self.c[j])), repr(float(self.gain[j])),
                            repr(float(self.n_a[j])),
                            "" if math.isnan(v) else repr(float(v))])

    @classmethod
    def load_csv(cls, path: str | Path) -> "ResponseCurves":
        cols = {name: [] for name in CSV_HEADER}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != list(CSV_HEADER):
                raise ValueError(f"unexpected CSV header: {reader.fieldnames}")
            for row in reader:
                for name in CSV_HEADER:
                    raw = row[name]
                    cols[name].append(math.nan if raw == "" else float(raw))
        return cls(np.array(cols["u"]), np.array(cols["n_impressions"]),
                   np.array(cols["spend"]), np.array(cols["plant_gain"]),
                   np.array(cols["n_conversions"]), np.array(cols["ecpa"]))


def control_grid(inp: ForecastInputs, grid_points: int) -> np.ndarray:
    """{0} followed by grid_points log-spaced values reaching 5% past the
    largest per-record win threshold."""
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    top = u_max(inp.bid, inp.records)
    if top <= 0.0:
        raise EmptyRangeError("every eligible record is free: win-threshold range is empty")
    pts = np.geomspace(top * GRID_LOW_FRACTION, top * GRID_OVERSHOOT, grid_points)
    return np.concatenate(([0.0], pts))


def build_response_curves(inp: ForecastInputs, grid_points: int = 200) -> ResponseCurves:
    """Evaluate all five metrics over the standard control grid."""
    grid = control_grid(inp, grid_points)
    n = len(grid)
    n_i = np.zeros(n)
    c = np.zeros(n)
    gain = np.zeros(n)
    n_a = np.zeros(n)
    v = np.full(n, math.nan)
    scale = inp.scale
    for j in range(1, n):
        u = float(grid[j])
        surv_sum, spend_sum, gain_sum = _terms(inp, u)
        n_i[j] = scale * surv_sum
        c[j] = scale * spend_sum
        gain[j] = scale * gain_sum / (u * u)
        n_a[j] = conversions_at(inp, u)
        if n_a[j] > 0.0:
            v[j] = c[j] / n_a[j]
    return ResponseCurves(grid, n_i, c, gain, n_a, v)


def empirical_impressions_at(inp: ForecastInputs, u: float) -> float:
    """impressions_at with the fitted mixture replaced by the empirical
    distribution of the logged event rates: a direct win count."""
    if u < 0:
        raise ValueError(f"u must be >= 0, got {u}")
    if u == 0.0:
        return 0.0
    won = inp._eligible & (bid_price(inp.bid, inp._e, u) > inp._b_star)
    return inp.scale * float(won.sum())


def empirical_spend_at(inp: ForecastInputs, u: float) -> float:
    """spend_at under the empirical event-rate distribution."""
    if u < 0:
        raise ValueError(f"u must be >= 0, got {u}")
    if u == 0.0:
        return 0.0
    won = inp._eligible & (bid_price(inp.bid, inp._e, u) > inp._b_star)
    return inp.scale * float(inp._b_c[won].sum())


def resampled_curves(inp: ForecastInputs, grid: Sequence[float],
                     n_samples: int = 2_000_000, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Numerical cross-check of the analytic impressions/spend curves:
    draw a fresh pool of event rates from the fitted mixture and count
    per-record wins directly against each record's threshold.

    Returns (n_I, c) over ``grid``. Draws are raw mixture variates
    (unclamped) because the analytic path integrates the unclamped CDF.
    """
    rng = np.random.default_rng(seed)
    erm = inp.erm
    comp = rng.choice(erm.k, size=n_samples, p=erm.weights)
    pool = np.sort(rng.normal(erm.means[comp], erm.stds[comp]))
    acoef = inp._acoef_eligible
    bc = inp._b_c_eligible
    n_i = np.zeros(len(grid))
    c = np.zeros(len(grid))
    for j, u in enumerate(grid):
        if u <= 0.0 or len(acoef) == 0:
            continue
        thresholds = acoef / u
        win_frac = (n_samples - np.searchsorted(pool, thresholds, side="right")) / n_samples
        n_i[j] = inp.scale * float(win_frac.sum())
        c[j] = inp.scale * float(win_frac @ bc)
    return n_i, c


def spend_ecpa_profile(curves: ResponseCurves) -> list[tuple[float, float]]:
    """(spend, eCPA) pairs over the grid points where eCPA is defined,
    ascending in spend. Empty when conversions are zero everywhere."""
    defined = ~np.isnan(curves.v)
    pairs = list(zip(curves.c[defined].tolist(), curves.v[defined].tolist()))
    pairs.sort(key=lambda p: p[0])
    return pairs


def spend_at_goal(curves: ResponseCurves, g: float) -> float:
    """Largest attainable daily spend with eCPA still at or under the goal
    amount, interpolating linearly between profile points at the crossing.
    0 when even the cheapest defined point exceeds the goal."""
    if g <= 0:
        raise ValueError(f"goal must be > 0, got {g}")
    pairs = spend_ecpa_profile(curves)
    for j in range(len(pairs) - 1, -1, -1):
        spend, v = pairs[j]
        if v <= g:
            if j + 1 < len(pairs):
                s2, v2 = pairs[j + 1]
                return spend + (s2 - spend) * (g - v) / (v2 - v)
            return spend
    return 0.0
