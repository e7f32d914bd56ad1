"""Production bid transformation: fit, evaluate, invert, and bound it.

The platform bids theta1 * min(u * g * e, b_max) - theta0: a value bid
proportional to control signal, goal amount and event rate, capped at the
advertiser max bid, then shaved by line-level fees. The affine
coefficients are recovered from one day of (event rate, internal score)
pairs by box-constrained least squares.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyRangeError, InsufficientDataError
from .ingest import AuctionRecord

THETA_LOW = 0.0
THETA_HIGH = 1.0


@dataclass(frozen=True, slots=True)
class BidModel:
    """Fitted bid transformation plus the line economics it depends on."""

    theta1: float
    theta0: float
    g: float
    b_max: float
    u_train: float

    def __post_init__(self):
        if not (THETA_LOW <= self.theta1 <= THETA_HIGH
                and THETA_LOW <= self.theta0 <= THETA_HIGH):
            raise ValueError(f"theta must lie in [0, 1]^2, got "
                             f"({self.theta1!r}, {self.theta0!r})")
        for name in ("g", "b_max", "u_train"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "BidModel":
        return cls(float(d["theta1"]), float(d["theta0"]), float(d["g"]),
                   float(d["b_max"]), float(d["u_train"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "BidModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def bid_price(m: BidModel, e, u):
    """Submitted bid for event rate ``e`` under control ``u``. Accepts
    scalars or arrays; nondecreasing in both arguments."""
    return m.theta1 * np.minimum(u * m.g * e, m.b_max) - m.theta0


def inverse_bid(m: BidModel, b_star: float, u: float) -> float:
    """Smallest event rate whose uncapped bid beats ``b_star`` at control
    ``u``. May exceed 1; +inf when u or theta1 is zero (nothing winnable)."""
    denom = m.theta1 * u * m.g
    if denom <= 0.0:
        return math.inf
    return (b_star + m.theta0) / denom

def eligibility_cap(m: BidModel) -> float:
    """Highest bid the line can ever submit. Impressions whose competing
    bid is at or above this are unwinnable at any control value."""
    return m.theta1 * m.b_max - m.theta0


def u_max(m: BidModel, records: Sequence[AuctionRecord]) -> float:
    """Control value above which every eligible impression is won in the
    uncapped branch: the largest per-record inversion of the bid rule."""
    cap = eligibility_cap(m)
    if m.theta1 <= 0.0:
        raise EmptyRangeError("theta1 = 0: no impression winnable at any control")
    best = -math.inf
    n_eligible = 0
    for r in records:
        if r.b_star >= cap:
            continue
        n_eligible += 1
        if r.e > 0.0:
            best = max(best, (r.b_star + m.theta0) / (m.theta1 * m.g * r.e))
    if n_eligible == 0:
        raise EmptyRangeError("no record has a competing bid below the eligibility cap")
    if not math.isfinite(best):
        raise EmptyRangeError("all eligible records have zero event rate")
    return best


def fit_bid_params(pairs: Sequence[tuple[float, float]], g: float, b_max: float,
                   u_train: float) -> BidModel:
    """Recover (theta1, theta0) from (event rate, internal score) pairs.

    Minimizes 0.5 * sum((theta1 * x_i - theta0 - b_s_i)^2) with
    x_i = min(u_train * g * e_i, b_max) over the box [0, 1]^2. The box
    keeps noisy days from producing absurd fee estimates. Solved exactly:
    the unconstrained 2x2 normal equations, falling back to the four
    edge-restricted 1-D optima when the interior solution leaves the box.
    """
    if len(pairs) < 2:
        raise InsufficientDataError(f"need >= 2 pairs to fit, got {len(pairs)}")
    e = np.asarray([p[0] for p in pairs], dtype=np.float64)
    y = np.asarray([p[1] for p in pairs], dtype=np.float64)
    x = np.minimum(u_train * g * e, b_max)

    if x.min() == x.max():
        # Degenerate design (e.g. every bid capped): only the slope through
        # the common point is identifiable.
        xv = float(x[0])
        theta1 = float(np.clip(y.mean() / xv, THETA_LOW, THETA_HIGH)) if xv > 0 else 1.0
        return BidModel(theta1, 0.0, g, b_max, u_train)

    n = float(len(x))
    sxx = float(x @ x)
    sx = float(x.sum())
    sy = float(y.sum())
    sxy = float(x @ y)

    def objective(t1: float, t0: float) -> float:
        r = t1 * x - t0 - y
        return 0.5 * float(r @ r)

    # Interior stationary point of the convex objective.
    det = sx * sx - n * sxx
    t1 = (sx * sy - n * sxy) / det
    t0 = (t1 * sx - sy) / n
    if THETA_LOW <= t1 <= THETA_HIGH and THETA_LOW <= t0 <= THETA_HIGH:
        return BidModel(t1, t0, g, b_max, u_train)

    candidates = []
    for t1_fixed in (THETA_LOW, THETA_HIGH):
        t0_edge = float(np.clip((t1_fixed * sx - sy) / n, THETA_LOW, THETA_HIGH))
        candidates.append((t1_fixed, t0_edge))
    for t0_fixed in (THETA_LOW, THETA_HIGH):
        t1_edge = float(np.clip((sxy + t0_fixed * sx) / sxx, THETA_LOW, THETA_HIGH))
        candidates.append((t1_edge, t0_fixed))
    t1, t0 = min(candidates, key=lambda c: objective(*c))
    return BidModel(t1, t0, g, b_max, u_train)
