"""Volume normalization: undo log sampling, pacing throttling, and
time-of-day skew to recover the full-day auction opportunity count.

Logs are sampled (one in ``factor`` auctions recorded), throttled by a
per-bucket pacing rate, and cover only the buckets where the line was
active. Each effect is inverted in turn; time-of-day structure comes from
a two-harmonic sinusoid fitted upstream on exchange-wide traffic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyActivityError, InvalidTodError
from .ingest import BUCKETS_PER_DAY


@dataclass(frozen=True, slots=True)
class TodModel:
    """Two-harmonic time-of-day profile h(t) over the 24-hour clock:

        h(t) = beta1*sin(2*pi*t/24 + phi1) + beta2*sin(4*pi*t/24 + phi2)

    Bucket shares are proportional to 1 + h(t); the profile must keep
    1 + h(t) positive everywhere, checked on a 1-minute grid.
    """

    beta1: float
    phi1: float
    beta2: float
    phi2: float

    def __post_init__(self):
        for name in ("beta1", "phi1", "beta2", "phi2"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidTodError(f"{name} must be finite, got {v!r}")
        minutes = np.arange(24 * 60) / 60.0
        if (1.0 + tod_height(self, minutes) <= 0.0).any():
            raise InvalidTodError("1 + h(t) must be positive over the full day")

    def to_dict(self) -> dict:
        return {"beta1": self.beta1, "phi1": self.phi1,
                "beta2": self.beta2, "phi2": self.phi2}

    @classmethod
    def from_dict(cls, d: dict) -> "TodModel":
        return cls(float(d["beta1"]), float(d["phi1"]),
                   float(d["beta2"]), float(d["phi2"]))


def tod_height(m: TodModel, t):
    """h(t) for t in hours (scalar or array)."""
    t = np.asarray(t, dtype=np.float64)
    h = (m.beta1 * np.sin(2.0 * np.pi * t / 24.0 + m.phi1)
         + m.beta2 * np.sin(4.0 * np.pi * t / 24.0 + m.phi2))
    return float(h) if h.ndim == 0 else h


#: Flat profile: every bucket carries equal traffic.
FLAT_TOD = TodModel(0.0, 0.0, 0.0, 0.0)


def _raw_weights(m: TodModel) -> np.ndarray:
    # Bucket j covers [j, j+1) five-minute slots; evaluate at the midpoint.
    mid_hours = (np.arange(BUCKETS_PER_DAY) + 0.5) * (24.0 / BUCKETS_PER_DAY)
    raw = 1.0 + tod_height(m, mid_hours)
    if (raw <= 0.0).any():
        raise InvalidTodError("1 + h(t) must be positive at every bucket midpoint")
    return raw


def bucket_shares(m: TodModel) -> np.ndarray:
    """Fraction of daily traffic in each 5-minute bucket (sums to 1)."""
    raw = _raw_weights(m)
    return raw / raw.sum()


def bucket_share(m: TodModel, j: int) -> float:
    if not 0 <= j < BUCKETS_PER_DAY:
        raise ValueError(f"bucket must be in [0, {BUCKETS_PER_DAY}), got {j}")
    return float(bucket_shares(m)[j])


def pacing_adjust(counts: Sequence[float], pacing: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Correct per-bucket record counts for pacing throttling.

    A bucket paced at rate a sees only a of the traffic it would win
    unthrottled, and the throttled competition shifts the observed price
    distribution; the net correction divides the count by sqrt(a).
    Returns (adjusted counts, active-bucket mask); a = 0 marks the bucket
    inactive and drops its count.
    """
    n = np.asarray(counts, dtype=np.float64)
    a = np.asarray(pacing, dtype=np.float64)
    if n.shape != (BUCKETS_PER_DAY,) or a.shape != (BUCKETS_PER_DAY,):
        raise ValueError(f"counts and pacing must have shape ({BUCKETS_PER_DAY},)")
    if (n < 0).any():
        raise ValueError("counts must be >= 0")
    if ((a < 0) | (a > 1)).any() or not np.isfinite(a).all():
        raise ValueError("pacing rates must lie in [0, 1]")
    active = a > 0.0
    if (n[~active] > 0).any():
        warnings.warn("records observed in buckets with pacing 0; treating them as inactive",
                      stacklevel=2)
    adjusted = np.zeros_like(n)
    adjusted[active] = n[active] / np.sqrt(a[active])
    return adjusted, active


def total_available(counts: Sequence[float], pacing: Sequence[float], tod: TodModel,
                    log_sampling_factor: float, external_win_rate: float = 1.0) -> float:
    """Full-day auction opportunity count N.

    Scales the pacing-adjusted in-log counts by the log sampling factor,
    extrapolates from active buckets to the whole day via the time-of-day
    profile, and multiplies by the exchange-level win rate r (a constant
    availability haircut applied uniformly).
    """
    if log_sampling_factor < 1.0:
        raise ValueError(f"log_sampling_factor must be >= 1, got {log_sampling_factor}")
    if not 0.0 < external_win_rate <= 1.0:
        raise ValueError(f"external_win_rate must be in (0, 1], got {external_win_rate}")
    adjusted, active = pacing_adjust(counts, pacing)
    if not active.any():
        raise EmptyActivityError("no active buckets: cannot extrapolate to the full day")
    raw = _raw_weights(tod)
    # Dividing by the active share of the day is expressed as a ratio of
    # unnormalized weights so the flat case stays float-exact.
    coverage_ratio = raw.sum() / raw[active].sum()
    return (log_sampling_factor * adjusted[active].sum() * coverage_ratio
            * external_win_rate)
