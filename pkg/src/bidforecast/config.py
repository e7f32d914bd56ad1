"""Per-line configuration: everything the forecaster needs about a line
that is not learned from its auction log."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ingest import BUCKETS_PER_DAY, DEFAULT_LOG_SAMPLING_FACTOR
from .normalization import FLAT_TOD, TodModel


@dataclass(frozen=True)
class LineConfig:
    """Static attributes of an ad line.

    g is the advertiser CPA goal ($/conversion), b_max the bid cap ($),
    u_train the control value in force when the log was written, pacing
    the per-bucket participation rates on the log day, and
    external_win_rate the exchange-level win rate r.
    """

    line_id: str
    g: float
    b_max: float
    u_train: float
    pacing: np.ndarray
    tod: TodModel = FLAT_TOD
    external_win_rate: float = 1.0
    log_sampling_factor: float = DEFAULT_LOG_SAMPLING_FACTOR

    def __post_init__(self):
        for name in ("g", "b_max", "u_train"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        a = np.asarray(self.pacing, dtype=np.float64)
        if a.shape != (BUCKETS_PER_DAY,):
            raise ValueError(f"pacing must have {BUCKETS_PER_DAY} entries, got shape {a.shape}")
        if ((a < 0) | (a > 1)).any() or not np.isfinite(a).all():
            raise ValueError("pacing rates must lie in [0, 1]")
        if not 0.0 < self.external_win_rate <= 1.0:
            raise ValueError(f"external_win_rate must be in (0, 1], got {self.external_win_rate!r}")
        if self.log_sampling_factor < 1.0:
            raise ValueError(f"log_sampling_factor must be >= 1, got {self.log_sampling_factor!r}")
        object.__setattr__(self, "pacing", a)

    def to_dict(self) -> dict:
        return {"line_id": self.line_id, "g": self.g, "b_max": self.b_max,
                "u_train": self.u_train, "pacing": self.pacing.tolist(),
                "tod": self.tod.to_dict(),
                "external_win_rate": self.external_win_rate,
                "log_sampling_factor": self.log_sampling_factor}

    @classmethod
    def from_dict(cls, d: dict) -> "LineConfig":
        return cls(line_id=str(d["line_id"]), g=float(d["g"]), b_max=float(d["b_max"]),
                   u_train=float(d["u_train"]),
                   pacing=np.asarray(d["pacing"], dtype=np.float64),
                   tod=TodModel.from_dict(d["tod"]) if "tod" in d else FLAT_TOD,
                   external_win_rate=float(d.get("external_win_rate", 1.0)),
                   log_sampling_factor=float(d.get("log_sampling_factor",
                                                   DEFAULT_LOG_SAMPLING_FACTOR)))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "LineConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def uniform_pacing(rate: float = 1.0) -> np.ndarray:
    """Constant pacing across all buckets."""
    return np.full(BUCKETS_PER_DAY, float(rate))
