"""Auction-log parsing, competing-bid derivation, and statistical downsampling."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from statistics import NormalDist
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import DomainError, FormatError

log = logging.getLogger(__name__)

BUCKETS_PER_DAY = 288

# Source logs are subsampled from the raw bid-request stream; the default
# ratio is 1:4 and is undone by the normalization step.
DEFAULT_LOG_SAMPLING_FACTOR = 4.0

_DERIVED_FIELDS = ("e", "b_s", "b_star", "b_c", "bucket")
_RAW_FIELDS = ("e", "b_s", "b_c", "bucket", "won", "second_internal",
               "inventory_cost", "highest_internal")


@dataclass(frozen=True, slots=True)
class AuctionRecord:
    """One available impression: event rate, internal score, derived
    highest competing bid, advertiser cost, and 5-minute bucket."""

    e: float
    b_s: float
    b_star: float
    b_c: float
    bucket: int


@dataclass(frozen=True, slots=True)
class RawAuctionRecord:
    """Auction outcome before the competing bid has been derived."""

    won: bool
    second_internal: float
    inventory_cost: float
    highest_internal: float
    e: float
    b_s: float
    b_c: float
    bucket: int


@dataclass(frozen=True, slots=True)
class SamplePlan:
    """Sample size needed for a +/- epsilon bound at the given confidence."""

    epsilon: float
    gamma: float
    required_n: int


@dataclass(frozen=True, slots=True)
class ParseResult:
    records: list[AuctionRecord]
    skipped: int
    total: int


def derive_highest_competing(r: RawAuctionRecord) -> float:
    """Highest competing bid: for a won auction it is the larger of the
    second-highest internal bid and the inventory cost; for a lost one it
    is the highest internal bid."""
    if r.won:
        return max(r.second_internal, r.inventory_cost)
    return r.highest_internal


def required_sample_size(epsilon: float, gamma: float) -> int:
    """Records needed so the empirical win rate lands within ``epsilon`` of
    truth with probability ``gamma``, at the worst-case variance p = 1/2.

    The bound is ceil((z / (2*epsilon))^2) with z the standard normal
    quantile at (1 + gamma) / 2.
    """
    if not (0.0 < epsilon <= 0.5):
        raise DomainError(f"epsilon must be in (0, 0.5], got {epsilon}")
    if not (0.0 < gamma < 1.0):
        raise DomainError(f"gamma must be in (0, 1), got {gamma}")
    z = NormalDist().inv_cdf((1.0 + gamma) / 2.0)
    return math.ceil((z / (2.0 * epsilon)) ** 2)


def make_sample_plan(epsilon: float, gamma: float) -> SamplePlan:
    return SamplePlan(epsilon, gamma, required_sample_size(epsilon, gamma))


def downsample(records: Sequence[AuctionRecord], n: int, seed: int) -> list[AuctionRecord]:
    """Uniform sample of ``n`` records without replacement, preserving input
    order. Returns everything when ``n`` covers the population."""
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    total = len(records)
    if n >= total:
        return list(records)
    rng = np.random.default_rng(seed)
    # Partial Fisher-Yates over the index array: only the first n swaps.
    idx = np.arange(total)
    for i in range(n):
        j = int(rng.integers(i, total))
        idx[i], idx[j] = idx[j], idx[i]
    chosen = np.sort(idx[:n])
    return [records[i] for i in chosen]


def to_arrays(records: Sequence[AuctionRecord]) -> tuple[np.ndarray, ...]:
    """Column arrays (e, b_s, b_star, b_c, bucket) for vectorized math."""
    e = np.array([r.e for r in records], dtype=np.float64)
    b_s = np.array([r.b_s for r in records], dtype=np.float64)
    b_star = np.array([r.b_star for r in records], dtype=np.float64)
    b_c = np.array([r.b_c for r in records], dtype=np.float64)
    bucket = np.array([r.bucket for r in records], dtype=np.int64)
    return e, b_s, b_star, b_c, bucket


def bucket_counts(records: Iterable[AuctionRecord]) -> np.ndarray:
    """Observed available impressions per 5-minute bucket."""
    counts = np.zeros(BUCKETS_PER_DAY, dtype=np.int64)
    for r in records:
        counts[r.bucket] += 1
    return counts


def parse_auction_log(source: str | Path | IO[str], format: str = "derived") -> ParseResult:
    """Parse a JSON-lines or CSV auction log.

    Malformed rows are skipped and counted; a stream that is mostly
    malformed (>50%) raises :class:`FormatError`. Raw-format rows have
    their highest competing bid derived from the auction outcome.
    """
    if format not in ("derived", "raw"):
        raise DomainError(f"unknown log format {format!r}")
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        return ParseResult([], 0, 0)

    if lines[0].lstrip().startswith("{"):
        rows, bad = _rows_from_jsonl(lines)
    else:
        rows, bad = _rows_from_csv(lines, format)

    records: list[AuctionRecord] = []
    for row in rows:
        rec = _record_from_row(row, format)
        if rec is None:
            bad += 1
        else:
            records.append(rec)

    total = len(records) + bad
    if total and bad / total > 0.5:
        raise FormatError(
            f"{bad} of {total} rows malformed; stream does not look like "
            f"{format!r} auction data")
    if bad:
        log.warning("skipped %d malformed auction rows (%d kept)", bad, len(records))
    return ParseResult(records, bad, total)


def write_auction_log(records: Iterable[AuctionRecord], path: str | Path) -> None:
    """Write records in the derived JSON-lines format the parser accepts."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({"e": r.e, "b_s": r.b_s, "b_star": r.b_star,
                                 "b_c": r.b_c, "bucket": r.bucket}))
            fh.write("\n")


def _rows_from_jsonl(lines: list[str]) -> tuple[list[dict], int]:
    rows, bad = [], 0
    for ln in lines:
        try:
            obj = json.loads(ln)
        except json.JSONDecodeError:
            bad += 1
            continue
        if isinstance(obj, dict):
            rows.append(obj)
        else:
            bad += 1
    return rows, bad


def _rows_from_csv(lines: list[str], format: str) -> tuple[list[dict], int]:
    reader = csv.DictReader(lines)
    needed = set(_DERIVED_FIELDS if format == "derived" else _RAW_FIELDS)
    header = set(reader.fieldnames or ())
    if not needed <= header:
        raise FormatError(f"CSV header missing columns {sorted(needed - header)}")
    rows, bad = [], 0
    for row in reader:
        if any(v is None for v in row.values()):
            bad += 1
        else:
            rows.append(row)
    return rows, bad


def _finite(x) -> float | None:
    try:
        v = float(x)
    except (TypeError, ValueError):
        return None
    return v if math.isfinite(v) else None


def _int_bucket(x) -> int | None:
    v = _finite(x)
    if v is None or v != int(v):
        return None
    b = int(v)
    return b if 0 <= b < BUCKETS_PER_DAY else None


def _bool_field(x) -> bool | None:
    if isinstance(x, bool):
        return x
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("true", "1"):
            return True
        if s in ("false", "0"):
            return False
    return None


def _record_from_row(row: dict, format: str) -> AuctionRecord | None:
    e = _finite(row.get("e"))
    b_s = _finite(row.get("b_s"))
    b_c = _finite(row.get("b_c"))
    bucket = _int_bucket(row.get("bucket"))
    if e is None or b_s is None or b_c is None or bucket is None:
        return None
    if not (0.0 <= e <= 1.0) or b_c < 0.0:
        return None

    if format == "derived":
        b_star = _finite(row.get("b_star"))
        if b_star is None or b_star < 0.0:
            return None
        return AuctionRecord(e, b_s, b_star, b_c, bucket)

    won = _bool_field(row.get("won"))
    second = _finite(row.get("second_internal"))
    inventory = _finite(row.get("inventory_cost"))
    highest = _finite(row.get("highest_internal"))
    if won is None or second is None or inventory is None or highest is None:
        return None
    if second < 0.0 or inventory < 0.0 or highest < 0.0 or highest < second:
        return None
    raw = RawAuctionRecord(won, second, inventory, highest, e, b_s, b_c, bucket)
    return AuctionRecord(e, b_s, derive_highest_competing(raw), b_c, bucket)
