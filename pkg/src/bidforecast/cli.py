"""Batch front-end for the daily pipeline: simulate a plant, fit the
day's models, forecast response curves, and validate yesterday's forecast
against today's delivery.

Every command accepts ``--config FILE`` (JSON) with explicit flags taking
precedence, and derives all randomness from one ``--seed`` through named
sub-seeds so a rerun reproduces artifacts byte for byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .bid_model import BidModel, fit_bid_params
from .config import LineConfig
from .errors import ForecastError
from .event_rate import EventRateModel, select_k_bic
from .forecast import ForecastInputs, ResponseCurves, build_response_curves
from .ingest import (bucket_counts, downsample, parse_auction_log,
                     required_sample_size, to_arrays, write_auction_log)
from .normalization import total_available
from .simulator import PlantSpec, fit_and_forecast_roundtrip, generate_day, write_truth
from .validation import forecast_bias, write_bias_report, write_histogram_csv

DEFAULTS = {"grid_points": 200, "epsilon": 0.01, "gamma": 0.95, "k_max": 10,
            "seed": 0, "downsample": "0", "jobs": 0, "emit_plots": False}


def derive_seed(seed: int, name: str) -> int:
    """Stable named sub-seed so each pipeline stage has its own stream."""
    h = hashlib.blake2b(f"{seed}:{name}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


class _Options:
    """Flag values overriding --config values overriding defaults."""

    def __init__(self, args: argparse.Namespace):
        self._args = vars(args)
        cfg_path = self._args.get("config")
        self._cfg = json.loads(Path(cfg_path).read_text()) if cfg_path else {}

    def __getattr__(self, name: str):
        v = self._args.get(name)
        if v is not None:
            return v
        if name in self._cfg:
            return self._cfg[name]
        if name in DEFAULTS:
            return DEFAULTS[name]
        return None

    def require(self, name: str):
        v = getattr(self, name)
        if v is None:
            raise ValueError(f"missing required option --{name.replace('_', '-')}")
        return v

    def out_dir(self) -> Path:
        out = Path(self.require("output"))
        out.mkdir(parents=True, exist_ok=True)
        return out


def _cmd_simulate(opt: _Options) -> int:
    spec = PlantSpec.load(opt.require("spec"))
    if opt._args.get("seed") is not None or "seed" in opt._cfg:
        spec = dataclasses.replace(spec, seed=derive_seed(int(opt.seed), "generate"))
    day = generate_day(spec)
    out = opt.out_dir()
    write_auction_log(day.observed, out / "auction_log.jsonl")
    day.config.save(out / "line_config.json")
    write_truth(day, spec, out / "truth.json")
    print(f"simulate: {len(day.observed)} observed of {spec.n_records} "
          f"available records -> {out}")
    return 0


def _fit_models(records, line: LineConfig, opt: _Options):
    counts = bucket_counts(records)
    n_avail = total_available(counts, line.pacing, line.tod,
                              line.log_sampling_factor, line.external_win_rate)
    fit_records = records
    ds = str(opt.downsample)
    if ds == "auto":
        target = required_sample_size(float(opt.epsilon), float(opt.gamma))
    else:
        target = int(ds)
    if 0 < target < len(fit_records):
        fit_records = downsample(fit_records, target, derive_seed(int(opt.seed), "downsample"))
    e, b_s, _, _, _ = to_arrays(fit_records)
    bid = fit_bid_params(list(zip(e.tolist(), b_s.tolist())), line.g, line.b_max,
                         line.u_train)
    erm, report = select_k_bic(e, k_max=int(opt.k_max),
                               seed=derive_seed(int(opt.seed), "fit"))
    return bid, erm, report, n_avail, len(fit_records)


def _cmd_fit(opt: _Options) -> int:
    parsed = parse_auction_log(opt.require("log"))
    line = LineConfig.load(opt.require("line_config"))
    bid, erm, report, n_avail, n_fit = _fit_models(parsed.records, line, opt)
    out = opt.out_dir()
    models = {"bid": bid.to_dict(), "erm": erm.to_dict(),
              "fit_report": report.to_dict(), "n_available": n_avail,
              "n_records_fit": n_fit, "n_records_log": len(parsed.records),
              "n_skipped": parsed.skipped}
    (out / "models.json").write_text(json.dumps(models, indent=2), encoding="utf-8")
    print(f"fit: theta=({bid.theta1:.6g}, {bid.theta0:.6g}) K={erm.k} "
          f"N={n_avail:.6g} -> {out / 'models.json'}")
    return 0


def _cmd_forecast(opt: _Options) -> int:
    parsed = parse_auction_log(opt.require("log"))
    models = json.loads(Path(opt.require("models")).read_text(encoding="utf-8"))
    bid = BidModel.from_dict(models["bid"])
    erm = EventRateModel.from_dict(models["erm"])
    inputs = ForecastInputs(parsed.records, bid, erm, float(models["n_available"]),
                            seed=derive_seed(int(opt.seed), "sample"))
    curves = build_response_curves(inputs, int(opt.grid_points))
    out = opt.out_dir()
    curves.save_csv(out / "curves.csv")
    if opt.emit_plots:
        from .plots import write_curve_charts
        write_curve_charts(curves, out)
    print(f"forecast: {len(curves)} grid rows -> {out / 'curves.csv'}")
    return 0


def _one_bias(pair: dict):
    curves = ResponseCurves.load_csv(pair["curves"])
    line = LineConfig.load(pair["line_config"])
    parsed = parse_auction_log(pair["actual_log"])
    # rho's denominator is delivered impressions: keep only records the
    # line actually won (no-op when the log is already delivery-only).
    counts = bucket_counts([r for r in parsed.records if r.b_s > r.b_star])
    return forecast_bias(curves, float(pair["u_realized"]), counts, line.pacing,
                         line.tod, line.log_sampling_factor, line.external_win_rate,
                         line_id=str(pair.get("line_id", line.line_id)))


def _cmd_validate(opt: _Options) -> int:
    if opt.pairs is not None:
        pairs = json.loads(Path(opt.pairs).read_text(encoding="utf-8"))
        if not isinstance(pairs, list) or not pairs:
            raise ValueError("--pairs must hold a nonempty JSON list")
    else:
        pairs = [{"curves": opt.require("curves"),
                  "u_realized": opt.require("u_realized"),
                  "actual_log": opt.require("actual_log"),
                  "line_config": opt.require("line_config")}]
    jobs = int(opt.jobs) or min(len(pairs), os.cpu_count() or 1)
    if jobs > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_one_bias, pairs))
    else:
        records = [_one_bias(p) for p in pairs]
    out = opt.out_dir()
    summary = write_bias_report(records, out / "bias.json")
    write_histogram_csv(summary, out / "histogram.csv")
    print(f"validate: n={summary.n} median rho={summary.quantiles[0.5]:.4g} "
          f"central-90=[{summary.central_90[0]:.4g}, {summary.central_90[1]:.4g}] "
          f"-> {out / 'bias.json'}")
    return 0


def _cmd_roundtrip(opt: _Options) -> int:
    spec = PlantSpec.load(opt.require("spec"))
    if opt._args.get("seed") is not None or "seed" in opt._cfg:
        spec = dataclasses.replace(spec, seed=derive_seed(int(opt.seed), "generate"))
    report = fit_and_forecast_roundtrip(spec, grid_points=int(opt.grid_points),
                                        k_max=int(opt.k_max),
                                        seed=derive_seed(int(opt.seed), "fit"))
    out = opt.out_dir()
    (out / "roundtrip.json").write_text(json.dumps(report.to_dict(), indent=2),
                                        encoding="utf-8")
    print(f"roundtrip: fitted theta=({report.fitted_bid.theta1:.6g}, "
          f"{report.fitted_bid.theta0:.6g}) max n_I rel err "
          f"{report.max_rel_error('n_i'):.4g} -> {out / 'roundtrip.json'}")
    return 0


def _cmd_sample_size(opt: _Options) -> int:
    print(required_sample_size(float(opt.epsilon), float(opt.gamma)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bidforecast",
        description="Mid-flight auction forecasting pipeline for CPA ad lines.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, output=True):
        sp.add_argument("--config", help="JSON options file; flags override it")
        sp.add_argument("--seed", type=int, help="master seed (default 0)")
        if output:
            sp.add_argument("--output", help="output directory")

    sp = sub.add_parser("simulate", help="generate a synthetic line-day")
    common(sp)
    sp.add_argument("--spec", help="PlantSpec JSON path")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("fit", help="fit bid transform + event-rate mixture")
    common(sp)
    sp.add_argument("--log", help="auction log (JSONL or CSV)")
    sp.add_argument("--line-config", dest="line_config", help="LineConfig JSON path")
    sp.add_argument("--k-max", dest="k_max", type=int, help="largest mixture order tried")
    sp.add_argument("--downsample", help="fit-sample size: integer, 0 (off) or 'auto'")
    sp.add_argument("--epsilon", type=float, help="half-width for 'auto' downsampling")
    sp.add_argument("--gamma", type=float, help="confidence for 'auto' downsampling")
    sp.set_defaults(func=_cmd_fit)

    sp = sub.add_parser("forecast", help="build response curves from fitted models")
    common(sp)
    sp.add_argument("--log", help="auction log (JSONL or CSV)")
    sp.add_argument("--models", help="models.json from `fit`")
    sp.add_argument("--grid-points", dest="grid_points", type=int,
                    help="log-grid size (default 200)")
    sp.add_argument("--emit-plots", dest="emit_plots", action="store_const", const=True,
                    help="also write SVG charts (requires matplotlib)")
    sp.set_defaults(func=_cmd_forecast)

    sp = sub.add_parser("validate", help="score forecasts against realized delivery")
    common(sp)
    sp.add_argument("--curves", help="forecast curves.csv from day k")
    sp.add_argument("--u-realized", dest="u_realized", type=float,
                    help="control value realized on day k+1")
    sp.add_argument("--actual-log", dest="actual_log", help="day k+1 auction log")
    sp.add_argument("--line-config", dest="line_config", help="day k+1 LineConfig JSON")
    sp.add_argument("--pairs", help="JSON list of per-line validation inputs")
    sp.add_argument("--jobs", type=int, help="worker threads (default: cpu count)")
    sp.set_defaults(func=_cmd_validate)

    sp = sub.add_parser("roundtrip", help="pipeline vs brute-force truth on one plant")
    common(sp)
    sp.add_argument("--spec", help="PlantSpec JSON path")
    sp.add_argument("--grid-points", dest="grid_points", type=int)
    sp.add_argument("--k-max", dest="k_max", type=int)
    sp.set_defaults(func=_cmd_roundtrip)

    sp = sub.add_parser("sample-size", help="records needed for a win-rate CI")
    common(sp, output=False)
    sp.add_argument("--epsilon", type=float, help="CI half-width (default 0.01)")
    sp.add_argument("--gamma", type=float, help="confidence level (default 0.95)")
    sp.set_defaults(func=_cmd_sample_size)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(_Options(args))
    except (ForecastError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
