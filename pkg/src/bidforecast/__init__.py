"""Mid-flight forecasting for CPA ad lines in a second-price exchange:
fit the day's bid transform and event-rate mixture from auction logs,
normalize volumes, and produce control-response curves (impressions,
spend, plant gain, conversions, eCPA) with a simulator-backed validation
loop."""

from .bid_model import (BidModel, bid_price, eligibility_cap, fit_bid_params,
                        inverse_bid, u_max)
from .config import LineConfig, uniform_pacing
from .errors import (DomainError, EmptyActivityError, EmptyRangeError,
                     EmptySummaryError, ExtrapolationError, ForecastError,
                     FormatError, InsufficientDataError, InvalidTodError,
                     ModelSelectionError, UndefinedBiasError,
                     UndefinedCorrelationError)
from .event_rate import (EventRateModel, FitReport, fit_gmm_em, gmm_cdf, gmm_pdf,
                         gmm_sample, pearson_diagnostic, select_k_bic)
from .forecast import (ForecastInputs, ResponseCurves, build_response_curves,
                       control_grid, conversions_at, ecpa_at,
                       empirical_impressions_at, empirical_spend_at,
                       impressions_at, plant_gain_at, resampled_curves,
                       spend_at, spend_at_goal, spend_ecpa_profile)
from .ingest import (AuctionRecord, ParseResult, RawAuctionRecord, SamplePlan,
                     bucket_counts, derive_highest_competing, downsample,
                     make_sample_plan, parse_auction_log, required_sample_size,
                     to_arrays, write_auction_log)
from .kernels import BACKEND
from .normalization import (FLAT_TOD, TodModel, bucket_share, bucket_shares,
                            pacing_adjust, tod_height, total_available)
from .simulator import (PlantSpec, RoundtripReport, SimulatedDay,
                        brute_force_curves, fit_and_forecast_roundtrip,
                        generate_day, write_truth)
from .validation import (BiasRecord, BiasSummary, bias_summary, forecast_bias,
                         interpolate_impressions, write_bias_report,
                         write_histogram_csv)

__version__ = "0.1.0"

__all__ = [
    "AuctionRecord", "BACKEND", "BiasRecord", "BiasSummary", "BidModel",
    "DomainError", "EmptyActivityError", "EmptyRangeError", "EmptySummaryError",
    "EventRateModel", "ExtrapolationError", "FLAT_TOD", "FitReport",
    "ForecastError", "ForecastInputs", "FormatError", "InsufficientDataError",
    "InvalidTodError", "LineConfig", "ModelSelectionError", "ParseResult",
    "PlantSpec", "RawAuctionRecord", "ResponseCurves", "RoundtripReport",
    "SamplePlan", "SimulatedDay", "TodModel", "UndefinedBiasError",
    "UndefinedCorrelationError", "bias_summary", "bid_price",
    "brute_force_curves", "bucket_counts", "bucket_share", "bucket_shares",
    "build_response_curves", "control_grid", "conversions_at",
    "derive_highest_competing", "downsample", "ecpa_at", "eligibility_cap",
    "empirical_impressions_at", "empirical_spend_at", "fit_and_forecast_roundtrip",
    "fit_bid_params", "fit_gmm_em", "forecast_bias", "generate_day", "gmm_cdf",
    "gmm_pdf", "gmm_sample", "impressions_at", "interpolate_impressions",
    "inverse_bid", "make_sample_plan", "pacing_adjust", "parse_auction_log",
    "pearson_diagnostic", "plant_gain_at", "required_sample_size",
    "resampled_curves", "select_k_bic", "spend_at", "spend_at_goal",
    "spend_ecpa_profile", "to_arrays", "tod_height", "total_available",
    "u_max", "uniform_pacing", "write_auction_log", "write_bias_report",
    "write_histogram_csv", "write_truth",
]
