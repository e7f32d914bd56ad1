"""Event-rate distribution modeling: 1-D Gaussian mixtures fitted by EM,
with BIC model-order selection.

Event rates cluster by audience segment, so a mixture captures the
histogram well. The fit is untruncated even though rates live in [0, 1];
sampling clamps instead (tail mass outside the interval is negligible for
well-fitted lines).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InsufficientDataError, ModelSelectionError, UndefinedCorrelationError

SIGMA_FLOOR = 1e-6
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 500
DEFAULT_RESTARTS = 5
DEFAULT_K_MAX = 10

_LOG_SQRT_2PI = 0.9189385332046727


@dataclass(frozen=True, eq=False)
class EventRateModel:
    """K-component Gaussian mixture over event rates."""

    weights: np.ndarray
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        mu = np.ascontiguousarray(self.means, dtype=np.float64)
        sig = np.ascontiguousarray(self.stds, dtype=np.float64)
        if not (w.ndim == mu.ndim == sig.ndim == 1) or not (len(w) == len(mu) == len(sig)):
            raise ValueError("weights, means, stds must be 1-D and equally long")
        if len(w) == 0:
            raise ValueError("mixture needs at least one component")
        if (w < 0).any() or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be a probability simplex")
        if (sig <= 0).any():
            raise ValueError("stds must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "stds", sig)

    @property
    def k(self) -> int:
        return len(self.weights)

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "means": self.means.tolist(),
                "stds": self.stds.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "EventRateModel":
        return cls(np.asarray(d["weights"]), np.asarray(d["means"]), np.asarray(d["stds"]))


@dataclass(frozen=True)
class FitReport:
    """Model-selection trace: BIC per candidate order plus the winner's
    convergence details."""

    k_selected: int
    bic_by_k: dict[int, float]
    loglik: float
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return {"k_selected": self.k_selected,
                "bic_by_k": {str(k): v for k, v in self.bic_by_k.items()},
                "loglik": self.loglik, "iterations": self.iterations,
                "converged": self.converged}


def gmm_pdf(m: EventRateModel, e):
    """Mixture density at ``e`` (scalar or array)."""
    x = np.ascontiguousarray(np.atleast_1d(e), dtype=np.float64)
    out = np.empty_like(x)
    kernels.gmm_pdf_vec(x, m.weights, m.means, m.stds, out)
    return float(out[0]) if np.isscalar(e) else out


def gmm_cdf(m: EventRateModel, e):
    """Mixture CDF at ``e`` (scalar or array)."""
    x = np.ascontiguousarray(np.atleast_1d(e), dtype=np.float64)
    out = np.empty_like(x)
    kernels.gmm_cdf_vec(x, m.weights, m.means, m.stds, out)
    return float(out[0]) if np.isscalar(e) else out


def gmm_sample(m: EventRateModel, n: int, seed) -> np.ndarray:
    """``n`` draws: component by weight, then a normal draw, clamped to
    [0, 1]. ``seed`` may be an int or an existing Generator."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    rng = np.random.default_rng(seed)
    if n == 0:
        return np.empty(0, dtype=np.float64)
    comp = rng.choice(m.k, size=n, p=m.weights)
    draws = rng.normal(m.means[comp], m.stds[comp])
    return np.clip(draws, 0.0, 1.0)


def pearson_diagnostic(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation, used to justify modeling the event rate
    independently of the competing-bid landscape."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("xs and ys must be equal-length 1-D with >= 2 points")
    if x.std() == 0.0 or y.std() == 0.0:
        raise UndefinedCorrelationError("correlation undefined for zero-variance input")
    return float(np.corrcoef(x, y)[0, 1])


def fit_gmm_em(data, k: int, seed, tol: float = DEFAULT_TOL,
               max_iter: int = DEFAULT_MAX_ITER) -> tuple[EventRateModel, float]:
    """Fit a K-component mixture by EM. Returns (model, log-likelihood)."""
    model, ll, _, _, _ = _fit_em(data, k, seed, tol, max_iter)
    return model, ll


def select_k_bic(data, k_max: int = DEFAULT_K_MAX, seed=0, *,
                 n_restarts: int = DEFAULT_RESTARTS, tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER) -> tuple[EventRateModel, FitReport]:
    """Fit K = 1..k_max (restarting EM ``n_restarts`` times each) and keep
    the order minimizing BIC = -2*loglik + (3K - 1)*ln(n)."""
    x = _as_data(data)
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    if len(x) < k_max:
        raise InsufficientDataError(f"need >= {k_max} points for k_max={k_max}, got {len(x)}")
    seeds = np.random.SeedSequence(seed).spawn(k_max * n_restarts)
    n = len(x)
    bic_by_k: dict[int, float] = {}
    best = None  # (bic, k, model, ll, iters, converged)
    errors: list[Exception] = []
    for k in range(1, k_max + 1):
        fit = None
        for r in range(n_restarts):
            try:
                cand = _fit_em(x, k, seeds[(k - 1) * n_restarts + r], tol, max_iter)
            except InsufficientDataError as exc:
                errors.append(exc)
                continue
            if fit is None or cand[1] > fit[1]:
                fit = cand
        if fit is None:
            continue
        model, ll, iters, converged, _ = fit
        bic = -2.0 * ll + (3.0 * model.k - 1.0) * math.log(n)
        bic_by_k[k] = bic
        if best is None or bic < best[0]:
            best = (bic, k, model, ll, iters, converged)
    if best is None:
        raise ModelSelectionError(f"every candidate order failed to fit: {errors}")
    _, k_sel, model, ll, iters, converged = best
    return model, FitReport(k_sel, bic_by_k, ll, iters, converged)


def _as_data(data) -> np.ndarray:
    x = np.ascontiguousarray(data, dtype=np.float64).ravel()
    if not np.isfinite(x).all():
        raise ValueError("event-rate data must be finite")
    return x


def _fit_em(data, k: int, seed, tol: float, max_iter: int):
    """EM core. Returns (model, loglik, iterations, converged, history)."""
    x = _as_data(data)
    n = len(x)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n < k:
        raise InsufficientDataError(f"need >= {k} points for k={k}, got {n}")

    if x.min() == x.max():
        # All observations identical: nothing beyond a point mass to learn.
        model = EventRateModel(np.array([1.0]), np.array([x[0]]), np.array([SIGMA_FLOOR]))
        ll = _loglik(model, x)
        return model, ll, 0, True, [ll]

    rng = np.random.default_rng(seed)
    w, mu, sig = _init_params(x, k, rng)
    logw = np.log(np.maximum(w, 1e-300))
    rk = np.empty(k)
    rx = np.empty(k)
    rxx = np.empty(k)

    history: list[float] = []
    ll_prev = -math.inf
    converged = False
    iterations = 0
    for it in range(1, max_iter + 1):
        ll = kernels.em_accumulate(x, logw, mu, sig, rk, rx, rxx)
        iterations = it
        # EM never decreases the likelihood; allow only rounding slack.
        assert ll >= ll_prev - 1e-9 * (1.0 + abs(ll_prev)), \
            f"EM log-likelihood decreased: {ll_prev} -> {ll}"
        history.append(ll)

        occupied = rk > 1e-12
        w = np.where(occupied, rk / n, 0.0)
        w = w / w.sum()
        mu = np.where(occupied, rx / np.maximum(rk, 1e-300), mu)
        var = rxx / np.maximum(rk, 1e-300) - mu * mu
        sig = np.where(occupied, np.sqrt(np.maximum(var, 0.0)), sig)
        sig = np.maximum(sig, SIGMA_FLOOR)
        logw = np.log(np.maximum(w, 1e-300))

        if math.isfinite(ll_prev):
            rel = (ll - ll_prev) / max(abs(ll_prev), 1e-12)
            if rel < tol:
                converged = True
                break
        ll_prev = ll

    model = EventRateModel(w, mu, sig)
    return model, history[-1], iterations, converged, history


def _loglik(m: EventRateModel, x: np.ndarray) -> float:
    logw = np.log(np.maximum(m.weights, 1e-300))
    rk = np.empty(m.k)
    rx = np.empty(m.k)
    rxx = np.empty(m.k)
    return kernels.em_accumulate(x, logw, m.means, m.stds, rk, rx, rxx)


def _init_params(x: np.ndarray, k: int, rng) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """k-means++-style seeding followed by one hard-assignment moment step."""
    n = len(x)
    centers = np.empty(k)
    centers[0] = x[rng.integers(n)]
    d2 = (x - centers[0]) ** 2
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            centers[j] = x[rng.integers(n)]
        else:
            centers[j] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, (x - centers[j]) ** 2)

    assign = np.abs(x[:, None] - centers).argmin(axis=1)
    w = np.empty(k)
    mu = np.empty(k)
    sig = np.empty(k)
    global_sig = max(float(x.std()), SIGMA_FLOOR)
    for j in range(k):
        members = x[assign == j]
        if len(members) == 0:
            w[j] = 1.0 / n
            mu[j] = centers[j]
            sig[j] = global_sig
        else:
            w[j] = len(members) / n
            mu[j] = members.mean()
            sig[j] = max(float(members.std()), SIGMA_FLOOR)
    w = w / w.sum()
    return w, mu, sig
