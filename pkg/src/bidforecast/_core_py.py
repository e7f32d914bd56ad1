"""Pure-NumPy kernels, used when the compiled extension is unavailable.

Signatures mirror ``_core`` exactly: inputs are C-contiguous float64
arrays, accumulator outputs are filled in place.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

_LOG_SQRT_2PI = 0.9189385332046727
_SQRT_2PI = 2.5066282746310002


def gmm_pdf_vec(x, w, mu, sig, out):
    z = (x[:, None] - mu) / sig
    out[:] = np.exp(-0.5 * z * z) @ (w / (sig * _SQRT_2PI))


def gmm_cdf_vec(x, w, mu, sig, out):
    z = (x[:, None] - mu) / sig
    out[:] = ndtr(z) @ w


def em_accumulate(x, logw, mu, sig, rk, rx, rxx):
    """One E-step sweep: responsibility sums and the data log-likelihood."""
    logp = (x[:, None] - mu) / sig
    np.multiply(logp, logp, out=logp)
    logp *= -0.5
    logp += logw - np.log(sig) - _LOG_SQRT_2PI
    m = logp.max(axis=1)
    # One exponential pass: the shifted terms feed both the log-sum-exp
    # and, renormalized, the responsibilities.
    np.exp(logp - m[:, None], out=logp)
    s = logp.sum(axis=1)
    loglik = float((m + np.log(s)).sum())
    resp = logp
    resp /= s[:, None]
    rk[:] = resp.sum(axis=0)
    rx[:] = resp.T @ x
    rxx[:] = resp.T @ (x * x)
    return loglik


def curve_terms(acoef, bc, w, mu, sig, u):
    """Analytic per-control sums over eligible records.

    Thresholds are acoef / u; returns (sum of mixture survival,
    survival-weighted cost sum, density * cost * acoef sum).
    """
    t = acoef / u
    z = (t[:, None] - mu) / sig
    surv = ndtr(-z) @ w
    dens = np.exp(-0.5 * z * z) @ (w / (sig * _SQRT_2PI))
    return float(surv.sum()), float(surv @ bc), float(dens @ (bc * acoef))
