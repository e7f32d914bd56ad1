# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: mixture pdf/cdf evaluation, the EM accumulation sweep,
and the per-control-point curve sums. Mirrors ``_core_py``."""

from libc.math cimport erfc, exp, log, INFINITY

cdef double INV_SQRT2 = 0.70710678118654752440
cdef double SQRT_2PI = 2.50662827463100050242
cdef double LOG_SQRT_2PI = 0.91893853320467274178

DEF MAX_COMPONENTS = 64


def gmm_pdf_vec(double[::1] x, double[::1] w, double[::1] mu, double[::1] sig,
                double[::1] out):
    cdef Py_ssize_t i, k, n = x.shape[0], K = w.shape[0]
    cdef double acc, z
    for i in range(n):
        acc = 0.0
        for k in range(K):
            z = (x[i] - mu[k]) / sig[k]
            acc += w[k] * exp(-0.5 * z * z) / (sig[k] * SQRT_2PI)
        out[i] = acc


def gmm_cdf_vec(double[::1] x, double[::1] w, double[::1] mu, double[::1] sig,
                double[::1] out):
    cdef Py_ssize_t i, k, n = x.shape[0], K = w.shape[0]
    cdef double acc, z
    for i in range(n):
        acc = 0.0
        for k in range(K):
            z = (x[i] - mu[k]) / sig[k]
            acc += w[k] * 0.5 * erfc(-z * INV_SQRT2)
        out[i] = acc


def em_accumulate(double[::1] x, double[::1] logw, double[::1] mu,
                  double[::1] sig, double[::1] rk, double[::1] rx,
                  double[::1] rxx):
    """One E-step sweep: responsibility sums and the data log-likelihood."""
    cdef Py_ssize_t i, k, n = x.shape[0], K = logw.shape[0]
    cdef double lp[MAX_COMPONENTS]
    cdef double cterm[MAX_COMPONENTS]
    cdef double inv_sig[MAX_COMPONENTS]
    cdef double xi, z, m, s, inv_s, r, loglik = 0.0
    if K > MAX_COMPONENTS:
        raise ValueError(f"at most {MAX_COMPONENTS} mixture components supported")
    for k in range(K):
        rk[k] = 0.0
        rx[k] = 0.0
        rxx[k] = 0.0
        cterm[k] = logw[k] - log(sig[k]) - LOG_SQRT_2PI
        inv_sig[k] = 1.0 / sig[k]
    for i in range(n):
        xi = x[i]
        m = -INFINITY
        for k in range(K):
            z = (xi - mu[k]) * inv_sig[k]
            lp[k] = cterm[k] - 0.5 * z * z
            if lp[k] > m:
                m = lp[k]
        s = 0.0
        for k in range(K):
            # Reuse the shifted exponentials: responsibilities are these
            # same terms divided by their sum.
            lp[k] = exp(lp[k] - m)
            s += lp[k]
        loglik += m + log(s)
        inv_s = 1.0 / s
        for k in range(K):
            r = lp[k] * inv_s
            rk[k] += r
            rx[k] += r * xi
            rxx[k] += r * xi * xi
    return loglik


def curve_terms(double[::1] acoef, double[::1] bc, double[::1] w,
                double[::1] mu, double[::1] sig, double u):
    """Analytic per-control sums over eligible records.

    Thresholds are acoef / u; returns (sum of mixture survival,
    survival-weighted cost sum, density * cost * acoef sum).
    """
    cdef Py_ssize_t i, k, n = acoef.shape[0], K = w.shape[0]
    cdef double inv_u = 1.0 / u
    cdef double t, z, surv, dens
    cdef double imp = 0.0, spend = 0.0, gain = 0.0
    for i in range(n):
        t = acoef[i] * inv_u
        surv = 0.0
        dens = 0.0
        for k in range(K):
            z = (t - mu[k]) / sig[k]
            surv += w[k] * 0.5 * erfc(z * INV_SQRT2)
            dens += w[k] * exp(-0.5 * z * z) / (sig[k] * SQRT_2PI)
        imp += surv
        spend += surv * bc[i]
        gain += dens * bc[i] * acoef[i]
    return imp, spend, gain
