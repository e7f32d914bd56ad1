"""Compare the compiled kernels against the pure-NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--n 50000] [--k 5] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bidforecast import _core_py

try:
    from bidforecast import _core
except ImportError:
    _core = None


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=50_000, help="data points per sweep")
    ap.add_argument("--k", type=int, default=5, help="mixture components")
    ap.add_argument("--repeats", type=int, default=5, help="timings per case (best kept)")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    x = np.sort(rng.random(args.n))
    w = np.full(args.k, 1.0 / args.k)
    mu = np.linspace(0.1, 0.9, args.k)
    sig = np.full(args.k, 0.05)
    logw = np.log(w)
    rk, rx, rxx = (np.empty(args.k) for _ in range(3))
    out = np.empty(args.n)
    acoef = rng.lognormal(-0.5, 0.8, args.n)
    bc = rng.lognormal(-1.0, 0.5, args.n)

    cases = {
        "em_accumulate": lambda m: m.em_accumulate(x, logw, mu, sig, rk, rx, rxx),
        "gmm_pdf_vec": lambda m: m.gmm_pdf_vec(x, w, mu, sig, out),
        "gmm_cdf_vec": lambda m: m.gmm_cdf_vec(x, w, mu, sig, out),
        "curve_terms": lambda m: m.curve_terms(acoef, bc, w, mu, sig, 0.7),
    }

    backends = [("python", _core_py)]
    if _core is not None:
        backends.append(("compiled", _core))
    else:
        print("compiled extension not built; timing the fallback only\n")

    print(f"n={args.n} k={args.k} (best of {args.repeats})")
    header = f"{'kernel':<16}" + "".join(f"{name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for case, fn in cases.items():
        times = [_time(lambda m=mod: fn(m), args.repeats) for _, mod in backends]
        row = f"{case:<16}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
