"""Optional SVG renditions of the response curves. Requires matplotlib;
everything else in the package works without it."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .forecast import ResponseCurves

_CHARTS = (
    ("impressions.svg", "n_i", "control signal u", "impressions / day"),
    ("spend.svg", "c", "control signal u", "spend / day"),
    ("plant_gain.svg", "gain", "control signal u", "d(spend)/du"),
)


def _matplotlib():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - exercised only without extras
        raise RuntimeError(
            "plot emission requires matplotlib; install the 'plots' extra") from exc
    matplotlib.use("Agg", force=True)
    # Stable ids inside the SVG so reruns produce identical bytes.
    matplotlib.rcParams["svg.hashsalt"] = "bidforecast"
    import matplotlib.pyplot as plt
    return plt


def write_curve_charts(curves: ResponseCurves, out_dir: str | Path) -> list[Path]:
    """Write the four standard charts; returns the paths written."""
    plt = _matplotlib()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    pos = curves.grid > 0
    for name, column, xlabel, ylabel in _CHARTS:
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.plot(curves.grid[pos], getattr(curves, column)[pos])
        ax.set_xscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        fig.tight_layout()
        path = out_dir / name
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        written.append(path)

    defined = pos & ~np.isnan(curves.v)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(curves.c[defined], curves.v[defined])
    ax.set_xlabel("spend / day")
    ax.set_ylabel("eCPA")
    fig.tight_layout()
    path = out_dir / "spend_ecpa.svg"
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    written.append(path)
    return written
