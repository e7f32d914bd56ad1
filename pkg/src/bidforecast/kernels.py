"""Kernel backend selection.

The compiled extension is preferred; the NumPy fallback is used when it is
missing or when ``BIDFORECAST_NO_EXT`` is set. Both expose identical
signatures, so callers import from here only.
"""

from __future__ import annotations

import os

if os.environ.get("BIDFORECAST_NO_EXT"):
    from . import _core_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _core_py as _impl

        BACKEND = "python"

gmm_pdf_vec = _impl.gmm_pdf_vec
gmm_cdf_vec = _impl.gmm_cdf_vec
em_accumulate = _impl.em_accumulate
curve_terms = _impl.curve_terms
