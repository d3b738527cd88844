"""Hot-loop kernels with a compiled core and a pure-Python fallback.

The compiled extension ``_ckernels`` is used when importable; setting the
environment variable ``UCBSTOP_PURE_PYTHON=1`` forces the fallback.
"""
import importlib
import os

from . import _pykernels


def _load_compiled():
    if os.environ.get("UCBSTOP_PURE_PYTHON", "") in ("1", "true", "yes"):
        return None
    try:
        return importlib.import_module(__name__ + "._ckernels")
    except ImportError:
        return None


_ckernels = _load_compiled()

_active = _ckernels if _ckernels is not None else _pykernels

BACKEND = "compiled" if _ckernels is not None else "python"

norm_cdf = _active.norm_cdf
norm_sf = _active.norm_sf
norm_pdf = _active.norm_pdf
norm_ppf = _active.norm_ppf
norm_isf = _active.norm_isf
solve_subproblem = _active.solve_subproblem

# array helpers are always numpy-vectorized
norm_cdf_array = _pykernels.norm_cdf_array
norm_ppf_array = _pykernels.norm_ppf_array
norm_isf_array = _pykernels.norm_isf_array


def backends():
    """Return the available kernel modules keyed by name."""
    out = {"python": _pykernels}
    if _ckernels is not None:
        out["compiled"] = _ckernels
    return out
