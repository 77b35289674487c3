"""Backend selection for the segmentation kernels.

The compiled extension is used when it imports; ``CONXSENSE_PURE=1`` forces
the pure-Python fallback. Both expose the same functions.
"""
import os

from . import _kernels_py as python_backend

compiled_backend = None
if not os.environ.get("CONXSENSE_PURE"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

_impl = compiled_backend or python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

gps_segments = _impl.gps_segments
wifi_segments = _impl.wifi_segments
snapshot_starts = _impl.snapshot_starts
chain_runs = _impl.chain_runs
jaccard_sorted = _impl.jaccard_sorted
jaccard_to_set = _impl.jaccard_to_set


def available_backends() -> dict:
    out = {"python": python_backend}
    if compiled_backend is not None:
        out["cython"] = compiled_backend
    return out
