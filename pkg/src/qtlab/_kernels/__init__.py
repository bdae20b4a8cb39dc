"""Trajectory stepping kernels.

advance_bundle() is the hot inner loop of the trajectory integrator:
RK4 substeps through one snapshot interval with cubic (Catmull-Rom)
spatial interpolation of the velocity field and linear interpolation in
time.  Two interchangeable backends exist:

* _native  -- Cython/C loop over paths (built by setup.py);
* _fallback -- pure numpy, vectorized over paths.

Both execute the same floating-point operations in the same order, so
their results are bit-identical; the native build is compiled with
-ffp-contract=off to keep that true.  Selection happens here at import:
the compiled kernel is preferred when present, and QTLAB_KERNEL=numpy or
=native forces a backend (benchmarks and tests use this).
"""

import os

from . import _fallback

STATUS_ALIVE = 0
STATUS_MASKED = 1
STATUS_LEFT_DOMAIN = 2

advance_bundle_numpy = _fallback.advance_bundle
interp_cubic = _fallback.interp_cubic

try:
    from . import _native
    advance_bundle_native = _native.advance_bundle
except ImportError:
    _native = None
    advance_bundle_native = None

_requested = os.environ.get("QTLAB_KERNEL", "auto")
if _requested not in ("auto", "native", "numpy"):
    raise ImportError(f"QTLAB_KERNEL must be auto, native or numpy, got {_requested!r}")
if _requested == "native" and advance_bundle_native is None:
    raise ImportError("QTLAB_KERNEL=native but the compiled kernel is not built")

if _requested in ("auto", "native") and advance_bundle_native is not None:
    backend_name = "native"
    advance_bundle = advance_bundle_native
else:
    backend_name = "numpy"
    advance_bundle = advance_bundle_numpy


def get_backend() -> str:
    """Name of the kernel backend selected at import ('native' or 'numpy')."""
    return backend_name
