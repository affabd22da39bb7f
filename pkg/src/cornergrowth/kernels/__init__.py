"""Backend selection for the hot numeric kernels.

Set ``CORNERGROWTH_BACKEND=numpy`` to force the pure-numpy fallback, or
``CORNERGROWTH_BACKEND=numba`` to require the jitted kernels.  By
default the numba backend is used when numba imports cleanly.

Both backends consume identical uniform-variate streams, so sampling
results agree (up to floating-point rounding of step probabilities).
"""

import os

_requested = os.environ.get("CORNERGROWTH_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"CORNERGROWTH_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    from . import _numpy_impl as _impl
    backend = "numpy"
else:
    try:
        from . import _numba_impl as _impl
        backend = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import _numpy_impl as _impl
        backend = "numpy"

forward_log_counts = _impl.forward_log_counts
backward_log_counts = _impl.backward_log_counts
sample_energies = _impl.sample_energies
sample_steps = _impl.sample_steps
lpp_grid = _impl.lpp_grid
polymer_log_grid = _impl.polymer_log_grid

__all__ = [
    "backend",
    "forward_log_counts",
    "backward_log_counts",
    "sample_energies",
    "sample_steps",
    "lpp_grid",
    "polymer_log_grid",
]
