"""Backend selection for the hot elementwise kernels.

The per-mode step update (gautschi_combine) has a compiled single-pass
implementation, preferred at import time; the numpy fallback takes over when
the extension is missing or LIOUWAVE_PURE_PYTHON is set to a non-empty value
other than "0".  `use_backend` switches lanes explicitly, which the
equivalence tests and the benchmark rely on.  The shifted-exponential kernel
is numpy in both lanes (vectorized exp is already the fastest option here).
Call sites must go through the module attributes
(``kernels.gautschi_combine``) so a switch is seen everywhere.
"""

import os

from . import _kernels_py

try:
    from . import _kernels as _ext
except ImportError:
    _ext = None

HAVE_EXT = _ext is not None

exp_shifted_sum = _kernels_py.exp_shifted_sum
gautschi_combine = _kernels_py.gautschi_combine
backend = "python"


def use_backend(name):
    """Select the kernel lane: "ext" (compiled) or "python" (numpy)."""
    global gautschi_combine, backend
    if name == "ext":
        if _ext is None:
            raise RuntimeError("compiled kernel extension is not available")
        gautschi_combine = _ext.gautschi_combine
    elif name == "python":
        gautschi_combine = _kernels_py.gautschi_combine
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    backend = name


_force_py = os.environ.get("LIOUWAVE_PURE_PYTHON", "")
if HAVE_EXT and _force_py in ("", "0"):
    use_backend("ext")
