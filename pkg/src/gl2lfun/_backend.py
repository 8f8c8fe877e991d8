"""Select the kernel implementation at import time.

The compiled extension is used when it imports; ``GL2LFUN_BACKEND=python``
forces the fallback (used by the test-suite to exercise both paths).
"""
from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("GL2LFUN_BACKEND", "").lower()

compiled = None
if _forced != "python":
    try:
        from . import _kernels as compiled  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - depends on build
        if _forced == "compiled":
            raise
        compiled = None

kernels = compiled if compiled is not None else _kernels_py
BACKEND = "compiled" if compiled is not None else "python"

eta_power = kernels.eta_power
neumaier_sum = kernels.neumaier_sum
phase_line_sum = kernels.phase_line_sum


def csum(z) -> complex:
    """Compensated sum of a complex (or real) array in index order."""
    import numpy as np

    a = np.ascontiguousarray(z)
    if np.iscomplexobj(a):
        return complex(
            neumaier_sum(np.ascontiguousarray(a.real, dtype=np.float64)),
            neumaier_sum(np.ascontiguousarray(a.imag, dtype=np.float64)),
        )
    return complex(neumaier_sum(np.ascontiguousarray(a, dtype=np.float64)))
