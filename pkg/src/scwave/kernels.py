"""Backend selection for the hot loops.

The compiled extension is used when importable; ``SCWAVE_PURE_PYTHON=1``
forces the numpy fallback (used by the benchmark and the parity tests).
"""

import os

from . import _fallback

fallback = _fallback

if os.environ.get("SCWAVE_PURE_PYTHON", "") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

active = compiled if compiled is not None else _fallback
BACKEND = "cython" if compiled is not None else "numpy"

coupled_de_trajectory = active.coupled_de_trajectory
coupled_de_advance = active.coupled_de_advance
bec_peel = active.bec_peel
llr_flood = active.llr_flood
