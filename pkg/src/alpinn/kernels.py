"""Backend selection for the fused jet-activation kernels.

The compiled extension is used when importable; set ``ALPINN_PURE_PYTHON=1``
to force the numpy fallback.  Both backends implement identical contracts
and are cross-checked in the test suite and in ``benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

import os

if os.environ.get("ALPINN_PURE_PYTHON") == "1":
    from ._kernels_py import sin_jet_bwd, sin_jet_fwd, tanh_jet_bwd, tanh_jet_fwd

    BACKEND = "python"
else:
    try:
        from ._kernels import sin_jet_bwd, sin_jet_fwd, tanh_jet_bwd, tanh_jet_fwd

        BACKEND = "compiled"
    except ImportError:
        from ._kernels_py import sin_jet_bwd, sin_jet_fwd, tanh_jet_bwd, tanh_jet_fwd

        BACKEND = "python"

__all__ = ["tanh_jet_fwd", "tanh_jet_bwd", "sin_jet_fwd", "sin_jet_bwd", "BACKEND"]
