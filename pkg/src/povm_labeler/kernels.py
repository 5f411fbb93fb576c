"""Backend selection for the Monte Carlo kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise, or
when ``POVM_LABELER_PURE=1`` is set, the numpy implementation in
``_pykernels`` takes over. Both produce identical results.
"""

import os

if os.environ.get("POVM_LABELER_PURE", "") not in ("", "0"):
    from ._pykernels import map_decisions, run_trials

    BACKEND = "python"
else:
    try:
        from ._ckernels import map_decisions, run_trials

        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._pykernels import map_decisions, run_trials

        BACKEND = "python"

__all__ = ["BACKEND", "map_decisions", "run_trials"]
