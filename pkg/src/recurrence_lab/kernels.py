"""Backend selection for the hot loops.

The compiled extension is used when available; set ``RECLAB_PURE=1`` to force
the numpy fallback (used by the parity tests and the benchmark).
"""

import os

if os.environ.get("RECLAB_PURE"):
    from . import _kernels_np as _impl

    COMPILED = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        from . import _kernels_np as _impl

        COMPILED = False

orbit_rect_hits = _impl.orbit_rect_hits
orbit_hyp_hits = _impl.orbit_hyp_hits
rect_hits_at_n = _impl.rect_hits_at_n
hyp_hits_at_n = _impl.hyp_hits_at_n
indicator_pair_counts = _impl.indicator_pair_counts
advance_orbit = _impl.advance_orbit


def backend_name():
    return "compiled" if COMPILED else "python"
