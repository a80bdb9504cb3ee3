"""Hot-kernel backend selection.

The numba backend is used when importable; set INTERSAFE_NO_NUMBA=1 to
force the pure-numpy fallback (same contracts, no JIT).  The active
backend name is exposed as BACKEND.
"""

import os

_force_numpy = os.environ.get("INTERSAFE_NO_NUMBA", "").lower() in {"1", "true", "yes"}

if _force_numpy:
    from . import numpy_impl as _impl
else:
    try:
        from . import numba_impl as _impl
    except ImportError:
        from . import numpy_impl as _impl

BACKEND = _impl.BACKEND
ttc_batch = _impl.ttc_batch
frame_pairs = _impl.frame_pairs
polyline_transits = _impl.polyline_transits
points_in_polygon = _impl.points_in_polygon
polygon_edge_distance = _impl.polygon_edge_distance

__all__ = [
    "BACKEND",
    "ttc_batch",
    "frame_pairs",
    "polyline_transits",
    "points_in_polygon",
    "polygon_edge_distance",
]
