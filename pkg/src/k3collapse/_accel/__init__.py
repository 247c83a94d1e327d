"""Hot-kernel backend selection.

The compiled Cython extension is preferred when it imported cleanly; the
NumPy fallback is bit-compatible in contract and within float tolerance in
values. Set K3C_FORCE_FALLBACK=1 to force the fallback (used by the
benchmark and the backend-equivalence tests).
"""

import os

import numpy as np

from . import _fallback

if os.environ.get("K3C_FORCE_FALLBACK"):
    _impl = _fallback
    HAVE_EXT = False
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        HAVE_EXT = True
    except ImportError:
        _impl = _fallback
        HAVE_EXT = False

BACKEND = "cython" if HAVE_EXT else "numpy"


def carlson_rf(x, y, z):
    return _impl.carlson_rf(x, y, z)


def pair_distortion(d1, d2, xs, ys):
    return _impl.pair_distortion(
        np.ascontiguousarray(d1, dtype=np.float64),
        np.ascontiguousarray(d2, dtype=np.float64),
        np.ascontiguousarray(xs, dtype=np.int64),
        np.ascontiguousarray(ys, dtype=np.int64),
    )


def best_reassignment(d1, d2, xs, ys, r, candidates):
    return _impl.best_reassignment(
        np.ascontiguousarray(d1, dtype=np.float64),
        np.ascontiguousarray(d2, dtype=np.float64),
        np.ascontiguousarray(xs, dtype=np.int64),
        np.ascontiguousarray(ys, dtype=np.int64),
        int(r),
        np.ascontiguousarray(candidates, dtype=np.int64),
    )


def min_torus_distance(delta, gram, shifts):
    return _impl.min_torus_distance(
        np.ascontiguousarray(delta, dtype=np.float64),
        np.ascontiguousarray(gram, dtype=np.float64),
        np.ascontiguousarray(shifts, dtype=np.float64),
    )
